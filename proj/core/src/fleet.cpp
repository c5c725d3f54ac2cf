#include "fogdeck/fleet.hpp"

namespace fogdeck {

namespace {

// Uniform in [0, 1) from a 64-bit key.
double unit(std::uint64_t key) { return static_cast<double>(edge::mix64(key) >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<NodeSpec> generate_fleet(const FleetOptions& options) {
  if (options.nodes == 0) throw std::invalid_argument("fleet needs at least one node");
  if (options.devices_per_node == 0) throw std::invalid_argument("fleet needs at least one device per node");
  if (options.base_port != 0 && options.base_port + options.nodes - 1 > 65535) {
    throw PortExhausted("ports " + std::to_string(options.base_port) + ".." +
                        std::to_string(options.base_port + options.nodes - 1) + " exceed 65535");
  }

  std::vector<NodeSpec> fleet;
  fleet.reserve(options.nodes);
  for (std::size_t i = 0; i < options.nodes; ++i) {
    NodeSpec node;
    node.fog_id = "fog-" + std::to_string(i + 1);
    node.port = options.base_port == 0 ? 0 : static_cast<std::uint16_t>(options.base_port + i);
    auto node_key = edge::mix64(options.seed ^ edge::mix64(i + 1));
    // Spread nodes over the Dublin area.
    double lat = 53.30 + 0.10 * unit(node_key ^ 0x1);
    double lon = -6.35 + 0.20 * unit(node_key ^ 0x2);

    std::size_t sensors = options.devices_per_node == 1 ? 1 : options.devices_per_node - 1;
    for (std::size_t d = 0; d < sensors; ++d) {
      auto key = edge::mix64(node_key ^ edge::mix64(0x100 + d));
      fog::DeviceSpec spec;
      auto& desc = spec.desc;
      desc.id = DeviceId{node.fog_id, "sensor-" + std::to_string(d + 1)};
      desc.kind = DeviceKind::TemperatureHumiditySensor;
      desc.push_period = options.push_period;
      desc.location = Location{node.fog_id + " bay " + std::to_string(d / 2 + 1), lat, lon};
      bool humidity = d % 2 == 1;
      desc.unit = humidity ? Unit::PercentRH : Unit::Celsius;
      double period = 60.0 + 240.0 * unit(key ^ 0x3);
      if (humidity) {
        spec.waveform = edge::Sine{45.0 + 20.0 * unit(key ^ 0x4), 5.0 + 5.0 * unit(key ^ 0x5), period};
        spec.noise_stddev = 0.5;
        desc.threshold = WorkingRange{30.0, 70.0};
      } else {
        spec.waveform = edge::Sine{18.0 + 8.0 * unit(key ^ 0x4), 2.0 + 3.0 * unit(key ^ 0x5), period};
        spec.noise_stddev = 0.2;
        desc.threshold = WorkingRange{15.0, 30.0};
      }
      spec.seed = key;
      node.devices.push_back(std::move(spec));
    }
    if (options.devices_per_node > 1) {
      fog::DeviceSpec buzzer;
      buzzer.desc.id = DeviceId{node.fog_id, "buzzer-1"};
      buzzer.desc.kind = DeviceKind::BuzzerActuator;
      buzzer.desc.push_period = options.push_period;
      buzzer.desc.location = Location{node.fog_id + " bay 1", lat, lon};
      node.devices.push_back(std::move(buzzer));
    }
    fleet.push_back(std::move(node));
  }
  return fleet;
}

}  // namespace fogdeck
