#pragma once

// Deterministic fleet generation: node and device layouts, waveforms, seeds
// and listener ports derived from one base seed.

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fogdeck/fog_agent.hpp"

namespace fogdeck {

struct NodeSpec {
  std::string fog_id;
  std::uint16_t port = 0;  // 0 = ephemeral
  double drift_ppm = 0.0;
  std::size_t buffer_capacity = fog::kDefaultBufferCapacity;
  std::vector<fog::DeviceSpec> devices;
};

struct FleetOptions {
  std::size_t nodes = 1;
  std::size_t devices_per_node = 4;
  std::uint64_t seed = 1;
  /// First listener port; node i gets base_port + i. 0 = every node ephemeral.
  std::uint16_t base_port = 7707;
  std::chrono::seconds push_period{1};
};

class PortExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Node i is "fog-<i+1>". With M devices per node there are M-1 sensors
/// ("sensor-1".., alternating temperature and humidity) and "buzzer-1"; a
/// single-device node gets one temperature sensor. Throws std::invalid_argument
/// when nodes or devices_per_node is 0, PortExhausted when a port would pass 65535.
std::vector<NodeSpec> generate_fleet(const FleetOptions& options);

}  // namespace fogdeck
