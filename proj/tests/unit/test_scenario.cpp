#include <gtest/gtest.h>

#include <set>

#include "fogdeck/fleet.hpp"
#include "fogdeck/scenario.hpp"
#include "fogdeck/scenario_runner.hpp"

using namespace fogdeck;
using namespace fogdeck::scenario;

namespace {

const char* kMinimal = R"(
name: minimal
duration_s: 10
fleet:
  generate: {nodes: 2, devices: 4}
)";

}  // namespace

TEST(Fleet, DeskScale) {
  auto nodes = generate_fleet({100, 10, 7, 7707, std::chrono::seconds(1)});
  ASSERT_EQ(nodes.size(), 100u);
  std::size_t devices = 0;
  std::set<std::uint16_t> ports;
  for (const auto& n : nodes) {
    devices += n.devices.size();
    ports.insert(n.port);
  }
  EXPECT_EQ(devices, 1000u);
  EXPECT_EQ(ports.size(), 100u);
  EXPECT_EQ(nodes.front().port, 7707);
  EXPECT_EQ(nodes.back().port, 7806);
}

TEST(Fleet, PrototypeShape) {
  auto nodes = generate_fleet({1, 4, 1, 0, std::chrono::seconds(1)});
  ASSERT_EQ(nodes.size(), 1u);
  ASSERT_EQ(nodes[0].devices.size(), 4u);
  std::size_t sensors = 0, buzzers = 0;
  for (const auto& d : nodes[0].devices) {
    sensors += is_sensor(d.desc.kind) ? 1 : 0;
    buzzers += d.desc.kind == DeviceKind::BuzzerActuator ? 1 : 0;
  }
  EXPECT_EQ(sensors, 3u);
  EXPECT_EQ(buzzers, 1u);
}

TEST(Fleet, ErrorsAndDeterminism) {
  EXPECT_THROW(generate_fleet({0, 4, 1, 0, std::chrono::seconds(1)}), std::invalid_argument);
  EXPECT_THROW(generate_fleet({1, 0, 1, 0, std::chrono::seconds(1)}), std::invalid_argument);
  EXPECT_THROW(generate_fleet({10, 4, 1, 65530, std::chrono::seconds(1)}), PortExhausted);
  auto a = generate_fleet({5, 6, 42, 0, std::chrono::seconds(1)});
  auto b = generate_fleet({5, 6, 42, 0, std::chrono::seconds(1)});
  auto c = generate_fleet({5, 6, 43, 0, std::chrono::seconds(1)});
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].drift_ppm, b[i].drift_ppm);
    for (std::size_t j = 0; j < a[i].devices.size(); ++j) {
      EXPECT_EQ(a[i].devices[j].desc, b[i].devices[j].desc);
      EXPECT_EQ(a[i].devices[j].seed, b[i].devices[j].seed);
      any_diff = any_diff || a[i].devices[j].seed != c[i].devices[j].seed;
    }
  }
  EXPECT_TRUE(any_diff);
}

TEST(ScenarioFile, ParsesMinimal) {
  auto s = parse_scenario(kMinimal);
  EXPECT_EQ(s.name, "minimal");
  EXPECT_EQ(s.nodes.size(), 2u);
  EXPECT_EQ(s.tick, std::chrono::milliseconds(1000));
  EXPECT_TRUE(s.timeline.empty());
}

TEST(ScenarioFile, RejectsBadInput) {
  EXPECT_THROW(parse_scenario("name: x\n"), ScenarioError);
  EXPECT_THROW(parse_scenario(std::string(kMinimal) + "bogus: 1\n"), ScenarioError);
  EXPECT_THROW(parse_scenario(std::string(kMinimal) + R"(
timeline:
  - {at_s: 5, action: stop_store}
  - {at_s: 2, action: restore_store}
)"),
               ScenarioError);
  EXPECT_THROW(parse_scenario(std::string(kMinimal) + R"(
timeline:
  - {at_s: 5, action: fail_sensor, node: fog-1, device: ghost}
)"),
               ScenarioError);
  EXPECT_THROW(parse_scenario(std::string(kMinimal) + R"(
timeline:
  - {at_s: 5, action: explode}
)"),
               ScenarioError);
  EXPECT_THROW(parse_scenario(std::string(kMinimal) + R"(
timeline:
  - {at_s: 50, action: stop_store}
)"),
               ScenarioError);
  EXPECT_THROW(parse_scenario(std::string(kMinimal) + R"(
timeline:
  - {at_s: 5, action: rogue_tamper, name: nobody}
)"),
               ScenarioError);
  EXPECT_THROW(parse_scenario("{{{"), ScenarioError);
}

TEST(ScenarioFile, ControlBody) {
  auto s = parse_scenario(std::string(kMinimal) + R"(
timeline:
  - {at_s: 2, action: set_control, node: fog-1, device: sensor-1, body: {type: set_threshold, low: 10, high: 20}}
)");
  ASSERT_EQ(s.timeline.size(), 1u);
  ASSERT_TRUE(s.timeline[0].body);
  EXPECT_EQ(*s.timeline[0].body, InstructionBody(SetThreshold{WorkingRange{10, 20}}));
}

TEST(NodeFile, Parses) {
  auto f = parse_node_file(R"(
store_url: http://127.0.0.1:7800
listen: {port: 7999}
node:
  id: fog-4
  devices:
    - {id: sensor-1, push_period_s: 2, threshold: [20, 30]}
    - {id: buzzer-1, kind: buzzer_actuator}
)");
  EXPECT_EQ(f.node.fog_id, "fog-4");
  EXPECT_EQ(f.node.port, 7999);
  EXPECT_EQ(f.node.devices.size(), 2u);
  EXPECT_THROW(parse_node_file("node: {id: fog-1, devices: [{id: a}, {id: a}]}"), ScenarioError);
}

TEST(Runner, EmptyTimelineRunsClean) {
  auto s = parse_scenario(kMinimal);
  auto r = run_scenario(s);
  EXPECT_EQ(r.exit_code, 0);
  // 2 nodes x 3 sensors, sampled at t = 0..9 with the generated 1 s period
  EXPECT_EQ(r.store_rows, 60u);
  std::set<std::string> streams;
  for (const auto& row : r.final_table) streams.insert(row.id.str());
  EXPECT_EQ(streams.size(), 6u);
}

TEST(Runner, EventLogIsDeterministic) {
  auto s = parse_scenario(std::string(kMinimal) + R"(
timeline:
  - {at_s: 3, action: fail_sensor, node: fog-1, device: sensor-1}
  - {at_s: 4, action: stop_store}
  - {at_s: 8, action: restore_store}
)");
  auto a = run_scenario(s);
  auto b = run_scenario(s);
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    EXPECT_EQ(strip_wall_clock(a.events[i]), strip_wall_clock(b.events[i])) << i;
  }
}
