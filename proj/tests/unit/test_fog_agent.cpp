#include <gtest/gtest.h>

#include "fogdeck/fog_agent.hpp"

using namespace fogdeck;
using namespace fogdeck::fog;
using std::chrono::seconds;

namespace {

DeviceSpec sensor(const std::string& id, double value, int period_s = 5) {
  DeviceSpec s;
  s.desc.id = {"fog-1", id};
  s.desc.unit = Unit::Celsius;
  s.desc.push_period = seconds(period_s);
  s.desc.threshold = WorkingRange{20, 30};
  s.waveform = edge::Constant{value};
  return s;
}

DeviceSpec buzzer(const std::string& id = "buzzer-1") {
  DeviceSpec b;
  b.desc.id = {"fog-1", id};
  b.desc.kind = DeviceKind::BuzzerActuator;
  return b;
}

AgentConfig config(std::size_t capacity = kDefaultBufferCapacity) {
  AgentConfig c;
  c.fog_id = "fog-1";
  c.buffer_capacity = capacity;
  return c;
}

SimTime at(int s) { return SimTime(s * 1000); }

const HealthStatus& health_of(const std::vector<HealthStatus>& hs, const std::string& dev) {
  for (const auto& h : hs) {
    if (h.subject.device_id == dev) return h;
  }
  throw std::out_of_range(dev);
}

}  // namespace

TEST(FogAgent, SamplesOnPeriod) {
  FogAgent a(config(), {sensor("sensor-1", 25), sensor("sensor-2", 25)});
  EXPECT_EQ(a.tick(at(0)).readings.size(), 2u);
  for (int t = 1; t < 5; ++t) EXPECT_TRUE(a.tick(at(t)).readings.empty());
  EXPECT_EQ(a.tick(at(5)).readings.size(), 2u);
  for (int t = 6; t < 10; ++t) a.tick(at(t));
  EXPECT_EQ(a.tick(at(10)).readings.size(), 2u);
  EXPECT_EQ(a.counters().emitted, 6u);
}

TEST(FogAgent, FailedSensorDoesNotStopOthers) {
  FogAgent a(config(), {sensor("sensor-1", 25), sensor("sensor-2", 25)});
  a.inject_failure("sensor-1", true);
  auto r = a.tick(at(0));
  ASSERT_EQ(r.readings.size(), 1u);
  EXPECT_EQ(r.readings[0].id.device_id, "sensor-2");
  ASSERT_EQ(r.failed.size(), 1u);
  auto hs = a.health_snapshot(at(0));
  EXPECT_EQ(health_of(hs, "sensor-1").state, HealthState::Faulty);
  EXPECT_EQ(health_of(hs, "sensor-2").state, HealthState::Healthy);
  // a failed sensor is retried every tick and recovers on the next one
  a.inject_failure("sensor-1", false);
  EXPECT_EQ(a.tick(at(1)).readings.size(), 1u);
  EXPECT_EQ(health_of(a.health_snapshot(at(1)), "sensor-1").state, HealthState::Healthy);
}

TEST(FogAgent, SilentSensorTurnsFaulty) {
  FogAgent a(config(), {sensor("sensor-1", 25, 5)});
  a.tick(at(0));
  EXPECT_EQ(health_of(a.health_snapshot(at(10)), "sensor-1").state, HealthState::Healthy);
  auto h = health_of(a.health_snapshot(at(11)), "sensor-1");
  EXPECT_EQ(h.state, HealthState::Faulty);
  EXPECT_EQ(h.reason, "no sample");
}

TEST(FogAgent, AbnormalReadingFiresBuzzer) {
  FogAgent a(config(), {sensor("sensor-1", 35), buzzer()});
  auto r = a.tick(at(0));
  ASSERT_EQ(r.breaches.size(), 1u);
  ASSERT_EQ(r.actuations.size(), 1u);
  EXPECT_TRUE(r.actuations[0].automatic);
  EXPECT_EQ(r.actuations[0].cause, (DeviceId{"fog-1", "sensor-1"}));
  EXPECT_TRUE(a.edge().buzzer("buzzer-1").powered);
  FogAgent quiet(config(), {sensor("sensor-1", 25), buzzer()});
  EXPECT_TRUE(quiet.tick(at(0)).actuations.empty());
}

TEST(FogAgent, PushDrainsBuffer) {
  FogAgent a(config(), {sensor("sensor-1", 25, 1)});
  for (int t = 0; t < 5; ++t) a.tick(at(t));
  std::vector<SensorReading> got;
  auto rep = a.push_cycle([&](std::span<const SensorReading> b) {
    got.insert(got.end(), b.begin(), b.end());
    return b.size();
  });
  EXPECT_EQ(rep.pushed, 5u);
  EXPECT_EQ(rep.buffered, 0u);
  EXPECT_EQ(got.size(), 5u);
}

TEST(FogAgent, ThreeFailuresMarkCloudUnreachable) {
  FogAgent a(config(), {sensor("sensor-1", 25, 1)});
  auto fail = [](std::span<const SensorReading>) -> std::size_t { throw std::runtime_error("down"); };
  auto ok = [](std::span<const SensorReading> b) { return b.size(); };
  for (int t = 0; t < 3; ++t) {
    a.tick(at(t));
    EXPECT_EQ(a.cloud_mode(), CloudMode::CloudReachable);
    a.push_cycle(fail);
  }
  EXPECT_EQ(a.cloud_mode(), CloudMode::CloudUnreachable);
  EXPECT_EQ(a.pending().size(), 3u);
  a.tick(at(3));
  auto rep = a.push_cycle(ok);
  EXPECT_EQ(rep.pushed, 4u);
  EXPECT_EQ(a.cloud_mode(), CloudMode::CloudReachable);
}

TEST(FogAgent, BoundedBufferDropsOldest) {
  FogAgent a(config(3), {sensor("sensor-1", 25, 1)});
  for (int t = 0; t < 5; ++t) a.tick(at(t));
  EXPECT_EQ(a.pending().size(), 3u);
  EXPECT_EQ(a.counters().dropped, 2u);
  EXPECT_EQ(a.pending().front().seq, 3u);
}

TEST(FogAgent, InstructionsApplyExactlyOnce) {
  FogAgent a(config(), {sensor("sensor-1", 25, 1), sensor("sensor-2", 25, 1)});
  std::vector<Instruction> in{{1, Target{"fog-1", "sensor-2"}, SetEnabled{false}, 0},
                              {2, Target{"fog-1", "sensor-1"}, SetPushPeriod{seconds(10)}, 0}};
  EXPECT_EQ(a.apply_instructions(in), 2u);
  EXPECT_EQ(a.apply_instructions(in), 0u);
  EXPECT_EQ(a.last_applied_instr(), 2u);
  EXPECT_FALSE(a.descriptor("sensor-2")->enabled);
  EXPECT_EQ(a.descriptor("sensor-1")->push_period, seconds(10));
}

TEST(FogAgent, DisabledSensorStopsAndPushPeriodChangesCadence) {
  FogAgent a(config(), {sensor("sensor-1", 25, 1), sensor("sensor-2", 25, 1)});
  a.tick(at(0));
  a.apply_direct({0, Target{"fog-1", "sensor-2"}, SetEnabled{false}, 0});
  a.apply_direct({0, Target{"fog-1", "sensor-1"}, SetPushPeriod{seconds(10)}, 0});
  std::vector<int> s1_times;
  for (int t = 1; t <= 30; ++t) {
    for (const auto& r : a.tick(at(t)).readings) {
      EXPECT_NE(r.id.device_id, "sensor-2");
      s1_times.push_back(t);
    }
  }
  EXPECT_EQ(s1_times, (std::vector<int>{10, 20, 30}));
  EXPECT_EQ(health_of(a.health_snapshot(at(30)), "sensor-2").reason, "disabled");
}

TEST(FogAgent, DirectCommandErrors) {
  FogAgent a(config(), {sensor("sensor-1", 25), buzzer()});
  EXPECT_THROW(a.apply_direct({0, Target{"fog-1", "ghost"}, SetEnabled{false}, 0}), UnknownTarget);
  EXPECT_THROW(a.apply_direct({0, Target{"fog-2", "sensor-1"}, SetEnabled{false}, 0}), UnknownTarget);
  EXPECT_THROW(a.apply_direct({0, Target{"fog-1", "sensor-1"}, ActuatorCommand{}, 0}), ValidationError);
  EXPECT_THROW(a.apply_direct({0, Target{"fog-1", "buzzer-1"}, ActuatorCommand{5, 440, 0}}), std::exception);
  a.apply_direct({0, Target{"fog-1", "buzzer-1"}, ActuatorCommand{5, 440, 1000}, 0});
  EXPECT_TRUE(a.edge().buzzer("buzzer-1").powered);
}

TEST(FogAgent, ReportCarriesTimestampFromRtc) {
  auto c = config();
  c.rtc = edge::RtcSim{2.0, 1'000'000};
  FogAgent a(c, {sensor("sensor-1", 25, 1)});
  auto r = a.tick(SimTime(500'000'000));
  ASSERT_EQ(r.readings.size(), 1u);
  EXPECT_EQ(r.readings[0].timestamp, 1'000'000 + 500'000'000 + 1000);
}

TEST(FogAgent, RejectsDuplicateDevices) {
  EXPECT_THROW(FogAgent(config(), {sensor("sensor-1", 25), sensor("sensor-1", 25)}), std::invalid_argument);
}
