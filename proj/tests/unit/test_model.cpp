#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fogdeck/json_codec.hpp"
#include "fogdeck/model.hpp"

using namespace fogdeck;

namespace {

DeviceDescriptor sensor(std::string id = "sensor-1") {
  DeviceDescriptor d;
  d.id = {"fog-1", std::move(id)};
  d.unit = Unit::Celsius;
  d.threshold = WorkingRange{20, 30};
  return d;
}

SensorReading reading(double v, std::uint64_t seq = 1) {
  return SensorReading{{"fog-1", "sensor-1"}, v, Unit::Celsius, 1000, seq};
}

}  // namespace

TEST(Threshold, BoundsAreInclusive) {
  WorkingRange r{20, 30};
  EXPECT_EQ(evaluate_threshold(25.0, r), Evaluation::Normal);
  EXPECT_EQ(evaluate_threshold(30.0, r), Evaluation::Normal);
  EXPECT_EQ(evaluate_threshold(20.0, r), Evaluation::Normal);
  EXPECT_EQ(evaluate_threshold(30.1, r), Evaluation::Abnormal);
  EXPECT_EQ(evaluate_threshold(19.9, r), Evaluation::Abnormal);
}

TEST(Threshold, SweepMatchesComparisonOracle) {
  WorkingRange r{-5.5, 12.25};
  for (int i = -400; i <= 400; ++i) {
    double v = i * 0.05;
    bool abnormal = v < r.low || v > r.high;
    EXPECT_EQ(evaluate_threshold(v, r) == Evaluation::Abnormal, abnormal) << v;
  }
}

TEST(Indicator, Colors) {
  auto d = sensor();
  EXPECT_EQ(indicator_color(reading(22), d), Indicator::Green);
  EXPECT_EQ(indicator_color(reading(35), d), Indicator::Red);
  EXPECT_EQ(indicator_color(std::nullopt, d), Indicator::Grey);
  d.enabled = false;
  EXPECT_EQ(indicator_color(reading(22), d), Indicator::Grey);
}

TEST(Validation, Readings) {
  EXPECT_TRUE(validate_reading(reading(22)).empty());
  auto nan = validate_reading(reading(std::numeric_limits<double>::quiet_NaN()));
  ASSERT_EQ(nan.size(), 1u);
  EXPECT_EQ(nan[0], Violation::NonFiniteValue);
  auto clock = validate_reading(SensorReading{{"fog-1", "rtc"}, 40, Unit::PercentRH, 0, 1}, DeviceKind::Clock);
  ASSERT_FALSE(clock.empty());
  EXPECT_EQ(clock[0], Violation::UnitKindMismatch);
  auto bad_id = reading(1);
  bad_id.id.device_id = "has space";
  EXPECT_FALSE(validate_reading(bad_id).empty());
}

TEST(Validation, Descriptors) {
  auto d = sensor();
  EXPECT_TRUE(validate_descriptor(d).empty());
  d.threshold = WorkingRange{30, 20};
  EXPECT_FALSE(validate_descriptor(d).empty());
  d = sensor();
  d.push_period = std::chrono::seconds(0);
  EXPECT_FALSE(validate_descriptor(d).empty());
  DeviceDescriptor buzzer;
  buzzer.id = {"fog-1", "buzzer-1"};
  buzzer.kind = DeviceKind::BuzzerActuator;
  buzzer.threshold = WorkingRange{1, 2};
  EXPECT_FALSE(validate_descriptor(buzzer).empty());
}

TEST(Validation, Bodies) {
  EXPECT_TRUE(validate_body(SetThreshold{{20, 30}}, DeviceKind::TemperatureHumiditySensor).empty());
  EXPECT_FALSE(validate_body(SetThreshold{{20, 30}}, DeviceKind::BuzzerActuator).empty());
  EXPECT_FALSE(validate_body(ActuatorCommand{}, DeviceKind::TemperatureHumiditySensor).empty());
  EXPECT_TRUE(validate_body(ActuatorCommand{}, DeviceKind::BuzzerActuator).empty());
  EXPECT_FALSE(validate_body(SetThreshold{{30, 20}}, DeviceKind::TemperatureHumiditySensor).empty());
  EXPECT_FALSE(validate_body(SetPushPeriod{std::chrono::seconds(0)}, DeviceKind::TemperatureHumiditySensor).empty());
}

TEST(Json, RoundTrips) {
  auto d = sensor();
  d.location = Location{"lab", 53.3, -6.2};
  EXPECT_EQ(json(d).get<DeviceDescriptor>(), d);
  auto r = reading(21.5, 9);
  EXPECT_EQ(json(r).get<SensorReading>(), r);
  Instruction in{4, Target::node("fog-2"), ActuatorCommand{5, 440, 1000}, 77};
  EXPECT_EQ(json(in).get<Instruction>(), in);
  for (InstructionBody b : {InstructionBody{SetEnabled{false}}, InstructionBody{SetThreshold{{1, 2}}},
                            InstructionBody{SetPushPeriod{std::chrono::seconds(10)}},
                            InstructionBody{SetEmailAlerts{true}}}) {
    EXPECT_EQ(json(b).get<InstructionBody>(), b);
  }
  NodeReport rep;
  rep.fog_id = "fog-1";
  rep.cloud_mode = "cloud_reachable";
  rep.health.push_back(HealthStatus{Target::device(d.id), HealthState::Faulty, "sensor failed", 5});
  rep.devices.push_back(d);
  EXPECT_EQ(json(rep).get<NodeReport>(), rep);
}

TEST(DeviceIdText, ParseAndFormat) {
  auto id = parse_device_id("fog-3/sensor-2");
  EXPECT_EQ(id.fog_id, "fog-3");
  EXPECT_EQ(id.device_id, "sensor-2");
  EXPECT_EQ(id.str(), "fog-3/sensor-2");
  EXPECT_THROW(parse_device_id("nodevice"), std::invalid_argument);
}
