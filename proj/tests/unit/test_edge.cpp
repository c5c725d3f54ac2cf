#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fogdeck/edge.hpp"

using namespace fogdeck;
using namespace fogdeck::edge;

namespace {
const DeviceId kId{"fog-1", "sensor-1"};
}

TEST(SensorSim, ConstantWaveform) {
  SensorSim s(kId, Unit::Celsius, Constant{25.0}, 0.0, 1);
  for (int t : {0, 1000, 59'000, 3'600'000}) EXPECT_EQ(s.value_at(SimTime(t)), 25.0);
}

TEST(SensorSim, SineAtQuarterPeriod) {
  SensorSim s(kId, Unit::Celsius, Sine{25, 5, 60}, 0.0, 1);
  // frozen oracle: 25 + 5 * sin(2*pi*15/60) = 30.0
  EXPECT_NEAR(s.value_at(SimTime(15'000)), 30.0, 1e-12);
}

TEST(SensorSim, SineMatchesIndependentFormula) {
  SensorSim s(kId, Unit::Celsius, Sine{22, 3, 37}, 0.0, 1);
  for (int t = 0; t < 200'000; t += 700) {
    double expect = 22 + 3 * std::sin(2 * std::numbers::pi * (t / 1000.0) / 37);
    EXPECT_NEAR(s.value_at(SimTime(t)), expect, 1e-9);
  }
}

TEST(SensorSim, ClampedToPhysicalRange) {
  SensorSim hot(kId, Unit::Celsius, Constant{500}, 0.0, 1);
  EXPECT_EQ(hot.value_at(SimTime(0)), physical_range(Unit::Celsius).high);
  SensorSim dry(kId, Unit::PercentRH, Constant{-10}, 0.0, 1);
  EXPECT_EQ(dry.value_at(SimTime(0)), physical_range(Unit::PercentRH).low);
}

TEST(SensorSim, NoiseIsSeeded) {
  SensorSim a(kId, Unit::Celsius, Constant{25}, 0.5, 42);
  SensorSim b(kId, Unit::Celsius, Constant{25}, 0.5, 42);
  SensorSim c(kId, Unit::Celsius, Constant{25}, 0.5, 43);
  bool differs = false;
  for (int t = 0; t < 20'000; t += 1000) {
    EXPECT_EQ(a.value_at(SimTime(t)), b.value_at(SimTime(t)));
    differs = differs || a.value_at(SimTime(t)) != c.value_at(SimTime(t));
  }
  EXPECT_TRUE(differs);
}

TEST(SensorSim, RandomWalkIsPureInTime) {
  SensorSim a(kId, Unit::Celsius, RandomWalk{20, 0.1, 9}, 0.0, 1);
  SensorSim b(kId, Unit::Celsius, RandomWalk{20, 0.1, 9}, 0.0, 1);
  double late = a.value_at(SimTime(90'000));
  for (int t = 0; t <= 90'000; t += 1000) b.value_at(SimTime(t));
  EXPECT_EQ(b.value_at(SimTime(90'000)), late);
  // consecutive seconds differ by exactly one step
  for (int s = 1; s < 50; ++s) {
    EXPECT_NEAR(std::abs(a.value_at(SimTime(s * 1000)) - a.value_at(SimTime((s - 1) * 1000))), 0.1, 1e-9);
  }
}

TEST(SensorSim, SequenceAndFailure) {
  SensorSim s(kId, Unit::Celsius, Constant{25}, 0.0, 1);
  RtcSim rtc{0, 0};
  EXPECT_EQ(s.sample(SimTime(0), rtc).seq, 1u);
  EXPECT_EQ(s.sample(SimTime(1000), rtc).seq, 2u);
  s.set_failed(true);
  EXPECT_THROW(s.sample(SimTime(2000), rtc), SensorFailed);
  s.set_failed(false);
  auto r = s.sample(SimTime(3000), rtc);
  EXPECT_EQ(r.seq, 3u);  // failures do not consume a seq
  EXPECT_EQ(r.timestamp, 3000);
}

TEST(Rtc, Identity) { EXPECT_EQ(rtc_now(RtcSim{0, 0}, 1000), 1000); }

TEST(Rtc, TwoPpmOverOneYear) {
  // +63.072 s after 365 days
  EXPECT_EQ(rtc_now(RtcSim{2.0, 0}, 31'536'000'000), 31'536'063'072);
}

TEST(Rtc, NegativeDrift) { EXPECT_EQ(rtc_now(RtcSim{-2.0, 0}, 500'000'000), 499'999'000); }

TEST(Rtc, MonotonicForDriftAboveMinusMillion) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ppm(-100, 100);
  for (int i = 0; i < 200; ++i) {
    RtcSim rtc{ppm(rng), 1'700'000'000'000};
    std::int64_t prev = rtc_now(rtc, 0);
    for (std::int64_t t = 1; t < 3000; t += 7) {
      auto now = rtc_now(rtc, t);
      EXPECT_GE(now, prev);
      prev = now;
    }
  }
}

TEST(Buzzer, Actuate) {
  BuzzerSim b{{"fog-1", "buzzer-1"}};
  auto on = actuate(b, ActuatorCommand{5, 440, 1000});
  EXPECT_TRUE(on.powered);
  EXPECT_EQ(on.power_volts, 5.0);
  EXPECT_EQ(on.tone_hz, 440.0);
  EXPECT_EQ(actuate(b, ActuatorCommand{12, 440, 1000}).power_volts, 9.0);
  EXPECT_EQ(actuate(b, ActuatorCommand{1, 440, 1000}).power_volts, 3.3);
  EXPECT_THROW(actuate(b, ActuatorCommand{5, 440, 0}), RejectedCommand);
  EXPECT_THROW(actuate(b, ActuatorCommand{5, 0, 100}), RejectedCommand);
  EXPECT_GT(actuate(b, ActuatorCommand{9, 440, 10}).loudness(), actuate(b, ActuatorCommand{4, 440, 10}).loudness());
}

TEST(Buzzer, CountdownPowersOff) {
  auto on = actuate(BuzzerSim{{"fog-1", "buzzer-1"}}, ActuatorCommand{5, 440, 1000});
  auto mid = advance(on, 400);
  EXPECT_TRUE(mid.powered);
  EXPECT_EQ(mid.remaining_ms, 600);
  EXPECT_FALSE(advance(mid, 600).powered);
}

TEST(EdgeBank, InjectFailure) {
  EdgeBank bank;
  bank.add_sensor(SensorSim(kId, Unit::Celsius, Constant{25}, 0.0, 1));
  bank.inject_failure("sensor-1", true);
  EXPECT_THROW(bank.sensor("sensor-1").sample(SimTime(0), RtcSim{}), SensorFailed);
  bank.inject_failure("sensor-1", false);
  EXPECT_NO_THROW(bank.sensor("sensor-1").sample(SimTime(0), RtcSim{}));
  EXPECT_THROW(bank.inject_failure("ghost", true), UnknownDevice);
}
