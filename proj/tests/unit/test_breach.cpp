#include <gtest/gtest.h>

#include <random>

#include "fogdeck/breach.hpp"

using namespace fogdeck;
using namespace fogdeck::control;

namespace {

const WorkingRange kRange{20, 30};

struct Feed {
  BreachTracker tracker;
  Notifier notifier;
  std::uint64_t seq = 0;

  void run(const std::vector<double>& values, bool alerts) {
    for (double v : values) {
      ++seq;
      tracker.observe(SensorReading{{"fog-1", "sensor-1"}, v, Unit::Celsius, static_cast<TimestampMs>(seq * 1000), seq},
                      kRange, alerts, &notifier);
    }
  }
};

// Count maximal runs of Abnormal evaluations.
std::size_t rle_abnormal_runs(const std::vector<double>& values) {
  std::size_t runs = 0;
  bool in = false;
  for (double v : values) {
    bool ab = v < kRange.low || v > kRange.high;
    if (ab && !in) ++runs;
    in = ab;
  }
  return runs;
}

}  // namespace

TEST(Breach, OneEpisodeOneAlert) {
  Feed f;
  f.run({25, 35, 36, 25}, true);
  auto eps = f.tracker.episodes();
  ASSERT_EQ(eps.size(), 1u);
  EXPECT_EQ(eps[0].peak_value, 36);
  EXPECT_EQ(eps[0].started_at, 2000);
  EXPECT_EQ(eps[0].ended_at, 4000);
  EXPECT_EQ(f.notifier.records().size(), 1u);
}

TEST(Breach, AlertsOff) {
  Feed f;
  f.run({25, 35, 36, 25}, false);
  EXPECT_EQ(f.tracker.episodes().size(), 1u);
  EXPECT_TRUE(f.notifier.records().empty());
}

TEST(Breach, Oscillation) {
  Feed f;
  f.run({35, 25, 35}, true);
  EXPECT_EQ(f.tracker.episodes().size(), 2u);
  EXPECT_EQ(f.notifier.records().size(), 2u);
  EXPECT_TRUE(f.tracker.open_episode({"fog-1", "sensor-1"}).has_value());
}

TEST(Breach, PeakIsFarthestFromRange) {
  Feed f;
  f.run({31, 12, 33, 25}, false);
  ASSERT_EQ(f.tracker.episodes().size(), 1u);
  EXPECT_EQ(f.tracker.episodes()[0].peak_value, 12);
}

TEST(Breach, StaleSeqIgnored) {
  BreachTracker t;
  DeviceId id{"fog-1", "sensor-1"};
  EXPECT_TRUE(t.observe({id, 35, Unit::Celsius, 1, 5}, kRange, false, nullptr));
  EXPECT_FALSE(t.observe({id, 25, Unit::Celsius, 1, 5}, kRange, false, nullptr));
  EXPECT_FALSE(t.observe({id, 25, Unit::Celsius, 1, 3}, kRange, false, nullptr));
  EXPECT_TRUE(t.open_episode(id));
}

TEST(Breach, EpisodesMatchRunLengthOracle) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> val(10, 40);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> values(1 + rng() % 60);
    for (auto& v : values) v = val(rng);
    Feed f;
    f.run(values, true);
    auto runs = rle_abnormal_runs(values);
    ASSERT_EQ(f.tracker.episodes().size(), runs);
    ASSERT_EQ(f.notifier.records().size(), runs);
  }
}

TEST(Notifier, SinkFailureIsRecorded) {
  struct Broken : AlertSink {
    std::string name() const override { return "broken"; }
    void send(const Alert&) override { throw std::runtime_error("smtp down"); }
  };
  Notifier n(std::make_unique<Broken>());
  auto rec = n.dispatch(Alert{{"fog-1", "sensor-1"}, 1, 35, kRange, 0, "s", "b"});
  EXPECT_FALSE(rec.delivered);
  EXPECT_EQ(rec.error, "smtp down");
  EXPECT_EQ(n.records().size(), 1u);
}
