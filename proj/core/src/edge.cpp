#include "fogdeck/edge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace fogdeck::edge {

PhysicalRange physical_range(Unit unit) noexcept {
  return unit == Unit::Celsius ? PhysicalRange{0.0, 50.0} : PhysicalRange{20.0, 90.0};
}

TimestampMs rtc_now(const RtcSim& rtc, std::int64_t true_time_ms) noexcept {
  auto drift = std::llround(static_cast<double>(true_time_ms) * rtc.drift_ppm / 1e6);
  return true_time_ms + rtc.epoch_offset_ms + drift;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SensorSim::SensorSim(DeviceId id, Unit unit, Waveform waveform, double noise_stddev,
                     std::uint64_t seed)
    : id_(std::move(id)),
      unit_(unit),
      waveform_(waveform),
      noise_stddev_(noise_stddev),
      seed_(seed) {
  if (!(noise_stddev_ >= 0.0)) throw std::invalid_argument("noise_stddev must be >= 0");
  if (auto* s = std::get_if<Sine>(&waveform_); s && !(s->period_s > 0.0)) {
    throw std::invalid_argument("sine period must be > 0");
  }
}

double SensorSim::walk_offset(std::int64_t whole_seconds) const {
  const auto& walk = std::get<RandomWalk>(waveform_);
  if (whole_seconds < walk_steps_) {
    walk_steps_ = 0;
    walk_sum_ = 0.0;
  }
  while (walk_steps_ < whole_seconds) {
    ++walk_steps_;
    auto bits = mix64(walk.seed ^ mix64(static_cast<std::uint64_t>(walk_steps_)));
    walk_sum_ += (bits & 1U) ? walk.step : -walk.step;
  }
  return walk_sum_;
}

double SensorSim::value_at(SimTime t) const {
  const double seconds = static_cast<double>(t.count()) / 1000.0;
  double v = std::visit(
      [&](const auto& w) -> double {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return w.base;
        } else if constexpr (std::is_same_v<T, Sine>) {
          return w.base + w.amplitude * std::sin(2.0 * std::numbers::pi * seconds / w.period_s);
        } else {
          return w.base + walk_offset(t.count() / 1000);
        }
      },
      waveform_);

  if (noise_stddev_ > 0.0) {
    std::mt19937_64 gen(mix64(seed_ ^ mix64(static_cast<std::uint64_t>(t.count()))));
    std::normal_distribution<double> noise(0.0, noise_stddev_);
    v += noise(gen);
  }
  auto range = physical_range(unit_);
  return std::clamp(v, range.low, range.high);
}

SensorReading SensorSim::sample(SimTime t, const RtcSim& rtc) {
  if (failed_) throw SensorFailed(id_);
  SensorReading r;
  r.id = id_;
  r.value = value_at(t);
  r.unit = unit_;
  r.timestamp = rtc_now(rtc, t.count());
  r.seq = ++seq_;
  return r;
}

BuzzerSim actuate(BuzzerSim buzzer, const ActuatorCommand& cmd) {
  if (buzzer.failed) throw RejectedCommand("buzzer failed: " + buzzer.id.str());
  if (cmd.duration_ms <= 0) throw RejectedCommand("duration_ms must be > 0");
  if (!(cmd.tone_hz > 0.0) || !std::isfinite(cmd.tone_hz)) throw RejectedCommand("tone_hz must be > 0");
  if (!std::isfinite(cmd.power_volts)) throw RejectedCommand("power_volts must be finite");
  buzzer.powered = true;
  buzzer.power_volts = std::clamp(cmd.power_volts, kMinBuzzerVolts, kMaxBuzzerVolts);
  buzzer.tone_hz = cmd.tone_hz;
  buzzer.remaining_ms = cmd.duration_ms;
  return buzzer;
}

BuzzerSim advance(BuzzerSim buzzer, std::int64_t elapsed_ms) noexcept {
  if (!buzzer.powered || elapsed_ms <= 0) return buzzer;
  buzzer.remaining_ms -= elapsed_ms;
  if (buzzer.remaining_ms <= 0) {
    buzzer.remaining_ms = 0;
    buzzer.powered = false;
    buzzer.power_volts = 0.0;
    buzzer.tone_hz = 0.0;
  }
  return buzzer;
}

void EdgeBank::add_sensor(SensorSim sim) {
  auto key = sim.id().device_id;
  if (sensors_.count(key) || buzzers_.count(key)) {
    throw std::invalid_argument("duplicate device id: " + key);
  }
  sensors_.emplace(std::move(key), std::move(sim));
}

void EdgeBank::add_buzzer(BuzzerSim buzzer) {
  auto key = buzzer.id.device_id;
  if (sensors_.count(key) || buzzers_.count(key)) {
    throw std::invalid_argument("duplicate device id: " + key);
  }
  buzzers_.emplace(std::move(key), std::move(buzzer));
}

bool EdgeBank::has_sensor(const std::string& device_id) const { return sensors_.count(device_id) > 0; }
bool EdgeBank::has_buzzer(const std::string& device_id) const { return buzzers_.count(device_id) > 0; }

SensorSim& EdgeBank::sensor(const std::string& device_id) {
  auto it = sensors_.find(device_id);
  if (it == sensors_.end()) throw UnknownDevice(device_id);
  return it->second;
}
const SensorSim& EdgeBank::sensor(const std::string& device_id) const {
  auto it = sensors_.find(device_id);
  if (it == sensors_.end()) throw UnknownDevice(device_id);
  return it->second;
}
BuzzerSim& EdgeBank::buzzer(const std::string& device_id) {
  auto it = buzzers_.find(device_id);
  if (it == buzzers_.end()) throw UnknownDevice(device_id);
  return it->second;
}
const BuzzerSim& EdgeBank::buzzer(const std::string& device_id) const {
  auto it = buzzers_.find(device_id);
  if (it == buzzers_.end()) throw UnknownDevice(device_id);
  return it->second;
}

void EdgeBank::inject_failure(const std::string& device_id, bool fail) {
  if (auto it = sensors_.find(device_id); it != sensors_.end()) {
    it->second.set_failed(fail);
    return;
  }
  if (auto it = buzzers_.find(device_id); it != buzzers_.end()) {
    it->second.failed = fail;
    if (fail) it->second = advance(it->second, it->second.remaining_ms);
    return;
  }
  throw UnknownDevice(device_id);
}

}  // namespace fogdeck::edge
