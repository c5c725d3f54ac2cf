#pragma once

// Deterministic stand-ins for the DHT-11 sensors, DS3231 RTC and piezo buzzer.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>

#include "fogdeck/model.hpp"

namespace fogdeck::edge {

struct Constant {
  double base = 0.0;
};
struct Sine {
  double base = 0.0;
  double amplitude = 0.0;
  double period_s = 60.0;
};
/// Unit steps of +-step once per virtual second, direction drawn from `seed`.
struct RandomWalk {
  double base = 0.0;
  double step = 0.1;
  std::uint64_t seed = 0;
};

using Waveform = std::variant<Constant, Sine, RandomWalk>;

struct PhysicalRange {
  double low;
  double high;
};

/// DHT-11 measurement ranges.
PhysicalRange physical_range(Unit unit) noexcept;

class SensorFailed : public std::runtime_error {
 public:
  explicit SensorFailed(const DeviceId& id) : std::runtime_error("sensor failed: " + id.str()) {}
};

class RejectedCommand : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownDevice : public std::runtime_error {
 public:
  explicit UnknownDevice(const std::string& id) : std::runtime_error("unknown device: " + id) {}
};

struct RtcSim {
  double drift_ppm = 0.0;
  std::int64_t epoch_offset_ms = 0;
};

/// true_time_ms + epoch_offset_ms + round(true_time_ms * drift_ppm * 1e-6)
TimestampMs rtc_now(const RtcSim& rtc, std::int64_t true_time_ms) noexcept;

/// splitmix64 finalizer; the building block of every seeded stream here.
std::uint64_t mix64(std::uint64_t x) noexcept;

class SensorSim {
 public:
  SensorSim(DeviceId id, Unit unit, Waveform waveform, double noise_stddev, std::uint64_t seed);

  const DeviceId& id() const noexcept { return id_; }
  Unit unit() const noexcept { return unit_; }
  const Waveform& waveform() const noexcept { return waveform_; }
  bool failed() const noexcept { return failed_; }
  void set_failed(bool failed) noexcept { failed_ = failed; }
  std::uint64_t last_seq() const noexcept { return seq_; }
  /// Continue numbering after `seq` (e.g. when resuming from a store).
  void resume_after(std::uint64_t seq) noexcept { seq_ = seq; }

  /// Waveform + noise, clamped to the physical range. A pure function of
  /// (configuration, seed, t); the random-walk prefix is memoized.
  double value_at(SimTime t) const;

  /// Throws SensorFailed while failed. Each success consumes one seq.
  SensorReading sample(SimTime t, const RtcSim& rtc);

 private:
  double walk_offset(std::int64_t whole_seconds) const;

  DeviceId id_;
  Unit unit_;
  Waveform waveform_;
  double noise_stddev_;
  std::uint64_t seed_;
  bool failed_ = false;
  std::uint64_t seq_ = 0;

  mutable std::int64_t walk_steps_ = 0;
  mutable double walk_sum_ = 0.0;
};

inline constexpr double kMinBuzzerVolts = 3.3;
inline constexpr double kMaxBuzzerVolts = 9.0;

struct BuzzerSim {
  DeviceId id;
  bool powered = false;
  double power_volts = 0.0;
  double tone_hz = 0.0;
  std::int64_t remaining_ms = 0;
  bool failed = false;

  /// Relative loudness in [0, 1]; grows with supply voltage.
  double loudness() const noexcept { return powered ? power_volts / kMaxBuzzerVolts : 0.0; }
  bool operator==(const BuzzerSim&) const = default;
};

/// Powers the buzzer at clamp(power, 3.3, 9.0). Throws RejectedCommand when the
/// duration or tone is non-positive, a value is non-finite, or the buzzer has failed.
BuzzerSim actuate(BuzzerSim buzzer, const ActuatorCommand& cmd);

/// Counts down `elapsed_ms`; powers off once the countdown reaches zero.
BuzzerSim advance(BuzzerSim buzzer, std::int64_t elapsed_ms) noexcept;

/// The simulated devices attached to one fog node.
class EdgeBank {
 public:
  void add_sensor(SensorSim sim);
  void add_buzzer(BuzzerSim buzzer);

  bool has_sensor(const std::string& device_id) const;
  bool has_buzzer(const std::string& device_id) const;

  SensorSim& sensor(const std::string& device_id);
  const SensorSim& sensor(const std::string& device_id) const;
  BuzzerSim& buzzer(const std::string& device_id);
  const BuzzerSim& buzzer(const std::string& device_id) const;

  std::map<std::string, SensorSim>& sensors() noexcept { return sensors_; }
  const std::map<std::string, SensorSim>& sensors() const noexcept { return sensors_; }
  std::map<std::string, BuzzerSim>& buzzers() noexcept { return buzzers_; }
  const std::map<std::string, BuzzerSim>& buzzers() const noexcept { return buzzers_; }

  /// Takes effect from the next sample or command. Throws UnknownDevice.
  void inject_failure(const std::string& device_id, bool fail);

 private:
  std::map<std::string, SensorSim> sensors_;
  std::map<std::string, BuzzerSim> buzzers_;
};

}  // namespace fogdeck::edge
