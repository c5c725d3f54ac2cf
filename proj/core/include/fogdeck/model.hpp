#pragma once

// Domain types shared by every fogdeck component. Everything here is a plain
// value type; the free functions are pure.

#include <chrono>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fogdeck {

/// Milliseconds since the Unix epoch, as reported by a (possibly drifting) RTC.
using TimestampMs = std::int64_t;

/// Virtual time since scenario start.
using SimTime = std::chrono::milliseconds;

inline constexpr std::size_t kMaxIdentifierLength = 64;

/// Non-empty, at most 64 characters, drawn from [A-Za-z0-9_-].
bool is_valid_identifier(std::string_view s) noexcept;

struct DeviceId {
  std::string fog_id;
  std::string device_id;

  bool valid() const noexcept {
    return is_valid_identifier(fog_id) && is_valid_identifier(device_id);
  }
  /// "fog/device"
  std::string str() const { return fog_id + "/" + device_id; }

  auto operator<=>(const DeviceId&) const = default;
};

/// Parses "fog/device". Throws std::invalid_argument on malformed input.
DeviceId parse_device_id(std::string_view text);

struct DeviceIdHash {
  std::size_t operator()(const DeviceId& id) const noexcept {
    auto h = std::hash<std::string>{}(id.fog_id);
    return h ^ (std::hash<std::string>{}(id.device_id) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }
};

/// Either a whole fog node (device_id empty) or one device on it.
struct Target {
  std::string fog_id;
  std::optional<std::string> device_id;

  static Target node(std::string fog) { return {std::move(fog), std::nullopt}; }
  static Target device(const DeviceId& id) { return {id.fog_id, id.device_id}; }

  bool is_device() const noexcept { return device_id.has_value(); }
  DeviceId as_device() const { return {fog_id, device_id.value_or("")}; }
  std::string str() const { return device_id ? fog_id + "/" + *device_id : fog_id; }

  auto operator<=>(const Target&) const = default;
};

enum class DeviceKind { TemperatureHumiditySensor, Clock, BuzzerActuator };
enum class Unit { Celsius, PercentRH };

inline bool is_sensor(DeviceKind k) noexcept { return k == DeviceKind::TemperatureHumiditySensor; }

struct Location {
  std::string label;
  std::optional<double> latitude;
  std::optional<double> longitude;

  bool operator==(const Location&) const = default;
};

/// Inclusive working range [low, high].
struct WorkingRange {
  double low = 0.0;
  double high = 0.0;

  bool valid() const noexcept { return low <= high; }
  bool operator==(const WorkingRange&) const = default;
};

inline constexpr std::chrono::seconds kMinPushPeriod{1};
inline constexpr std::chrono::seconds kMaxPushPeriod{3600};

struct DeviceDescriptor {
  DeviceId id;
  DeviceKind kind = DeviceKind::TemperatureHumiditySensor;
  Location location;
  bool enabled = true;
  std::optional<WorkingRange> threshold;
  std::chrono::seconds push_period{5};
  bool email_alerts = false;
  // Measured quantity for sensors; informational for the panel.
  std::optional<Unit> unit;

  bool operator==(const DeviceDescriptor&) const = default;
};

struct SensorReading {
  DeviceId id;
  double value = 0.0;
  Unit unit = Unit::Celsius;
  TimestampMs timestamp = 0;
  std::uint64_t seq = 0;

  bool operator==(const SensorReading&) const = default;
};

enum class HealthState { Healthy, Faulty, Unreachable };

struct HealthStatus {
  Target subject;
  HealthState state = HealthState::Healthy;
  std::string reason;
  TimestampMs last_seen = 0;

  bool operator==(const HealthStatus&) const = default;
};

struct SetEnabled {
  bool enabled = true;
  bool operator==(const SetEnabled&) const = default;
};
struct SetThreshold {
  WorkingRange range;
  bool operator==(const SetThreshold&) const = default;
};
struct SetPushPeriod {
  std::chrono::seconds period{5};
  bool operator==(const SetPushPeriod&) const = default;
};
struct SetEmailAlerts {
  bool enabled = false;
  bool operator==(const SetEmailAlerts&) const = default;
};
struct ActuatorCommand {
  double power_volts = 5.0;
  double tone_hz = 440.0;
  std::int64_t duration_ms = 1000;
  bool operator==(const ActuatorCommand&) const = default;
};

using InstructionBody =
    std::variant<SetEnabled, SetThreshold, SetPushPeriod, SetEmailAlerts, ActuatorCommand>;

std::string_view body_name(const InstructionBody& body) noexcept;

struct Instruction {
  std::uint64_t instr_id = 0;  // assigned by the datastore; 0 = not yet assigned / direct
  Target target;
  InstructionBody body;
  TimestampMs issued_at = 0;

  bool operator==(const Instruction&) const = default;
};

struct NetworkMode {
  enum class Mode { Online, Offline };
  Mode mode = Mode::Online;
  TimestampMs since = 0;
  std::string cause;

  bool operator==(const NetworkMode&) const = default;
};

enum class SecurityEventKind { UnknownClientConnected, AuthFailure, FrameTampered, ReplayDetected };

struct SecurityEvent {
  std::string fog_id;
  SecurityEventKind kind = SecurityEventKind::AuthFailure;
  std::string peer;
  TimestampMs observed_at = 0;

  auto operator<=>(const SecurityEvent&) const = default;
};

struct ActuatorState {
  DeviceId id;
  bool powered = false;
  double power_volts = 0.0;
  double tone_hz = 0.0;
  std::int64_t remaining_ms = 0;

  bool operator==(const ActuatorState&) const = default;
};

/// Periodic status a fog node publishes: to the datastore when online, as a
/// Health frame to direct clients when offline.
struct NodeReport {
  std::string fog_id;
  TimestampMs reported_at = 0;
  std::string cloud_mode;  // "cloud_reachable" | "cloud_unreachable"
  std::size_t active_clients = 0;
  std::uint64_t last_applied_instr = 0;
  std::vector<HealthStatus> health;
  std::vector<DeviceDescriptor> devices;
  std::vector<ActuatorState> actuators;

  bool operator==(const NodeReport&) const = default;
};

// ---------------------------------------------------------------------------
// Pure evaluation logic

enum class Evaluation { Normal, Abnormal };
enum class Indicator { Green, Red, Grey };

/// Abnormal iff value < low or value > high. Bounds are Normal.
Evaluation evaluate_threshold(double value, const WorkingRange& range) noexcept;

/// Grey when the device is disabled or nothing has been read yet.
Indicator indicator_color(const std::optional<SensorReading>& latest,
                          const DeviceDescriptor& desc) noexcept;

enum class Violation {
  InvalidFogId,
  InvalidDeviceId,
  NonFiniteValue,
  UnitKindMismatch,
  NegativeTimestamp,
  InvalidPushPeriod,
  InvalidRange,
  ThresholdOnNonSensor,
  BodyKindMismatch,
  InvalidActuatorCommand,
};

std::string_view to_string(Violation v) noexcept;

/// Every invariant violation of `r`. When the kind of the emitting device is
/// known, readings from non-sensor kinds are flagged as UnitKindMismatch.
std::vector<Violation> validate_reading(const SensorReading& r,
                                        std::optional<DeviceKind> kind = std::nullopt);

std::vector<Violation> validate_descriptor(const DeviceDescriptor& d);

/// Checks that `body` may be applied to a device of `kind`. A whole-node target
/// is checked with kind = nullopt.
std::vector<Violation> validate_body(const InstructionBody& body, std::optional<DeviceKind> kind);

/// Thrown when a value cannot be constructed or accepted because of violations.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  ValidationError(std::vector<Violation> violations, const std::string& what);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

// String forms used by JSON, YAML and the CLI (lower_snake_case).
std::string_view to_string(DeviceKind k) noexcept;
std::string_view to_string(Unit u) noexcept;
std::string_view to_string(HealthState s) noexcept;
std::string_view to_string(NetworkMode::Mode m) noexcept;
std::string_view to_string(SecurityEventKind k) noexcept;
std::string_view to_string(Evaluation e) noexcept;
std::string_view to_string(Indicator i) noexcept;

DeviceKind parse_device_kind(std::string_view s);
Unit parse_unit(std::string_view s);
HealthState parse_health_state(std::string_view s);
NetworkMode::Mode parse_mode(std::string_view s);
SecurityEventKind parse_security_event_kind(std::string_view s);
Indicator parse_indicator(std::string_view s);

}  // namespace fogdeck
