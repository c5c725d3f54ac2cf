#include "fogdeck/model.hpp"

#include <cmath>

namespace fogdeck {

bool is_valid_identifier(std::string_view s) noexcept {
  if (s.empty() || s.size() > kMaxIdentifierLength) return false;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

DeviceId parse_device_id(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    throw std::invalid_argument("device id must be fog/device: " + std::string(text));
  }
  DeviceId id{std::string(text.substr(0, slash)), std::string(text.substr(slash + 1))};
  if (!id.valid()) throw std::invalid_argument("invalid device id: " + std::string(text));
  return id;
}

std::string_view body_name(const InstructionBody& body) noexcept {
  struct {
    std::string_view operator()(const SetEnabled&) const { return "set_enabled"; }
    std::string_view operator()(const SetThreshold&) const { return "set_threshold"; }
    std::string_view operator()(const SetPushPeriod&) const { return "set_push_period"; }
    std::string_view operator()(const SetEmailAlerts&) const { return "set_email_alerts"; }
    std::string_view operator()(const ActuatorCommand&) const { return "actuator_command"; }
  } visitor;
  return std::visit(visitor, body);
}

Evaluation evaluate_threshold(double value, const WorkingRange& range) noexcept {
  return (value < range.low || value > range.high) ? Evaluation::Abnormal : Evaluation::Normal;
}

Indicator indicator_color(const std::optional<SensorReading>& latest,
                          const DeviceDescriptor& desc) noexcept {
  if (!desc.enabled || !latest) return Indicator::Grey;
  if (desc.threshold && evaluate_threshold(latest->value, *desc.threshold) == Evaluation::Abnormal) {
    return Indicator::Red;
  }
  return Indicator::Green;
}

std::vector<Violation> validate_reading(const SensorReading& r, std::optional<DeviceKind> kind) {
  std::vector<Violation> out;
  if (!is_valid_identifier(r.id.fog_id)) out.push_back(Violation::InvalidFogId);
  if (!is_valid_identifier(r.id.device_id)) out.push_back(Violation::InvalidDeviceId);
  if (!std::isfinite(r.value)) out.push_back(Violation::NonFiniteValue);
  if (kind && !is_sensor(*kind)) out.push_back(Violation::UnitKindMismatch);
  if (r.timestamp < 0) out.push_back(Violation::NegativeTimestamp);
  return out;
}

std::vector<Violation> validate_descriptor(const DeviceDescriptor& d) {
  std::vector<Violation> out;
  if (!is_valid_identifier(d.id.fog_id)) out.push_back(Violation::InvalidFogId);
  if (!is_valid_identifier(d.id.device_id)) out.push_back(Violation::InvalidDeviceId);
  if (d.push_period < kMinPushPeriod || d.push_period > kMaxPushPeriod) {
    out.push_back(Violation::InvalidPushPeriod);
  }
  if (d.threshold) {
    if (!is_sensor(d.kind)) out.push_back(Violation::ThresholdOnNonSensor);
    if (!d.threshold->valid()) out.push_back(Violation::InvalidRange);
  }
  if (d.unit && !is_sensor(d.kind)) out.push_back(Violation::UnitKindMismatch);
  return out;
}

std::vector<Violation> validate_body(const InstructionBody& body, std::optional<DeviceKind> kind) {
  std::vector<Violation> out;
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, SetThreshold>) {
          // Thresholds are per sensor; never fanned out over a node.
          if (!kind || !is_sensor(*kind)) out.push_back(Violation::BodyKindMismatch);
          if (!b.range.valid() || !std::isfinite(b.range.low) || !std::isfinite(b.range.high)) {
            out.push_back(Violation::InvalidRange);
          }
        } else if constexpr (std::is_same_v<T, SetPushPeriod>) {
          if (b.period < kMinPushPeriod || b.period > kMaxPushPeriod) {
            out.push_back(Violation::InvalidPushPeriod);
          }
        } else if constexpr (std::is_same_v<T, ActuatorCommand>) {
          if (kind && *kind != DeviceKind::BuzzerActuator) out.push_back(Violation::BodyKindMismatch);
          if (!std::isfinite(b.power_volts) || !std::isfinite(b.tone_hz) || b.tone_hz <= 0 ||
              b.duration_ms <= 0) {
            out.push_back(Violation::InvalidActuatorCommand);
          }
        }
      },
      body);
  return out;
}

namespace {
std::string join_violations(const std::vector<Violation>& v) {
  std::string s = "validation failed:";
  for (auto x : v) {
    s += ' ';
    s += to_string(x);
  }
  return s;
}
}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

ValidationError::ValidationError(std::vector<Violation> violations, const std::string& what)
    : std::runtime_error(what), violations_(std::move(violations)) {}

std::string_view to_string(Violation v) noexcept {
  switch (v) {
    case Violation::InvalidFogId: return "invalid_fog_id";
    case Violation::InvalidDeviceId: return "invalid_device_id";
    case Violation::NonFiniteValue: return "non_finite_value";
    case Violation::UnitKindMismatch: return "unit_kind_mismatch";
    case Violation::NegativeTimestamp: return "negative_timestamp";
    case Violation::InvalidPushPeriod: return "invalid_push_period";
    case Violation::InvalidRange: return "invalid_range";
    case Violation::ThresholdOnNonSensor: return "threshold_on_non_sensor";
    case Violation::BodyKindMismatch: return "body_kind_mismatch";
    case Violation::InvalidActuatorCommand: return "invalid_actuator_command";
  }
  return "unknown";
}

std::string_view to_string(DeviceKind k) noexcept {
  switch (k) {
    case DeviceKind::TemperatureHumiditySensor: return "temperature_humidity_sensor";
    case DeviceKind::Clock: return "clock";
    case DeviceKind::BuzzerActuator: return "buzzer_actuator";
  }
  return "unknown";
}

std::string_view to_string(Unit u) noexcept {
  return u == Unit::Celsius ? "celsius" : "percent_rh";
}

std::string_view to_string(HealthState s) noexcept {
  switch (s) {
    case HealthState::Healthy: return "healthy";
    case HealthState::Faulty: return "faulty";
    case HealthState::Unreachable: return "unreachable";
  }
  return "unknown";
}

std::string_view to_string(NetworkMode::Mode m) noexcept {
  return m == NetworkMode::Mode::Online ? "online" : "offline";
}

std::string_view to_string(SecurityEventKind k) noexcept {
  switch (k) {
    case SecurityEventKind::UnknownClientConnected: return "unknown_client_connected";
    case SecurityEventKind::AuthFailure: return "auth_failure";
    case SecurityEventKind::FrameTampered: return "frame_tampered";
    case SecurityEventKind::ReplayDetected: return "replay_detected";
  }
  return "unknown";
}

std::string_view to_string(Evaluation e) noexcept {
  return e == Evaluation::Normal ? "normal" : "abnormal";
}

std::string_view to_string(Indicator i) noexcept {
  switch (i) {
    case Indicator::Green: return "green";
    case Indicator::Red: return "red";
    case Indicator::Grey: return "grey";
  }
  return "unknown";
}

DeviceKind parse_device_kind(std::string_view s) {
  if (s == "temperature_humidity_sensor" || s == "sensor") return DeviceKind::TemperatureHumiditySensor;
  if (s == "clock") return DeviceKind::Clock;
  if (s == "buzzer_actuator" || s == "buzzer") return DeviceKind::BuzzerActuator;
  throw std::invalid_argument("unknown device kind: " + std::string(s));
}

Unit parse_unit(std::string_view s) {
  if (s == "celsius") return Unit::Celsius;
  if (s == "percent_rh") return Unit::PercentRH;
  throw std::invalid_argument("unknown unit: " + std::string(s));
}

HealthState parse_health_state(std::string_view s) {
  if (s == "healthy") return HealthState::Healthy;
  if (s == "faulty") return HealthState::Faulty;
  if (s == "unreachable") return HealthState::Unreachable;
  throw std::invalid_argument("unknown health state: " + std::string(s));
}

NetworkMode::Mode parse_mode(std::string_view s) {
  if (s == "online") return NetworkMode::Mode::Online;
  if (s == "offline") return NetworkMode::Mode::Offline;
  throw std::invalid_argument("unknown network mode: " + std::string(s));
}

SecurityEventKind parse_security_event_kind(std::string_view s) {
  if (s == "unknown_client_connected") return SecurityEventKind::UnknownClientConnected;
  if (s == "auth_failure") return SecurityEventKind::AuthFailure;
  if (s == "frame_tampered") return SecurityEventKind::FrameTampered;
  if (s == "replay_detected") return SecurityEventKind::ReplayDetected;
  throw std::invalid_argument("unknown security event kind: " + std::string(s));
}

Indicator parse_indicator(std::string_view s) {
  if (s == "green") return Indicator::Green;
  if (s == "red") return Indicator::Red;
  if (s == "grey") return Indicator::Grey;
  throw std::invalid_argument("unknown indicator: " + std::string(s));
}

}  // namespace fogdeck
