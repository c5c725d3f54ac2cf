#include "fogdeck/json_codec.hpp"

namespace fogdeck {

void to_json(json& j, const DeviceId& v) {
  j = json{{"fog_id", v.fog_id}, {"device_id", v.device_id}};
}
void from_json(const json& j, DeviceId& v) {
  j.at("fog_id").get_to(v.fog_id);
  j.at("device_id").get_to(v.device_id);
}

void to_json(json& j, const Target& v) {
  j = json{{"fog_id", v.fog_id}};
  if (v.device_id) j["device_id"] = *v.device_id;
}
void from_json(const json& j, Target& v) {
  j.at("fog_id").get_to(v.fog_id);
  if (auto it = j.find("device_id"); it != j.end() && !it->is_null()) {
    v.device_id = it->get<std::string>();
  } else {
    v.device_id.reset();
  }
}

void to_json(json& j, const Location& v) {
  j = json{{"label", v.label}};
  if (v.latitude) j["latitude"] = *v.latitude;
  if (v.longitude) j["longitude"] = *v.longitude;
}
void from_json(const json& j, Location& v) {
  v.label = j.value("label", std::string{});
  v.latitude.reset();
  v.longitude.reset();
  if (auto it = j.find("latitude"); it != j.end() && !it->is_null()) v.latitude = it->get<double>();
  if (auto it = j.find("longitude"); it != j.end() && !it->is_null()) v.longitude = it->get<double>();
}

void to_json(json& j, const WorkingRange& v) { j = json{{"low", v.low}, {"high", v.high}}; }
void from_json(const json& j, WorkingRange& v) {
  j.at("low").get_to(v.low);
  j.at("high").get_to(v.high);
}

void to_json(json& j, const DeviceDescriptor& v) {
  j = json{{"id", v.id},
           {"kind", to_string(v.kind)},
           {"location", v.location},
           {"enabled", v.enabled},
           {"push_period", v.push_period.count()},
           {"email_alerts", v.email_alerts}};
  j["threshold"] = v.threshold ? json(*v.threshold) : json(nullptr);
  if (v.unit) j["unit"] = to_string(*v.unit);
}
void from_json(const json& j, DeviceDescriptor& v) {
  j.at("id").get_to(v.id);
  v.kind = parse_device_kind(j.at("kind").get<std::string>());
  v.location = j.contains("location") ? j.at("location").get<Location>() : Location{};
  v.enabled = j.value("enabled", true);
  v.push_period = std::chrono::seconds(j.value("push_period", std::int64_t{5}));
  v.email_alerts = j.value("email_alerts", false);
  v.threshold.reset();
  if (auto it = j.find("threshold"); it != j.end() && !it->is_null()) {
    v.threshold = it->get<WorkingRange>();
  }
  v.unit.reset();
  if (auto it = j.find("unit"); it != j.end() && !it->is_null()) {
    v.unit = parse_unit(it->get<std::string>());
  }
}

void to_json(json& j, const SensorReading& v) {
  j = json{{"id", v.id},
           {"value", v.value},
           {"unit", to_string(v.unit)},
           {"timestamp", v.timestamp},
           {"seq", v.seq}};
}
void from_json(const json& j, SensorReading& v) {
  j.at("id").get_to(v.id);
  // JSON has no NaN; a null value decodes to NaN so validation can reject it.
  const auto& value = j.at("value");
  v.value = value.is_null() ? std::numeric_limits<double>::quiet_NaN() : value.get<double>();
  v.unit = parse_unit(j.at("unit").get<std::string>());
  j.at("timestamp").get_to(v.timestamp);
  j.at("seq").get_to(v.seq);
}

void to_json(json& j, const HealthStatus& v) {
  j = json{{"subject", v.subject},
           {"state", to_string(v.state)},
           {"reason", v.reason},
           {"last_seen", v.last_seen}};
}
void from_json(const json& j, HealthStatus& v) {
  j.at("subject").get_to(v.subject);
  v.state = parse_health_state(j.at("state").get<std::string>());
  v.reason = j.value("reason", std::string{});
  v.last_seen = j.value("last_seen", TimestampMs{0});
}

void to_json(json& j, const InstructionBody& v) {
  j = json{{"type", body_name(v)}};
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, SetEnabled> || std::is_same_v<T, SetEmailAlerts>) {
          j["enabled"] = b.enabled;
        } else if constexpr (std::is_same_v<T, SetThreshold>) {
          j["low"] = b.range.low;
          j["high"] = b.range.high;
        } else if constexpr (std::is_same_v<T, SetPushPeriod>) {
          j["push_period"] = b.period.count();
        } else if constexpr (std::is_same_v<T, ActuatorCommand>) {
          j["power_volts"] = b.power_volts;
          j["tone_hz"] = b.tone_hz;
          j["duration_ms"] = b.duration_ms;
        }
      },
      v);
}
void from_json(const json& j, InstructionBody& v) {
  auto type = j.at("type").get<std::string>();
  if (type == "set_enabled") {
    v = SetEnabled{j.at("enabled").get<bool>()};
  } else if (type == "set_threshold") {
    v = SetThreshold{WorkingRange{j.at("low").get<double>(), j.at("high").get<double>()}};
  } else if (type == "set_push_period") {
    v = SetPushPeriod{std::chrono::seconds(j.at("push_period").get<std::int64_t>())};
  } else if (type == "set_email_alerts") {
    v = SetEmailAlerts{j.at("enabled").get<bool>()};
  } else if (type == "actuator_command") {
    v = ActuatorCommand{j.at("power_volts").get<double>(), j.at("tone_hz").get<double>(),
                        j.at("duration_ms").get<std::int64_t>()};
  } else {
    throw std::invalid_argument("unknown instruction type: " + type);
  }
}

void to_json(json& j, const Instruction& v) {
  j = json{{"instr_id", v.instr_id}, {"target", v.target}, {"body", v.body}, {"issued_at", v.issued_at}};
}
void from_json(const json& j, Instruction& v) {
  v.instr_id = j.value("instr_id", std::uint64_t{0});
  j.at("target").get_to(v.target);
  j.at("body").get_to(v.body);
  v.issued_at = j.value("issued_at", TimestampMs{0});
}

void to_json(json& j, const NetworkMode& v) {
  j = json{{"mode", to_string(v.mode)}, {"since", v.since}, {"cause", v.cause}};
}
void from_json(const json& j, NetworkMode& v) {
  v.mode = parse_mode(j.at("mode").get<std::string>());
  v.since = j.value("since", TimestampMs{0});
  v.cause = j.value("cause", std::string{});
}

void to_json(json& j, const SecurityEvent& v) {
  j = json{{"fog_id", v.fog_id},
           {"kind", to_string(v.kind)},
           {"peer", v.peer},
           {"observed_at", v.observed_at}};
}
void from_json(const json& j, SecurityEvent& v) {
  j.at("fog_id").get_to(v.fog_id);
  v.kind = parse_security_event_kind(j.at("kind").get<std::string>());
  j.at("peer").get_to(v.peer);
  j.at("observed_at").get_to(v.observed_at);
}

void to_json(json& j, const ActuatorState& v) {
  j = json{{"id", v.id},
           {"powered", v.powered},
           {"power_volts", v.power_volts},
           {"tone_hz", v.tone_hz},
           {"remaining_ms", v.remaining_ms}};
}
void from_json(const json& j, ActuatorState& v) {
  j.at("id").get_to(v.id);
  v.powered = j.value("powered", false);
  v.power_volts = j.value("power_volts", 0.0);
  v.tone_hz = j.value("tone_hz", 0.0);
  v.remaining_ms = j.value("remaining_ms", std::int64_t{0});
}

void to_json(json& j, const NodeReport& v) {
  j = json{{"fog_id", v.fog_id},
           {"reported_at", v.reported_at},
           {"cloud_mode", v.cloud_mode},
           {"active_clients", v.active_clients},
           {"last_applied_instr", v.last_applied_instr},
           {"health", v.health},
           {"devices", v.devices},
           {"actuators", v.actuators}};
}
void from_json(const json& j, NodeReport& v) {
  j.at("fog_id").get_to(v.fog_id);
  v.reported_at = j.value("reported_at", TimestampMs{0});
  v.cloud_mode = j.value("cloud_mode", std::string{});
  v.active_clients = j.value("active_clients", std::size_t{0});
  v.last_applied_instr = j.value("last_applied_instr", std::uint64_t{0});
  v.health = j.value("health", std::vector<HealthStatus>{});
  v.devices = j.value("devices", std::vector<DeviceDescriptor>{});
  v.actuators = j.value("actuators", std::vector<ActuatorState>{});
}

}  // namespace fogdeck
