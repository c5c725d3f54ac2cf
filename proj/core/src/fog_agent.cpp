#include "fogdeck/fog_agent.hpp"

#include <numeric>

#include "spdlog/spdlog.h"

namespace fogdeck::fog {

std::string_view to_string(CloudMode m) noexcept {
  return m == CloudMode::CloudReachable ? "cloud_reachable" : "cloud_unreachable";
}

FogAgent::FogAgent(AgentConfig config, std::vector<DeviceSpec> devices) : config_(std::move(config)) {
  if (!is_valid_identifier(config_.fog_id)) throw std::invalid_argument("invalid fog id: " + config_.fog_id);
  if (config_.buffer_capacity == 0) throw std::invalid_argument("buffer capacity must be > 0");
  for (auto& spec : devices) {
    auto& d = spec.desc;
    d.id.fog_id = config_.fog_id;
    if (is_sensor(d.kind) && !d.unit) d.unit = Unit::Celsius;
    auto violations = validate_descriptor(d);
    if (!violations.empty()) throw ValidationError(violations, "invalid device " + d.id.str());
    if (devices_.count(d.id.device_id)) throw std::invalid_argument("duplicate device " + d.id.str());

    if (is_sensor(d.kind)) {
      edge_.add_sensor(edge::SensorSim(d.id, *d.unit, spec.waveform, spec.noise_stddev, spec.seed));
      SensorState st;
      st.window = std::max<std::size_t>(1, spec.window);
      sensor_state_.emplace(d.id.device_id, std::move(st));
    } else if (d.kind == DeviceKind::BuzzerActuator) {
      edge_.add_buzzer(edge::BuzzerSim{d.id});
    }
    devices_.emplace(d.id.device_id, d);
  }
}

TickResult FogAgent::tick(SimTime now) {
  TickResult result;
  auto elapsed = first_tick_ ? (now - last_tick_).count() : 0;
  for (auto& [id, buzzer] : edge_.buzzers()) buzzer = edge::advance(buzzer, elapsed);
  if (!first_tick_) first_tick_ = now;
  last_tick_ = now;

  for (const auto& [device_id, desc] : devices_) {
    if (!is_sensor(desc.kind) || !desc.enabled) continue;
    auto& st = sensor_state_.at(device_id);
    if (now < st.next_due) continue;

    SensorReading r;
    try {
      r = edge_.sensor(device_id).sample(now, config_.rtc);
    } catch (const edge::SensorFailed&) {
      st.last_attempt_failed = true;
      ++sample_failures_;
      result.failed.push_back(desc.id);
      continue;
    }
    st.last_attempt_failed = false;
    st.last_success = now;
    st.last_sample_time = now;
    st.next_due = now + desc.push_period;

    st.recent.push_back(r.value);
    while (st.recent.size() > st.window) st.recent.pop_front();
    if (st.window > 1) {
      r.value = std::accumulate(st.recent.begin(), st.recent.end(), 0.0) / static_cast<double>(st.recent.size());
    }
    st.latest = r;
    enqueue(r);
    result.readings.push_back(r);

    if (desc.threshold && evaluate_threshold(r.value, *desc.threshold) == Evaluation::Abnormal) {
      result.breaches.push_back(BreachEvent{desc.id, r.value, *desc.threshold, r.timestamp});
      for (auto& [buzzer_id, buzzer] : edge_.buzzers()) {
        if (!devices_.at(buzzer_id).enabled || buzzer.failed) continue;
        buzzer = edge::actuate(buzzer, config_.alarm);
        result.actuations.push_back(ActuationEvent{buzzer.id, config_.alarm, true, desc.id, r.timestamp});
      }
    }
  }
  return result;
}

void FogAgent::enqueue(const SensorReading& r) {
  ++emitted_;
  pending_.push_back(r);
  while (pending_.size() > config_.buffer_capacity) {
    pending_.pop_front();
    ++dropped_;
  }
}

void FogAgent::note_cycle(bool ok) {
  if (ok) {
    consecutive_failures_ = 0;
    cloud_mode_ = CloudMode::CloudReachable;
    return;
  }
  ++consecutive_failures_;
  if (consecutive_failures_ >= config_.cloud_failure_threshold) cloud_mode_ = CloudMode::CloudUnreachable;
}

void FogAgent::record_cloud_result(bool ok) { note_cycle(ok); }

PushReport FogAgent::push_cycle(const PutReadings& put) {
  PushReport report;
  bool ok = true;
  while (!pending_.empty()) {
    auto n = std::min(pending_.size(), config_.max_push_batch);
    std::vector<SensorReading> batch(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(n));
    try {
      report.accepted += put(batch);
    } catch (const std::exception& e) {
      ok = false;
      report.error = e.what();
      break;
    }
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(n));
    pushed_ += n;
    report.pushed += n;
  }
  note_cycle(ok);
  report.buffered = pending_.size();
  report.mode = cloud_mode_;
  return report;
}

void FogAgent::apply_to_device(DeviceDescriptor& desc, const InstructionBody& body) {
  auto violations = validate_body(body, desc.kind);
  if (!violations.empty()) throw ValidationError(violations, "instruction not valid for " + desc.id.str());

  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, SetEnabled>) {
          if (b.enabled && !desc.enabled && is_sensor(desc.kind)) {
            sensor_state_.at(desc.id.device_id).next_due = last_tick_;
          }
          desc.enabled = b.enabled;
        } else if constexpr (std::is_same_v<T, SetThreshold>) {
          desc.threshold = b.range;
        } else if constexpr (std::is_same_v<T, SetPushPeriod>) {
          desc.push_period = b.period;
          if (is_sensor(desc.kind)) {
            auto& st = sensor_state_.at(desc.id.device_id);
            if (st.last_sample_time) st.next_due = *st.last_sample_time + b.period;
          }
        } else if constexpr (std::is_same_v<T, SetEmailAlerts>) {
          desc.email_alerts = b.enabled;
        } else if constexpr (std::is_same_v<T, ActuatorCommand>) {
          if (!desc.enabled) throw edge::RejectedCommand("actuator disabled: " + desc.id.str());
          auto& buzzer = edge_.buzzer(desc.id.device_id);
          buzzer = edge::actuate(buzzer, b);
        }
      },
      body);
}

void FogAgent::apply_body(const Target& target, const InstructionBody& body) {
  if (target.fog_id != config_.fog_id) throw UnknownTarget(target.str());
  if (target.device_id) {
    auto it = devices_.find(*target.device_id);
    if (it == devices_.end()) throw UnknownTarget(target.str());
    auto updated = it->second;
    apply_to_device(updated, body);
    it->second = std::move(updated);
    return;
  }

  // Whole-node target: fan out to every device the body applies to.
  auto node_violations = validate_body(body, std::nullopt);
  if (!node_violations.empty()) throw ValidationError(node_violations, "instruction not valid for a node");
  for (auto& [id, desc] : devices_) {
    bool applies = std::visit(
        [&](const auto& b) {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, SetEnabled>) return true;
          if constexpr (std::is_same_v<T, ActuatorCommand>) return desc.kind == DeviceKind::BuzzerActuator;
          return is_sensor(desc.kind);
        },
        body);
    if (!applies) continue;
    auto updated = desc;
    apply_to_device(updated, body);
    desc = std::move(updated);
  }
}

std::size_t FogAgent::apply_instructions(std::span<const Instruction> fetched) {
  std::size_t applied = 0;
  for (const auto& instr : fetched) {
    if (instr.instr_id <= last_applied_) continue;
    try {
      apply_body(instr.target, instr.body);
      ++applied;
    } catch (const std::exception& e) {
      spdlog::warn("{}: skipping instruction {}: {}", config_.fog_id, instr.instr_id, e.what());
    }
    last_applied_ = instr.instr_id;
  }
  return applied;
}

void FogAgent::apply_direct(const Instruction& instruction) { apply_body(instruction.target, instruction.body); }

std::vector<HealthStatus> FogAgent::health_snapshot(SimTime now) const {
  std::vector<HealthStatus> out;
  out.push_back(HealthStatus{Target::node(config_.fog_id), HealthState::Healthy, std::string(to_string(cloud_mode_)),
                             clock(now)});
  for (const auto& [device_id, desc] : devices_) {
    HealthStatus h{Target::device(desc.id), HealthState::Healthy, "", 0};
    if (is_sensor(desc.kind)) {
      const auto& st = sensor_state_.at(device_id);
      if (st.last_success) h.last_seen = clock(*st.last_success);
      auto since = st.last_success ? *st.last_success : first_tick_.value_or(now);
      if (!desc.enabled) {
        h.reason = "disabled";
      } else if (st.last_attempt_failed) {
        h.state = HealthState::Faulty;
        h.reason = "sensor failed";
      } else if (now - since > 2 * desc.push_period) {
        h.state = HealthState::Faulty;
        h.reason = "no sample";
      }
    } else if (desc.kind == DeviceKind::BuzzerActuator) {
      h.last_seen = clock(now);
      if (edge_.buzzer(device_id).failed) {
        h.state = HealthState::Faulty;
        h.reason = "actuator failed";
      } else if (!desc.enabled) {
        h.reason = "disabled";
      }
    } else {
      h.last_seen = clock(now);
    }
    out.push_back(std::move(h));
  }
  return out;
}

NodeReport FogAgent::report(SimTime now, std::size_t active_clients) const {
  NodeReport r;
  r.fog_id = config_.fog_id;
  r.reported_at = clock(now);
  r.cloud_mode = std::string(to_string(cloud_mode_));
  r.active_clients = active_clients;
  r.last_applied_instr = last_applied_;
  r.health = health_snapshot(now);
  r.devices = descriptors();
  r.actuators = actuators();
  return r;
}

void FogAgent::inject_failure(const std::string& device_id, bool fail) { edge_.inject_failure(device_id, fail); }

void FogAgent::record_security_event(const SecurityEvent& event) {
  security_log_.push_back(event);
  while (security_log_.size() > config_.security_log_capacity) security_log_.pop_front();
  unsent_security_.push_back(event);
  spdlog::warn("{}: security event {} from {}", config_.fog_id, to_string(event.kind), event.peer);
}

std::vector<SecurityEvent> FogAgent::take_unsent_security() { return std::exchange(unsent_security_, {}); }

void FogAgent::requeue_security(std::vector<SecurityEvent> events) {
  events.insert(events.end(), unsent_security_.begin(), unsent_security_.end());
  unsent_security_ = std::move(events);
}

std::vector<SecurityEvent> FogAgent::security_log() const { return {security_log_.begin(), security_log_.end()}; }

AgentCounters FogAgent::counters() const noexcept {
  return AgentCounters{emitted_, pushed_, dropped_, pending_.size(), sample_failures_};
}

std::vector<DeviceDescriptor> FogAgent::descriptors() const {
  std::vector<DeviceDescriptor> out;
  for (const auto& [id, d] : devices_) out.push_back(d);
  return out;
}

std::optional<DeviceDescriptor> FogAgent::descriptor(const std::string& device_id) const {
  auto it = devices_.find(device_id);
  if (it == devices_.end()) return std::nullopt;
  return it->second;
}

std::vector<ActuatorState> FogAgent::actuators() const {
  std::vector<ActuatorState> out;
  for (const auto& [id, b] : edge_.buzzers()) {
    out.push_back(ActuatorState{b.id, b.powered, b.power_volts, b.tone_hz, b.remaining_ms});
  }
  return out;
}

std::vector<SensorReading> FogAgent::latest_readings() const {
  std::vector<SensorReading> out;
  for (const auto& [id, st] : sensor_state_) {
    if (st.latest) out.push_back(*st.latest);
  }
  return out;
}

}  // namespace fogdeck::fog
