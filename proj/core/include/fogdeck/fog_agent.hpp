#pragma once

// Layer-2 fog agent state machine. Owns its simulated edge devices, the
// pending-push buffer and the instruction cursor. Not thread-safe: exactly one
// owner drives it (see FogNode).

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fogdeck/edge.hpp"
#include "fogdeck/model.hpp"

namespace fogdeck::fog {

enum class CloudMode { CloudReachable, CloudUnreachable };

std::string_view to_string(CloudMode m) noexcept;

/// One attached device. Sensor-only fields are ignored for other kinds.
struct DeviceSpec {
  DeviceDescriptor desc;
  edge::Waveform waveform = edge::Constant{25.0};
  double noise_stddev = 0.0;
  std::uint64_t seed = 0;
  /// Sliding-window mean over the last `window` samples; 1 = pass-through.
  std::size_t window = 1;
};

inline constexpr std::size_t kDefaultBufferCapacity = 10'000;

struct AgentConfig {
  std::string fog_id;
  edge::RtcSim rtc;
  std::size_t buffer_capacity = kDefaultBufferCapacity;
  int cloud_failure_threshold = 3;
  std::size_t max_push_batch = 5000;
  /// Fired on every buzzer of the node when a sensor evaluates Abnormal.
  ActuatorCommand alarm{5.0, 2000.0, 1000};
  std::set<std::string> known_clients{"control-plane"};
  std::size_t security_log_capacity = 256;
};

struct BreachEvent {
  DeviceId device;
  double value = 0.0;
  WorkingRange range;
  TimestampMs at = 0;
};

struct ActuationEvent {
  DeviceId buzzer;
  ActuatorCommand command;
  bool automatic = false;
  std::optional<DeviceId> cause;
  TimestampMs at = 0;
};

struct TickResult {
  std::vector<SensorReading> readings;
  std::vector<BreachEvent> breaches;
  std::vector<ActuationEvent> actuations;
  std::vector<DeviceId> failed;
};

struct PushReport {
  std::size_t pushed = 0;    // readings acknowledged by the store
  std::size_t accepted = 0;  // of those, rows that were new to the store
  std::size_t buffered = 0;  // left in the buffer afterwards
  CloudMode mode = CloudMode::CloudReachable;
  std::optional<std::string> error;
};

struct AgentCounters {
  std::uint64_t emitted = 0;
  std::uint64_t pushed = 0;
  std::uint64_t dropped = 0;
  std::size_t buffered = 0;
  std::uint64_t sample_failures = 0;
};

class UnknownTarget : public std::runtime_error {
 public:
  explicit UnknownTarget(const std::string& what) : std::runtime_error("unknown target: " + what) {}
};

class FogAgent {
 public:
  using PutReadings = std::function<std::size_t(std::span<const SensorReading>)>;

  FogAgent(AgentConfig config, std::vector<DeviceSpec> devices);

  const std::string& fog_id() const noexcept { return config_.fog_id; }
  const AgentConfig& config() const noexcept { return config_; }

  /// Samples every enabled sensor whose period has elapsed, processes and
  /// buffers the readings, and auto-fires the buzzers on Abnormal values.
  /// A failed sensor is recorded and retried next tick; it never aborts the tick.
  TickResult tick(SimTime now);

  /// Pushes the buffer in batches through `put` until it is empty or a call
  /// throws. Three consecutive failed cycles mark the cloud unreachable; the
  /// first success marks it reachable again.
  PushReport push_cycle(const PutReadings& put);

  /// Counts a cloud round-trip that was not a push (used when nothing was
  /// buffered) toward the reachability state.
  void record_cloud_result(bool ok);

  /// Applies datastore instructions with instr_id > last_applied_instr in
  /// order. Unknown or invalid targets are skipped. Returns how many took effect.
  std::size_t apply_instructions(std::span<const Instruction> fetched);

  /// Applies one instruction immediately (offline path). Throws UnknownTarget,
  /// ValidationError or edge::RejectedCommand.
  void apply_direct(const Instruction& instruction);

  std::vector<HealthStatus> health_snapshot(SimTime now) const;
  NodeReport report(SimTime now, std::size_t active_clients) const;

  /// Throws edge::UnknownDevice.
  void inject_failure(const std::string& device_id, bool fail);

  void record_security_event(const SecurityEvent& event);
  /// Events not yet uploaded to the datastore; call requeue_security on failure.
  std::vector<SecurityEvent> take_unsent_security();
  void requeue_security(std::vector<SecurityEvent> events);
  std::vector<SecurityEvent> security_log() const;
  bool is_known_client(const std::string& client_id) const { return config_.known_clients.count(client_id) > 0; }

  CloudMode cloud_mode() const noexcept { return cloud_mode_; }
  std::uint64_t last_applied_instr() const noexcept { return last_applied_; }
  AgentCounters counters() const noexcept;
  const std::deque<SensorReading>& pending() const noexcept { return pending_; }

  std::vector<DeviceDescriptor> descriptors() const;
  std::optional<DeviceDescriptor> descriptor(const std::string& device_id) const;
  std::vector<ActuatorState> actuators() const;
  std::vector<SensorReading> latest_readings() const;
  const edge::EdgeBank& edge() const noexcept { return edge_; }

  TimestampMs clock(SimTime t) const noexcept { return edge::rtc_now(config_.rtc, t.count()); }
  SimTime last_tick() const noexcept { return last_tick_; }

 private:
  struct SensorState {
    std::size_t window = 1;
    std::deque<double> recent;
    SimTime next_due{0};
    std::optional<SimTime> last_success;
    std::optional<SimTime> last_sample_time;
    bool last_attempt_failed = false;
    std::optional<SensorReading> latest;
  };

  void apply_body(const Target& target, const InstructionBody& body);
  void apply_to_device(DeviceDescriptor& desc, const InstructionBody& body);
  void enqueue(const SensorReading& r);
  void note_cycle(bool ok);

  AgentConfig config_;
  edge::EdgeBank edge_;
  std::map<std::string, DeviceDescriptor> devices_;
  std::map<std::string, SensorState> sensor_state_;

  std::deque<SensorReading> pending_;
  std::uint64_t emitted_ = 0;
  std::uint64_t pushed_ = 0;
  std::uint64_t dropped_ = 0;
  std::uint64_t sample_failures_ = 0;

  CloudMode cloud_mode_ = CloudMode::CloudReachable;
  int consecutive_failures_ = 0;
  std::uint64_t last_applied_ = 0;
  SimTime last_tick_{0};
  std::optional<SimTime> first_tick_;

  std::deque<SecurityEvent> security_log_;
  std::vector<SecurityEvent> unsent_security_;
};

}  // namespace fogdeck::fog
