#pragma once

// Cloud-layer datastore: readings, instructions, node registry, latest node
// reports and security events. Writes go through one committer (an exclusive
// lock) and are appended to a JSON-lines log before they become visible;
// readers share a lock. The log is compacted into a snapshot on close() and
// after recovery.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fogdeck/json_codec.hpp"
#include "fogdeck/model.hpp"

namespace fogdeck::store {

struct NodeRecord {
  std::string fog_id;
  std::vector<DeviceDescriptor> devices;
  TimestampMs last_seen = 0;
  std::string endpoint;  // "host:port" of the node's offline listener

  bool operator==(const NodeRecord&) const = default;
};

void to_json(json& j, const NodeRecord& v);
void from_json(const json& j, NodeRecord& v);

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StoreOptions {
  /// Empty: memory only, nothing survives the object.
  std::filesystem::path data_dir;
  /// fsync after every commit instead of only flushing to the OS.
  bool sync_writes = false;
};

class Datastore {
 public:
  explicit Datastore(StoreOptions options = {});
  ~Datastore();
  Datastore(const Datastore&) = delete;
  Datastore& operator=(const Datastore&) = delete;

  /// Inserts unseen (id, seq) rows and returns how many were new. Any invalid
  /// reading rejects the whole batch with ValidationError and writes nothing.
  std::size_t put_readings(std::span<const SensorReading> batch);

  /// Max-seq row for the device. Throws NotFound.
  SensorReading query_latest(const DeviceId& device) const;

  /// Latest row of every device, optionally restricted to one node.
  std::vector<SensorReading> stats(const std::optional<std::string>& fog_id = std::nullopt) const;

  /// Full history ordered by (device, seq).
  std::vector<SensorReading> history(const std::optional<std::string>& fog_id = std::nullopt,
                                     const std::optional<std::string>& device_id = std::nullopt) const;
  std::size_t reading_count() const;

  /// Validates the body against the registered target and assigns the next id.
  std::uint64_t append_instruction(Instruction instruction);

  /// Instructions for the node with instr_id > since, ascending.
  std::vector<Instruction> fetch_instructions(const std::string& fog_id, std::uint64_t since) const;
  std::vector<Instruction> instructions() const;

  /// Upsert. last_seen never moves backwards.
  void register_node(NodeRecord node);
  std::vector<NodeRecord> nodes() const;

  /// Latest report per node; also refreshes the registry's descriptors and last_seen.
  void put_report(const NodeReport& report);
  std::vector<NodeReport> reports(const std::optional<std::string>& fog_id = std::nullopt) const;

  /// Returns how many events were new (exact duplicates are ignored).
  std::size_t put_security(std::span<const SecurityEvent> events);
  std::vector<SecurityEvent> security() const;

  /// Writes a snapshot, truncates the log and closes it. Idempotent.
  void close();
  /// Closes the log without compaction, as a crash would leave it.
  void abandon();

 private:
  void recover();
  void append_log(const json& record);
  void write_snapshot_locked();
  void apply_record(const json& record);
  void insert_reading_locked(const SensorReading& r);
  void register_node_locked(NodeRecord node);

  StoreOptions options_;
  mutable std::shared_mutex mutex_;
  std::FILE* log_ = nullptr;
  bool closed_ = false;

  std::map<DeviceId, std::map<std::uint64_t, SensorReading>> readings_;
  std::size_t reading_count_ = 0;
  std::map<std::uint64_t, Instruction> instructions_;
  std::uint64_t next_instr_id_ = 1;
  std::map<std::string, NodeRecord> nodes_;
  std::map<std::string, NodeReport> reports_;
  std::set<SecurityEvent> security_set_;
  std::vector<SecurityEvent> security_;
};

}  // namespace fogdeck::store
