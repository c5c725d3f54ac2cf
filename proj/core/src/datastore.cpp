#include "fogdeck/datastore.hpp"

#include <unistd.h>

#include <fstream>
#include <mutex>

namespace fogdeck::store {

void to_json(json& j, const NodeRecord& v) {
  j = json{{"fog_id", v.fog_id}, {"devices", v.devices}, {"last_seen", v.last_seen}, {"endpoint", v.endpoint}};
}

void from_json(const json& j, NodeRecord& v) {
  j.at("fog_id").get_to(v.fog_id);
  v.devices = j.value("devices", std::vector<DeviceDescriptor>{});
  v.last_seen = j.value("last_seen", TimestampMs{0});
  v.endpoint = j.value("endpoint", std::string{});
}

namespace {

constexpr const char* kLogName = "store.log";
constexpr const char* kSnapshotName = "snapshot.json";

}  // namespace

Datastore::Datastore(StoreOptions options) : options_(std::move(options)) {
  if (!options_.data_dir.empty()) {
    std::filesystem::create_directories(options_.data_dir);
    recover();
  }
}

Datastore::~Datastore() {
  try {
    close();
  } catch (...) {
  }
}

void Datastore::recover() {
  auto snapshot_path = options_.data_dir / kSnapshotName;
  if (std::filesystem::exists(snapshot_path)) {
    std::ifstream in(snapshot_path);
    auto snap = json::parse(in);
    for (const auto& r : snap.at("readings")) insert_reading_locked(r.get<SensorReading>());
    for (const auto& i : snap.at("instructions")) {
      auto instr = i.get<Instruction>();
      instructions_[instr.instr_id] = instr;
    }
    next_instr_id_ = snap.value("next_instr_id", std::uint64_t{1});
    for (const auto& n : snap.at("nodes")) register_node_locked(n.get<NodeRecord>());
    for (const auto& e : snap.at("security")) {
      auto ev = e.get<SecurityEvent>();
      if (security_set_.insert(ev).second) security_.push_back(ev);
    }
  }

  auto log_path = options_.data_dir / kLogName;
  if (std::filesystem::exists(log_path)) {
    std::ifstream in(log_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json record;
      try {
        record = json::parse(line);
      } catch (const json::parse_error&) {
        // A torn tail from a crash mid-append; it was never acknowledged.
        break;
      }
      apply_record(record);
    }
  }

  // Fold the replayed log into a fresh snapshot so appends start clean.
  write_snapshot_locked();
  log_ = std::fopen(log_path.c_str(), "w");
  if (log_ == nullptr) throw std::runtime_error("cannot open store log: " + log_path.string());
}

void Datastore::apply_record(const json& record) {
  auto kind = record.at("k").get<std::string>();
  if (kind == "r") {
    for (const auto& r : record.at("rows")) insert_reading_locked(r.get<SensorReading>());
  } else if (kind == "i") {
    auto instr = record.at("row").get<Instruction>();
    instructions_[instr.instr_id] = instr;
    next_instr_id_ = std::max(next_instr_id_, instr.instr_id + 1);
  } else if (kind == "n") {
    register_node_locked(record.at("row").get<NodeRecord>());
  } else if (kind == "s") {
    for (const auto& e : record.at("rows")) {
      auto ev = e.get<SecurityEvent>();
      if (security_set_.insert(ev).second) security_.push_back(ev);
    }
  }
}

void Datastore::append_log(const json& record) {
  if (log_ == nullptr) return;
  auto line = record.dump();
  line.push_back('\n');
  if (std::fwrite(line.data(), 1, line.size(), log_) != line.size() || std::fflush(log_) != 0) {
    throw std::runtime_error("store log write failed");
  }
  if (options_.sync_writes) ::fsync(::fileno(log_));
}

void Datastore::write_snapshot_locked() {
  json snap;
  snap["readings"] = json::array();
  for (const auto& [id, rows] : readings_) {
    for (const auto& [seq, r] : rows) snap["readings"].push_back(r);
  }
  snap["instructions"] = json::array();
  for (const auto& [id, instr] : instructions_) snap["instructions"].push_back(instr);
  snap["next_instr_id"] = next_instr_id_;
  snap["nodes"] = json::array();
  for (const auto& [id, n] : nodes_) snap["nodes"].push_back(n);
  snap["security"] = security_;

  auto path = options_.data_dir / kSnapshotName;
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << snap.dump();
    out.flush();
    if (!out) throw std::runtime_error("cannot write snapshot: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void Datastore::insert_reading_locked(const SensorReading& r) {
  auto [it, inserted] = readings_[r.id].emplace(r.seq, r);
  if (!inserted) return;
  ++reading_count_;
  auto node = nodes_.find(r.id.fog_id);
  if (node != nodes_.end()) node->second.last_seen = std::max(node->second.last_seen, r.timestamp);
}

std::size_t Datastore::put_readings(std::span<const SensorReading> batch) {
  std::unique_lock lock(mutex_);
  std::vector<Violation> violations;
  for (const auto& r : batch) {
    std::optional<DeviceKind> kind;
    if (auto node = nodes_.find(r.id.fog_id); node != nodes_.end()) {
      for (const auto& d : node->second.devices) {
        if (d.id == r.id) kind = d.kind;
      }
    }
    auto v = validate_reading(r, kind);
    violations.insert(violations.end(), v.begin(), v.end());
  }
  if (!violations.empty()) throw ValidationError(std::move(violations));

  json rows = json::array();
  for (const auto& r : batch) {
    auto dev = readings_.find(r.id);
    if (dev != readings_.end() && dev->second.count(r.seq)) continue;
    rows.push_back(r);
  }
  if (rows.empty()) return 0;
  append_log({{"k", "r"}, {"rows", rows}});
  std::size_t before = reading_count_;
  for (const auto& r : batch) insert_reading_locked(r);
  return reading_count_ - before;
}

SensorReading Datastore::query_latest(const DeviceId& device) const {
  std::shared_lock lock(mutex_);
  auto it = readings_.find(device);
  if (it == readings_.end() || it->second.empty()) throw NotFound("no readings for " + device.str());
  return it->second.rbegin()->second;
}

std::vector<SensorReading> Datastore::stats(const std::optional<std::string>& fog_id) const {
  std::shared_lock lock(mutex_);
  std::vector<SensorReading> out;
  for (const auto& [id, rows] : readings_) {
    if (rows.empty() || (fog_id && id.fog_id != *fog_id)) continue;
    out.push_back(rows.rbegin()->second);
  }
  return out;
}

std::vector<SensorReading> Datastore::history(const std::optional<std::string>& fog_id,
                                              const std::optional<std::string>& device_id) const {
  std::shared_lock lock(mutex_);
  std::vector<SensorReading> out;
  for (const auto& [id, rows] : readings_) {
    if ((fog_id && id.fog_id != *fog_id) || (device_id && id.device_id != *device_id)) continue;
    for (const auto& [seq, r] : rows) out.push_back(r);
  }
  return out;
}

std::size_t Datastore::reading_count() const {
  std::shared_lock lock(mutex_);
  return reading_count_;
}

std::uint64_t Datastore::append_instruction(Instruction instruction) {
  std::unique_lock lock(mutex_);
  auto node = nodes_.find(instruction.target.fog_id);
  if (node == nodes_.end()) {
    throw ValidationError({Violation::InvalidFogId}, "unknown fog node: " + instruction.target.fog_id);
  }
  std::optional<DeviceKind> kind;
  if (instruction.target.device_id) {
    const DeviceDescriptor* found = nullptr;
    for (const auto& d : node->second.devices) {
      if (d.id.device_id == *instruction.target.device_id) found = &d;
    }
    if (found == nullptr) {
      throw ValidationError({Violation::InvalidDeviceId}, "unknown device: " + instruction.target.str());
    }
    kind = found->kind;
  }
  auto violations = validate_body(instruction.body, kind);
  if (!violations.empty()) throw ValidationError(std::move(violations));

  instruction.instr_id = next_instr_id_;
  append_log({{"k", "i"}, {"row", instruction}});
  ++next_instr_id_;
  instructions_[instruction.instr_id] = instruction;
  return instruction.instr_id;
}

std::vector<Instruction> Datastore::fetch_instructions(const std::string& fog_id, std::uint64_t since) const {
  std::shared_lock lock(mutex_);
  std::vector<Instruction> out;
  for (auto it = instructions_.upper_bound(since); it != instructions_.end(); ++it) {
    if (it->second.target.fog_id == fog_id) out.push_back(it->second);
  }
  return out;
}

std::vector<Instruction> Datastore::instructions() const {
  std::shared_lock lock(mutex_);
  std::vector<Instruction> out;
  for (const auto& [id, i] : instructions_) out.push_back(i);
  return out;
}

void Datastore::register_node_locked(NodeRecord node) {
  auto& slot = nodes_[node.fog_id];
  node.last_seen = std::max(node.last_seen, slot.last_seen);
  slot = std::move(node);
}

void Datastore::register_node(NodeRecord node) {
  if (!is_valid_identifier(node.fog_id)) throw ValidationError({Violation::InvalidFogId});
  std::vector<Violation> violations;
  for (const auto& d : node.devices) {
    auto v = validate_descriptor(d);
    if (d.id.fog_id != node.fog_id) v.push_back(Violation::InvalidFogId);
    violations.insert(violations.end(), v.begin(), v.end());
  }
  if (!violations.empty()) throw ValidationError(std::move(violations));

  std::unique_lock lock(mutex_);
  if (auto it = nodes_.find(node.fog_id); it != nodes_.end()) {
    node.last_seen = std::max(node.last_seen, it->second.last_seen);
    if (it->second == node) return;
  }
  append_log({{"k", "n"}, {"row", node}});
  register_node_locked(std::move(node));
}

std::vector<NodeRecord> Datastore::nodes() const {
  std::shared_lock lock(mutex_);
  std::vector<NodeRecord> out;
  for (const auto& [id, n] : nodes_) out.push_back(n);
  return out;
}

void Datastore::put_report(const NodeReport& report) {
  if (!is_valid_identifier(report.fog_id)) throw ValidationError({Violation::InvalidFogId});
  std::unique_lock lock(mutex_);
  reports_[report.fog_id] = report;
  auto node = nodes_.find(report.fog_id);
  if (node == nodes_.end()) return;
  node->second.last_seen = std::max(node->second.last_seen, report.reported_at);
  if (!report.devices.empty() && report.devices != node->second.devices) {
    NodeRecord updated = node->second;
    updated.devices = report.devices;
    append_log({{"k", "n"}, {"row", updated}});
    node->second = std::move(updated);
  }
}

std::vector<NodeReport> Datastore::reports(const std::optional<std::string>& fog_id) const {
  std::shared_lock lock(mutex_);
  std::vector<NodeReport> out;
  for (const auto& [id, r] : reports_) {
    if (!fog_id || id == *fog_id) out.push_back(r);
  }
  return out;
}

std::size_t Datastore::put_security(std::span<const SecurityEvent> events) {
  std::unique_lock lock(mutex_);
  json rows = json::array();
  for (const auto& e : events) {
    if (!security_set_.count(e)) rows.push_back(e);
  }
  if (rows.empty()) return 0;
  append_log({{"k", "s"}, {"rows", rows}});
  std::size_t added = 0;
  for (const auto& e : events) {
    if (security_set_.insert(e).second) {
      security_.push_back(e);
      ++added;
    }
  }
  return added;
}

std::vector<SecurityEvent> Datastore::security() const {
  std::shared_lock lock(mutex_);
  return security_;
}

void Datastore::close() {
  std::unique_lock lock(mutex_);
  if (closed_) return;
  closed_ = true;
  if (log_ == nullptr) return;
  std::fclose(log_);
  log_ = nullptr;
  write_snapshot_locked();
  std::ofstream(options_.data_dir / kLogName, std::ios::trunc);
}

void Datastore::abandon() {
  std::unique_lock lock(mutex_);
  closed_ = true;
  if (log_ != nullptr) {
    std::fclose(log_);
    log_ = nullptr;
  }
}

}  // namespace fogdeck::store
