#pragma once

// JSON documents for the domain types. Field names are the lower_snake_case
// member names; enums serialize as lower_snake_case strings. The datastore
// HTTP API, the wire-protocol payloads (as CBOR) and the panel API all use
// these encodings.

#include <nlohmann/json.hpp>

#include "fogdeck/model.hpp"

namespace fogdeck {

using json = nlohmann::json;

void to_json(json& j, const DeviceId& v);
void from_json(const json& j, DeviceId& v);
void to_json(json& j, const Target& v);
void from_json(const json& j, Target& v);
void to_json(json& j, const Location& v);
void from_json(const json& j, Location& v);
void to_json(json& j, const WorkingRange& v);
void from_json(const json& j, WorkingRange& v);
void to_json(json& j, const DeviceDescriptor& v);
void from_json(const json& j, DeviceDescriptor& v);
void to_json(json& j, const SensorReading& v);
void from_json(const json& j, SensorReading& v);
void to_json(json& j, const HealthStatus& v);
void from_json(const json& j, HealthStatus& v);
void to_json(json& j, const InstructionBody& v);
void from_json(const json& j, InstructionBody& v);
void to_json(json& j, const Instruction& v);
void from_json(const json& j, Instruction& v);
void to_json(json& j, const NetworkMode& v);
void from_json(const json& j, NetworkMode& v);
void to_json(json& j, const SecurityEvent& v);
void from_json(const json& j, SecurityEvent& v);
void to_json(json& j, const ActuatorState& v);
void from_json(const json& j, ActuatorState& v);
void to_json(json& j, const NodeReport& v);
void from_json(const json& j, NodeReport& v);

}  // namespace fogdeck
