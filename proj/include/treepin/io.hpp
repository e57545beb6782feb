#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "treepin/model.hpp"

namespace treepin {

inline constexpr const char* kToolVersion = "treepin 0.1.0";
inline constexpr int kRunRecordSchemaVersion = 1;

// 17 significant digits, '.' decimal separator, locale-independent.
std::string fmt17(double v);

// Tagged-object serialization, e.g. {"kind":"gaussian","mu":0.0,"sigma":1.0}.
nlohmann::json disorder_to_json(const DisorderSpec& s);
DisorderSpec disorder_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const ModelSpec& m);
ModelSpec model_from_json(const nlohmann::json& j);

const char* defect_kind_name(DefectKind k);
DefectKind defect_kind_from_name(const std::string& name);

// Full provenance of one CLI invocation: the effective configuration plus the
// results payload, enough to re-execute the run bit-for-bit.
struct RunRecord {
    int schema_version = kRunRecordSchemaVersion;
    std::string timestamp;  // UTC, ISO 8601
    std::string command;
    nlohmann::json config;
    nlohmann::json results;
    std::string tool_version = kToolVersion;
};

nlohmann::json run_record_to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);

std::string utc_timestamp_now();

// Parses either an explicit array of numbers or {"min":a,"max":b,"count":k}.
std::vector<double> parse_grid(const nlohmann::json& j, const std::string& what);

}  // namespace treepin
