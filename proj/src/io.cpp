#include "treepin/io.hpp"

#include <charconv>
#include <cmath>
#include <ctime>

namespace treepin {

using nlohmann::json;

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

json disorder_to_json(const DisorderSpec& s) {
    switch (s.kind()) {
        case DisorderSpec::Kind::Gaussian:
            return {{"kind", "gaussian"}, {"mu", s.mu()}, {"sigma", s.sigma()}};
        case DisorderSpec::Kind::Bernoulli:
            return {{"kind", "bernoulli"}, {"p", s.p()}, {"lo", s.lo()}, {"hi", s.hi()}};
        case DisorderSpec::Kind::Constant:
            return {{"kind", "constant"}, {"c", s.c()}};
        case DisorderSpec::Kind::Shifted:
            return {{"kind", "shifted"}, {"base", disorder_to_json(s.base())}, {"shift", s.shift()}};
    }
    return {};
}

namespace {

double require_number(const json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_number())
        throw ConfigError(std::string("disorder spec missing numeric field '") + field + "'");
    return j[field].get<double>();
}

}  // namespace

DisorderSpec disorder_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ConfigError("disorder spec must be an object with a string 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "gaussian")
        return DisorderSpec::gaussian(require_number(j, "mu"), require_number(j, "sigma"));
    if (kind == "bernoulli")
        return DisorderSpec::bernoulli(require_number(j, "p"), require_number(j, "lo"),
                                       require_number(j, "hi"));
    if (kind == "constant") return DisorderSpec::constant(require_number(j, "c"));
    if (kind == "shifted") {
        if (!j.contains("base")) throw ConfigError("shifted disorder requires a 'base' spec");
        return DisorderSpec::shifted(disorder_from_json(j["base"]), require_number(j, "shift"));
    }
    throw ConfigError("unknown disorder kind '" + kind + "'");
}

const char* defect_kind_name(DefectKind k) {
    switch (k) {
        case DefectKind::None:
            return "none";
        case DefectKind::BranchShift:
            return "branch_shift";
        case DefectKind::SubtreeConstant:
            return "subtree_constant";
        case DefectKind::SubtreeShift:
            return "subtree_shift";
    }
    return "?";
}

DefectKind defect_kind_from_name(const std::string& name) {
    if (name == "none") return DefectKind::None;
    if (name == "branch_shift") return DefectKind::BranchShift;
    if (name == "subtree_constant") return DefectKind::SubtreeConstant;
    if (name == "subtree_shift") return DefectKind::SubtreeShift;
    throw ConfigError("unknown defect kind '" + name + "'");
}

json model_to_json(const ModelSpec& m) {
    return {{"d", m.d},
            {"d1", m.d1},
            {"bulk", disorder_to_json(m.bulk)},
            {"defect", {{"kind", defect_kind_name(m.defect)}, {"u", m.u}}}};
}

ModelSpec model_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("model spec must be an object");
    if (!j.contains("d") || !j["d"].is_number_integer())
        throw ConfigError("model spec requires integer 'd'");
    const int d = j["d"].get<int>();
    const int d1 = j.value("d1", 1);
    if (!j.contains("bulk")) throw ConfigError("model spec requires 'bulk' disorder");
    DisorderSpec bulk = disorder_from_json(j["bulk"]);
    DefectKind kind = DefectKind::None;
    double u = 0.0;
    if (j.contains("defect")) {
        const json& dj = j["defect"];
        if (!dj.is_object() || !dj.contains("kind") || !dj["kind"].is_string())
            throw ConfigError("model 'defect' must be an object with a string 'kind'");
        kind = defect_kind_from_name(dj["kind"].get<std::string>());
        if (kind != DefectKind::None) u = require_number(dj, "u");
    }
    return ModelSpec::make(d, d1, std::move(bulk), kind, u);
}

json run_record_to_json(const RunRecord& r) {
    return {{"schema_version", r.schema_version}, {"timestamp", r.timestamp},
            {"command", r.command},               {"config", r.config},
            {"results", r.results},               {"tool_version", r.tool_version}};
}

RunRecord run_record_from_json(const json& j) {
    RunRecord r;
    r.schema_version = j.at("schema_version").get<int>();
    r.timestamp = j.at("timestamp").get<std::string>();
    r.command = j.at("command").get<std::string>();
    r.config = j.at("config");
    r.results = j.at("results");
    r.tool_version = j.at("tool_version").get<std::string>();
    return r;
}

std::string utc_timestamp_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<double> parse_grid(const json& j, const std::string& what) {
    std::vector<double> grid;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number()) throw ConfigError(what + " grid entries must be numbers");
            grid.push_back(v.get<double>());
        }
    } else if (j.is_object()) {
        const double lo = require_number(j, "min");
        const double hi = require_number(j, "max");
        if (!j.contains("count") || !j["count"].is_number_integer())
            throw ConfigError(what + " grid requires integer 'count'");
        const int count = j["count"].get<int>();
        if (count < 1) throw ConfigError(what + " grid count must be >= 1");
        if (count == 1) {
            grid.push_back(lo);
        } else {
            for (int i = 0; i < count; ++i) grid.push_back(lo + (hi - lo) * i / (count - 1));
        }
    } else {
        throw ConfigError(what + " grid must be an array or {min,max,count}");
    }
    if (grid.empty()) throw ConfigError(what + " grid must not be empty");
    return grid;
}

}  // namespace treepin
