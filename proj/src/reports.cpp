#include "timelyhls/reports.hpp"

#include <iostream>
#include <regex>

#include <json.hpp>

#include "timelyhls/errors.hpp"
#include "util.hpp"

namespace timelyhls {

using ojson = nlohmann::ordered_json;

std::string to_string(QoRPhase phase) {
    switch (phase) {
    case QoRPhase::hls_synth: return "hls_synth";
    case QoRPhase::rtl_synth: return "rtl_synth";
    case QoRPhase::simulated: return "simulated";
    }
    return "simulated";
}

QoRPhase qor_phase_from_string(std::string_view s) {
    if (s == "hls_synth") return QoRPhase::hls_synth;
    if (s == "rtl_synth") return QoRPhase::rtl_synth;
    if (s == "simulated") return QoRPhase::simulated;
    throw ParseError("unknown source_phase '" + std::string(s) + "'", 0, std::string(s));
}

void validate(const QoRReport& r) {
    auto fail = [](const std::string& why) { throw ParseError("invalid QoR report: " + why); };
    if (r.latency_cycles < 0) fail("latency_cycles < 0");
    if (r.timing.tns_ns > 0) fail("tns_ns > 0");
    if (r.timing.met != (r.timing.wns_ns >= 0)) fail("met flag disagrees with wns");
    const auto& res = r.resources;
    if (res.ff < 0 || res.lut < 0 || res.dsp < 0 || res.bram < 0) fail("negative resource count");
    for (const auto& name : res.overflow)
        if (name != "ff" && name != "lut" && name != "dsp" && name != "bram") fail("unknown overflow resource " + name);
    std::set<std::string> labels;
    for (const auto& loop : r.loops) {
        if (!labels.insert(loop.loop_label).second) fail("duplicate loop label " + loop.loop_label);
        if (loop.pipelined != loop.ii.has_value()) fail("loop " + loop.loop_label + ": pipelined/ii mismatch");
        if (loop.ii && *loop.ii < 1) fail("loop " + loop.loop_label + ": ii < 1");
        if (loop.depth < 0) fail("loop " + loop.loop_label + ": depth < 0");
    }
}

// ---------------------------------------------------------------------------
// Vendor report extraction

ExtractionProfile ExtractionProfile::vivado_default() {
    ExtractionProfile p;
    p.patterns = {
        {"wns", R"(WNS\(ns\)\s*:\s*(\S+))"},
        {"tns", R"(TNS\(ns\)\s*:\s*(\S+))"},
        {"clock", R"(Clock Period\(ns\)\s*:\s*(\S+))"},
        {"latency", R"(Latency \(cycles\)\s*:\s*(\S+))"},
        {"ff", R"(\|\s*FF\s*\|\s*(\S+)\s*\|)"},
        {"lut", R"(\|\s*LUT\s*\|\s*(\S+)\s*\|)"},
        {"dsp", R"(\|\s*DSP\s*\|\s*(\S+)\s*\|)"},
        {"bram", R"(\|\s*BRAM_18K\s*\|\s*(\S+)\s*\|)"},
        {kLoopRow, R"(\|\s*-\s*([A-Za-z_][A-Za-z0-9_]*)\s*\|\s*(\S+)\s*\|\s*([0-9]+)\s*\|)"},
    };
    return p;
}

ExtractionProfile ExtractionProfile::from_json_text(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("extraction profile: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("extraction profile must be a flat JSON object");
    ExtractionProfile p;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string()) throw ConfigError("extraction profile: pattern '" + key + "' must be a string");
        p.patterns[key] = value.get<std::string>();
    }
    return p;
}

ExtractionProfile ExtractionProfile::load(const std::filesystem::path& path) {
    return from_json_text(read_file(path));
}

namespace {

std::optional<std::string> first_capture(std::string_view text, const std::string& pattern, const std::string& field) {
    std::regex re;
    try {
        re = std::regex(pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
        throw ConfigError("extraction profile: bad pattern for '" + field + "': " + e.what());
    }
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_search(text.begin(), text.end(), m, re)) return std::nullopt;
    if (m.size() < 2) throw ConfigError("extraction profile: pattern for '" + field + "' has no capture group");
    return m[1].str();
}

const std::string& require_pattern(const ExtractionProfile& profile, const std::string& field) {
    auto it = profile.patterns.find(field);
    if (it == profile.patterns.end()) throw ConfigError("extraction profile has no pattern for '" + field + "'");
    return it->second;
}

double capture_real(std::string_view text, const ExtractionProfile& profile, const std::string& field) {
    auto raw = first_capture(text, require_pattern(profile, field), field);
    if (!raw) throw ParseError("report is missing field '" + field + "'", 0, field);
    auto v = parse_double(*raw);
    if (!v) throw ParseError("field '" + field + "' is not numeric: '" + *raw + "'", 0, field);
    return *v;
}

long long capture_count(std::string_view text, const ExtractionProfile& profile, const std::string& field) {
    auto raw = first_capture(text, require_pattern(profile, field), field);
    if (!raw) throw ParseError("report is missing field '" + field + "'", 0, field);
    auto v = parse_int(*raw);
    if (!v) throw ParseError("field '" + field + "' is not an integer: '" + *raw + "'", 0, field);
    if (*v < 0) throw ParseError("field '" + field + "' is negative", 0, field);
    return *v;
}

}  // namespace

QoRReport parse_vendor_report(std::string_view text, const ExtractionProfile& profile, QoRPhase phase) {
    QoRReport r;
    r.source_phase = phase;
    r.timing.wns_ns = capture_real(text, profile, "wns");
    r.timing.tns_ns = capture_real(text, profile, "tns");
    if (r.timing.tns_ns > 0) throw ParseError("field 'tns' must be <= 0", 0, "tns");
    r.timing.met = r.timing.wns_ns >= 0;
    if (auto it = profile.patterns.find("clock"); it != profile.patterns.end()) {
        if (auto raw = first_capture(text, it->second, "clock")) {
            auto v = parse_double(*raw);
            if (!v) throw ParseError("field 'clock' is not numeric: '" + *raw + "'", 0, "clock");
            r.timing.clock_ns = *v;
        }
    }
    r.latency_cycles = capture_count(text, profile, "latency");
    r.resources.ff = capture_count(text, profile, "ff");
    r.resources.lut = capture_count(text, profile, "lut");
    r.resources.dsp = capture_count(text, profile, "dsp");
    r.resources.bram = capture_count(text, profile, "bram");

    if (auto it = profile.patterns.find(ExtractionProfile::kLoopRow); it != profile.patterns.end()) {
        std::regex re;
        try {
            re = std::regex(it->second, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            throw ConfigError(std::string("extraction profile: bad loop_row pattern: ") + e.what());
        }
        std::set<std::string> seen;
        using It = std::regex_iterator<std::string_view::const_iterator>;
        for (It m(text.begin(), text.end(), re), end; m != end; ++m) {
            if (m->size() < 4) throw ConfigError("extraction profile: loop_row needs three capture groups");
            LoopMetric loop;
            loop.loop_label = (*m)[1].str();
            if (!seen.insert(loop.loop_label).second) continue;  // first row wins
            const auto ii_text = (*m)[2].str();
            if (ii_text != "-" && !iequals(ii_text, "no") && !iequals(ii_text, "n/a")) {
                auto ii = parse_int(ii_text);
                if (!ii || *ii < 1)
                    throw ParseError("loop '" + loop.loop_label + "': bad II '" + ii_text + "'", 0, "loop_row");
                loop.ii = *ii;
                loop.pipelined = true;
            }
            auto depth = parse_int((*m)[3].str());
            if (!depth) throw ParseError("loop '" + loop.loop_label + "': bad depth", 0, "loop_row");
            loop.depth = *depth;
            r.loops.push_back(std::move(loop));
        }
    }
    validate(r);
    return r;
}

// ---------------------------------------------------------------------------
// Canonical JSON

std::string canonical_json(const QoRReport& r) {
    ojson j;
    j["schema_version"] = kQoRSchemaVersion;
    j["source_phase"] = to_string(r.source_phase);
    j["latency_cycles"] = r.latency_cycles;
    j["timing"] = {{"wns_ns", r.timing.wns_ns},
                   {"tns_ns", r.timing.tns_ns},
                   {"clock_ns", r.timing.clock_ns},
                   {"met", r.timing.wns_ns >= 0}};
    j["resources"] = {{"ff", r.resources.ff},
                      {"lut", r.resources.lut},
                      {"dsp", r.resources.dsp},
                      {"bram", r.resources.bram},
                      {"overflow", r.resources.overflow}};
    auto loops = ojson::array();
    for (const auto& loop : r.loops) {
        ojson jl;
        jl["loop_label"] = loop.loop_label;
        jl["ii"] = loop.ii ? ojson(*loop.ii) : ojson(nullptr);
        jl["depth"] = loop.depth;
        jl["pipelined"] = loop.pipelined;
        loops.push_back(std::move(jl));
    }
    j["loops"] = std::move(loops);
    return j.dump(2) + "\n";
}

namespace {

void note_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where,
                       std::vector<std::string>* warnings) {
    for (const auto& [key, value] : j.items()) {
        if (known.count(key)) continue;
        std::string msg = "ignoring unknown key '" + key + "' in " + where;
        if (warnings)
            warnings->push_back(msg);
        else
            std::clog << "warning: " << msg << "\n";
    }
}

const nlohmann::json& member(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw VersionError(where + " is missing '" + key + "'");
    return j.at(key);
}

}  // namespace

QoRReport canonical_from_json(std::string_view text, std::vector<std::string>* warnings) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("canonical report: ") + e.what());
    }
    if (!j.is_object()) throw VersionError("canonical report must be a JSON object");
    const auto& version = member(j, "schema_version", "report");
    if (!version.is_number_integer() || version.get<int>() != kQoRSchemaVersion)
        throw VersionError("unsupported schema_version " + version.dump() + " (expected " +
                           std::to_string(kQoRSchemaVersion) + ")");
    note_unknown_keys(j, {"schema_version", "source_phase", "latency_cycles", "timing", "resources", "loops"}, "report",
                      warnings);

    QoRReport r;
    try {
        r.source_phase = qor_phase_from_string(member(j, "source_phase", "report").get<std::string>());
        r.latency_cycles = member(j, "latency_cycles", "report").get<long long>();

        const auto& t = member(j, "timing", "report");
        note_unknown_keys(t, {"wns_ns", "tns_ns", "clock_ns", "met"}, "timing", warnings);
        r.timing.wns_ns = member(t, "wns_ns", "timing").get<double>();
        r.timing.tns_ns = member(t, "tns_ns", "timing").get<double>();
        r.timing.clock_ns = member(t, "clock_ns", "timing").get<double>();
        r.timing.met = r.timing.wns_ns >= 0;  // recomputed, never trusted

        const auto& res = member(j, "resources", "report");
        note_unknown_keys(res, {"ff", "lut", "dsp", "bram", "overflow"}, "resources", warnings);
        r.resources.ff = member(res, "ff", "resources").get<long long>();
        r.resources.lut = member(res, "lut", "resources").get<long long>();
        r.resources.dsp = member(res, "dsp", "resources").get<long long>();
        r.resources.bram = member(res, "bram", "resources").get<long long>();
        for (const auto& name : member(res, "overflow", "resources")) r.resources.overflow.insert(name.get<std::string>());

        for (const auto& jl : member(j, "loops", "report")) {
            note_unknown_keys(jl, {"loop_label", "ii", "depth", "pipelined"}, "loop", warnings);
            LoopMetric loop;
            loop.loop_label = member(jl, "loop_label", "loop").get<std::string>();
            const auto& ii = member(jl, "ii", "loop");
            if (!ii.is_null()) loop.ii = ii.get<long long>();
            loop.depth = member(jl, "depth", "loop").get<long long>();
            loop.pipelined = member(jl, "pipelined", "loop").get<bool>();
            r.loops.push_back(std::move(loop));
        }
    } catch (const nlohmann::json::type_error& e) {
        throw ParseError(std::string("canonical report: ") + e.what());
    }
    validate(r);
    return r;
}

void canonical_save(const QoRReport& report, const std::filesystem::path& path) {
    write_file(path, canonical_json(report));
}

QoRReport canonical_load(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    return canonical_from_json(read_file(path), warnings);
}

}  // namespace timelyhls
