#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace timelyhls {

struct TimingSummary {
    double wns_ns = 0.0;
    double tns_ns = 0.0;
    double clock_ns = 0.0;
    bool met = true;  // always wns_ns >= 0

    bool operator==(const TimingSummary&) const = default;
};

struct ResourceUsage {
    long long ff = 0;
    long long lut = 0;
    long long dsp = 0;
    long long bram = 0;
    std::set<std::string> overflow;  // subset of {"ff", "lut", "dsp", "bram"}

    bool operator==(const ResourceUsage&) const = default;
};

struct LoopMetric {
    std::string loop_label;
    std::optional<long long> ii;  // present iff pipelined
    long long depth = 0;
    bool pipelined = false;

    bool operator==(const LoopMetric&) const = default;
};

enum class QoRPhase { hls_synth, rtl_synth, simulated };

std::string to_string(QoRPhase phase);
QoRPhase qor_phase_from_string(std::string_view s);

struct QoRReport {
    long long latency_cycles = 0;
    TimingSummary timing;
    ResourceUsage resources;
    std::vector<LoopMetric> loops;
    QoRPhase source_phase = QoRPhase::simulated;

    bool operator==(const QoRReport&) const = default;
};

// Throws ParseError on a broken invariant (negative counts, tns > 0,
// duplicate loop labels, ii/pipelined mismatch, met != (wns >= 0)).
void validate(const QoRReport& report);

/// Named regular expressions (ECMAScript) used to pull values out of vendor
/// report text. Each scalar pattern must have one capture group; the loop
/// row pattern captures (label, ii, depth) where an ii of "-", "no" or "N/A"
/// marks an unpipelined loop.
struct ExtractionProfile {
    std::map<std::string, std::string> patterns;

    static constexpr const char* kLoopRow = "loop_row";
    static ExtractionProfile vivado_default();
    static ExtractionProfile from_json_text(std::string_view text);
    static ExtractionProfile load(const std::filesystem::path& path);
};

// Mandatory fields in check order: wns, tns, latency, ff, lut, dsp, bram.
// `clock` is optional and defaults to 0 when absent from the profile or text.
QoRReport parse_vendor_report(std::string_view text, const ExtractionProfile& profile,
                              QoRPhase phase = QoRPhase::rtl_synth);

constexpr int kQoRSchemaVersion = 1;

std::string canonical_json(const QoRReport& report);
QoRReport canonical_from_json(std::string_view text, std::vector<std::string>* warnings = nullptr);

void canonical_save(const QoRReport& report, const std::filesystem::path& path);
QoRReport canonical_load(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

}  // namespace timelyhls
