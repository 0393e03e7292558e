#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "timelyhls/hls_source.hpp"
#include "timelyhls/kb.hpp"
#include "timelyhls/reports.hpp"

namespace timelyhls {

// ---------------------------------------------------------------------------
// Kernel model consumed by the analytical simulator

struct OpCounts {
    long long mul = 0;
    long long add = 0;
    long long load = 0;
    long long store = 0;

    long long total() const { return mul + add + load + store; }
    bool operator==(const OpCounts&) const = default;
};

struct AppliedPragmas {
    std::optional<long long> pipeline_ii;
    long long unroll_factor = 1;

    bool operator==(const AppliedPragmas&) const = default;
};

struct LoopDescriptor {
    std::string label;
    long long trip_count = 1;
    std::optional<std::string> parent;  // label of the enclosing loop
    OpCounts ops;                       // per iteration, excluding child loops
    long long carried_dependence_distance = 0;
    AppliedPragmas applied;

    bool operator==(const LoopDescriptor&) const = default;
};

struct ArrayDescriptor {
    std::string name;
    long long elements = 1;
    long long accesses_per_iteration = 0;
    long long partition_factor = 1;
    std::string loop;  // loop whose iterations issue the accesses

    bool operator==(const ArrayDescriptor&) const = default;
};

struct KernelModel {
    std::vector<LoopDescriptor> loops;  // parents listed before children
    std::vector<ArrayDescriptor> arrays;
    long long datapath_bits = 32;

    const LoopDescriptor* find_loop(std::string_view label) const;
    LoopDescriptor* find_loop(std::string_view label);
    const ArrayDescriptor* find_array(std::string_view name) const;
    ArrayDescriptor* find_array(std::string_view name);

    bool operator==(const KernelModel&) const = default;
};

// Throws ValidationError on broken structure (unknown parents, cycles,
// non-positive counts, duplicate labels).
void validate(const KernelModel& model);

KernelModel kernel_model_from_json(std::string_view text);
std::string kernel_model_to_json(const KernelModel& model);
KernelModel load_kernel_model(const std::filesystem::path& path);

// Same model with every pipeline/unroll/partition setting reset.
KernelModel without_pragmas(KernelModel model);

// PIPELINE / UNROLL resolve through the enclosing loop anchor's label,
// ARRAY_PARTITION through its variable. Throws MappingError when the
// referenced loop or array is not in the model.
KernelModel apply_pragmas_to_model(KernelModel model, const std::vector<PragmaDirective>& pragmas,
                                   const std::vector<AnchorPoint>& anchors);

// ---------------------------------------------------------------------------
// Analytical simulator

// Fixed model constants; every simulated number can be reproduced by hand.
namespace sim {
inline constexpr long long kMulDepth = 4;
inline constexpr long long kAddDepth = 1;
inline constexpr long long kLoadDepth = 2;
inline constexpr long long kStoreDepth = 2;
inline constexpr long long kPortsPerBank = 2;
inline constexpr long long kBaseLogicLevels = 4;
inline constexpr long long kMulChainLevels = 2;
inline constexpr double kBramBits = 18432.0;
}  // namespace sim

struct LoopSchedule {
    std::string label;
    long long depth = 0;            // own operation depth
    long long body_latency = 0;     // depth plus nested loop latency
    long long effective_trips = 0;
    long long memory_floor = 1;
    long long dependence_floor = 1;
    std::optional<long long> achieved_ii;  // pipelined loops only
    long long latency = 0;
    long long logic_levels = 0;
};

struct SimulationResult {
    QoRReport qor;
    std::vector<LoopSchedule> schedule;  // model order
    long long logic_levels = 0;
    double critical_path_ns = 0.0;
    std::string critical_loop;
};

SimulationResult simulate_detailed(const KernelModel& model, const FpgaTarget& target, double clock_ns);
QoRReport simulate(const KernelModel& model, const FpgaTarget& target, double clock_ns);

// ---------------------------------------------------------------------------
// Toolchain adapters

enum class Phase { hls_synth, c_sim, rtl_synth, rtl_sim };

inline constexpr Phase kStageOrder[] = {Phase::hls_synth, Phase::c_sim, Phase::rtl_synth, Phase::rtl_sim};

std::string to_string(Phase phase);
Phase phase_from_string(std::string_view s);

struct SynthesisOutcome {
    bool ok = false;
    std::optional<QoRReport> qor;
    std::string log;
    Phase phase = Phase::hls_synth;
};

// Everything a toolchain needs to evaluate one generated kernel.
struct KernelJob {
    std::string benchmark_id;
    std::string top_function;
    std::string source;
    std::string testbench;
    FpgaTarget target;
    double clock_ns = 0.0;
    std::filesystem::path workdir;
};

class Toolchain {
public:
    virtual ~Toolchain() = default;
    virtual SynthesisOutcome run(Phase phase, const KernelJob& job) = 0;
    virtual std::string name() const = 0;
};

/// Deterministic stand-in for Vitis HLS / Vivado. Synthesis phases map the
/// source's pragmas onto `model` and run the analytical simulator. The
/// functional phases compare the source's code tokens (pragmas and comments
/// excluded) against the reference kernel: pragma-only edits pass, anything
/// else is reported as an output mismatch.
class SimulatedToolchain final : public Toolchain {
public:
    SimulatedToolchain(KernelModel model, std::string reference_source);

    SynthesisOutcome run(Phase phase, const KernelJob& job) override;
    std::string name() const override { return "simulated"; }

private:
    SynthesisOutcome synthesize(Phase phase, const KernelJob& job) const;
    SynthesisOutcome functional(Phase phase, const KernelJob& job) const;

    KernelModel model_;
    std::vector<std::string> reference_tokens_;
};

struct PhaseCommand {
    std::string command;                     // template with {part} {clock_ns} {top} {workdir}
    std::vector<std::string> report_globs;   // relative to workdir
};

struct ExternalAdapterConfig {
    std::map<Phase, PhaseCommand> phases;
    std::chrono::seconds timeout{1800};
    ExtractionProfile profile = ExtractionProfile::vivado_default();

    // Vitis HLS / Vivado batch commands driven by generated Tcl scripts.
    static ExternalAdapterConfig vitis_defaults();
};

struct CommandSubstitutions {
    std::string part;
    double clock_ns = 0.0;
    std::string top;
};

std::string expand_command(const std::string& templ, const CommandSubstitutions& subs,
                           const std::filesystem::path& workdir);

// Runs one phase's command in `workdir`. Exit status 127/126 (shell could not
// find or execute the tool) throws ToolMissing; exceeding the timeout throws
// ToolTimeout. Synthesis phases are ok only when a report matched a glob and
// parsed; `.json` reports are read as canonical QoR, others via the profile.
SynthesisOutcome run_phase(const ExternalAdapterConfig& cfg, Phase phase, const std::filesystem::path& workdir,
                           const CommandSubstitutions& subs);

/// Writes kernel, testbench and Tcl driver scripts into the job's workdir and
/// shells out per phase.
class ExternalToolchain final : public Toolchain {
public:
    explicit ExternalToolchain(ExternalAdapterConfig cfg) : cfg_(std::move(cfg)) {}

    SynthesisOutcome run(Phase phase, const KernelJob& job) override;
    std::string name() const override { return "external"; }

private:
    ExternalAdapterConfig cfg_;
};

void write_driver_scripts(const KernelJob& job);

}  // namespace timelyhls
