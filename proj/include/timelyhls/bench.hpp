#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "timelyhls/kb.hpp"
#include "timelyhls/llm.hpp"
#include "timelyhls/loop.hpp"
#include "timelyhls/reports.hpp"
#include "timelyhls/toolchain.hpp"

namespace timelyhls {

inline constexpr const char* kDefaultObjective =
    "Minimize latency in clock cycles while meeting the target clock period and staying within the "
    "device's resources. Keep the function signature and its results unchanged.";

struct BenchmarkDescriptor {
    std::string id;
    std::string title;
    std::string challenge;
    std::filesystem::path source_path;  // absolute after load
    std::filesystem::path testbench_path;
    std::filesystem::path model_path;
    std::string top_function;
    std::string objective = kDefaultObjective;
};

// Paths in the manifest are relative to the manifest's directory. Throws
// ConfigError when the file is unreadable or malformed, ValidationError for
// a duplicate id or a path that does not exist.
std::vector<BenchmarkDescriptor> load_manifest(const std::filesystem::path& manifest);

const BenchmarkDescriptor& find_benchmark(const std::vector<BenchmarkDescriptor>& corpus, std::string_view id);

// Reads source and testbench into a loop task.
KernelTask make_task(const BenchmarkDescriptor& desc);

// ---------------------------------------------------------------------------
// Metrics

// base/opt, unrounded. Throws ContractError unless both are positive.
double compute_speedup(long long base_cycles, long long opt_cycles);

// Four significant digits: 3.865, 0.2969, 1.
std::string format_speedup(double speedup);

struct PercentChange {
    double pct = 0.0;     // (opt - base) / base * 100, rounded to 2 dp
    bool is_new = false;  // base was 0 and opt is not

    bool operator==(const PercentChange&) const = default;
};

PercentChange percent_change(long long base, long long opt);
std::string format_change(const PercentChange& c);  // "-57.34", "3100.00" or "new"

struct ResourceDelta {
    PercentChange ff, lut, dsp, bram;

    bool operator==(const ResourceDelta&) const = default;
};

ResourceDelta compute_resource_delta(const ResourceUsage& base, const ResourceUsage& opt);

struct QoRDelta {
    std::string benchmark_id;
    std::string family;
    std::string part;
    long long latency_base = 0;
    long long latency_opt = 0;
    double speedup = 1.0;
    long long ff_base = 0, ff_opt = 0;
    PercentChange ff_change;
    long long lut_base = 0, lut_opt = 0;
    PercentChange lut_change;
    long long dsp_base = 0, dsp_opt = 0;
    std::optional<long long> ii_base;  // worst II over pipelined loops; empty if none is pipelined
    std::optional<long long> ii_opt;
    double wns_base = 0.0;
    double wns_opt = 0.0;

    bool operator==(const QoRDelta&) const = default;
};

std::optional<long long> worst_ii(const QoRReport& qor);

QoRDelta make_delta(std::string benchmark_id, const FpgaTarget& target, const QoRReport& base, const QoRReport& opt);

// ---------------------------------------------------------------------------
// Tables

enum class TableFormat { csv, markdown };
enum class TableKind { ff_usage, lut_usage, loop_ii, slack, speedup, full };

inline constexpr TableKind kAllTables[] = {TableKind::ff_usage, TableKind::lut_usage, TableKind::loop_ii,
                                           TableKind::slack,    TableKind::speedup,   TableKind::full};

std::string to_string(TableKind kind);  // file stem, e.g. "ff_usage"
TableFormat table_format_from_string(std::string_view s);

// Rows sorted by (benchmark, part). The full table prints every field at
// round-trip precision.
std::string emit_table(std::vector<QoRDelta> deltas, TableKind kind, TableFormat format);
std::string emit_tables(const std::vector<QoRDelta>& deltas, TableFormat format);

// Lossless JSON form of a delta list (written by the matrix, read back by
// `report render`).
std::string deltas_json(const std::vector<QoRDelta>& deltas);
std::vector<QoRDelta> deltas_from_json(std::string_view text);  // throws ConfigError

struct FamilySuccess {
    std::string family;
    std::size_t attempted = 0;
    std::size_t converged = 0;
    double success_pct = 0.0;  // 1 dp

    bool operator==(const FamilySuccess&) const = default;
};

// Families sorted by name; families without attempts do not appear.
std::vector<FamilySuccess> emit_success_matrix(const std::vector<RunState>& states);
std::string success_matrix_csv(const std::vector<FamilySuccess>& rows);

// ---------------------------------------------------------------------------
// Benchmark x device matrix

using BackendFactory =
    std::function<std::unique_ptr<GenerationBackend>(const BenchmarkDescriptor&, const FpgaTarget&)>;
using ToolchainFactory = std::function<std::unique_ptr<Toolchain>(const BenchmarkDescriptor&, const FpgaTarget&)>;

struct MatrixOptions {
    RefinementConfig refinement;
    std::size_t jobs = 1;
    std::filesystem::path archive_root;  // empty: no per-run archives
};

struct MatrixCell {
    std::string benchmark_id;
    FpgaTarget target;
    RunState state;
    std::optional<QoRReport> base_qor;
    std::optional<QoRReport> opt_qor;
    std::optional<std::string> error;  // abort reason or setup failure
};

struct MatrixResult {
    std::vector<MatrixCell> cells;  // benchmark-major, corpus and target order
    std::vector<QoRDelta> deltas;   // converged cells with a baseline
    std::vector<FamilySuccess> success;
};

// Each cell runs the refinement loop with its own backend and toolchain and
// never takes the others down. Output does not depend on `jobs`.
MatrixResult run_matrix(const std::vector<BenchmarkDescriptor>& corpus, const std::vector<FpgaTarget>& targets,
                        const KbIndex& kb, const BackendFactory& backends, const ToolchainFactory& toolchains,
                        const MatrixOptions& options);

// tables/<kind>.{csv,md}, deltas.json, success_matrix.csv, cells.csv and plotdata/*.csv
// under `results_root`.
void write_results(const MatrixResult& result, const std::filesystem::path& results_root);

}  // namespace timelyhls
