#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "timelyhls/kb.hpp"
#include "timelyhls/reports.hpp"
#include "timelyhls/toolchain.hpp"

namespace timelyhls {

struct LoopChoice {
    std::string label;
    bool pipeline = false;  // PIPELINE II=1 when set
    long long unroll_factor = 1;

    bool operator==(const LoopChoice&) const = default;
};

struct ArrayChoice {
    std::string name;
    long long partition_factor = 1;  // == elements means complete

    bool operator==(const ArrayChoice&) const = default;
};

struct PragmaConfig {
    std::vector<LoopChoice> loops;    // model order
    std::vector<ArrayChoice> arrays;  // model order

    bool operator==(const PragmaConfig&) const = default;
};

// Powers of two that divide the trip count, then the trip count itself.
std::vector<long long> unroll_ladder(long long trip_count);
// 1, 2, 4, ... below the element count, then the element count (complete).
std::vector<long long> partition_ladder(long long elements);

/// One mutable knob of a PragmaConfig and the values it may take, in ladder
/// order. Pipeline knobs take {0, 1}.
struct Dimension {
    enum class Kind { pipeline, unroll, partition };
    Kind kind = Kind::pipeline;
    std::size_t index = 0;  // into PragmaConfig::loops or ::arrays
    std::vector<long long> options;
};

struct ConfigSpace {
    std::vector<Dimension> dims;
    PragmaConfig origin;  // every knob at its first option

    // Product of option counts, saturating at SIZE_MAX.
    std::size_t size() const;
};

// Every loop gets a pipeline and an unroll knob, every array a partition knob.
ConfigSpace full_space(const KernelModel& model);

// Keeps knobs in model order (loops before arrays) while the product stays
// within `max_points`; the rest stay fixed at their first option.
ConfigSpace restrict_space(const ConfigSpace& space, std::size_t max_points);

long long get(const PragmaConfig& cfg, const Dimension& d);
void set(PragmaConfig& cfg, const Dimension& d, long long value);

// Model with the config's pragmas in place of whatever the model carried.
KernelModel apply_config(const KernelModel& model, const PragmaConfig& cfg);

struct AnnealSchedule {
    double t0 = 1.0;
    double alpha = 0.95;
    std::size_t steps = 500;
    std::uint64_t seed = 0;
};

void validate(const AnnealSchedule& schedule);  // throws ConfigError

inline constexpr double kConstraintPenalty = 1e6;

// Latency plus one penalty per violated constraint (negative WNS, each
// overflowing resource). `clock_ns` is accepted for symmetry with the
// simulator; the QoR already carries its slack.
double objective(const QoRReport& qor, double clock_ns = 0.0);

// Changes exactly one knob: flips a pipeline flag or moves a factor one rung
// along its ladder. Knobs with a single option are never picked.
PragmaConfig neighbor(const PragmaConfig& cfg, const ConfigSpace& space, std::mt19937_64& rng);

struct TracePoint {
    std::size_t step = 0;
    double objective = 0.0;  // current state after the step
    double best = 0.0;       // best seen so far

    bool operator==(const TracePoint&) const = default;
};

struct AnnealResult {
    PragmaConfig best;
    QoRReport best_qor;
    double best_objective = 0.0;
    std::vector<TracePoint> trace;  // step 0 is the starting point
};

/// Metropolis search from the space origin with acceptance exp(-d / t) and
/// t <- t * alpha after every step, d being the objective increase.
/// Deterministic for a given seed.
AnnealResult anneal(const KernelModel& model, const FpgaTarget& target, const AnnealSchedule& schedule,
                    const ConfigSpace& space, double clock_ns = 0.0);
AnnealResult anneal(const KernelModel& model, const FpgaTarget& target, const AnnealSchedule& schedule,
                    double clock_ns = 0.0);

struct ExhaustiveResult {
    PragmaConfig best;  // first optimum in enumeration order
    double best_objective = 0.0;
    std::size_t evaluated = 0;
};

// Enumerates the whole space; throws ContractError above `limit` points.
ExhaustiveResult brute_force(const KernelModel& model, const FpgaTarget& target, const ConfigSpace& space,
                             double clock_ns = 0.0, std::size_t limit = 1u << 20);

std::string anneal_result_json(const AnnealResult& result, const std::string& benchmark_id, const FpgaTarget& target,
                               const AnnealSchedule& schedule);

}  // namespace timelyhls
