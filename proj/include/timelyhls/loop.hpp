#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "timelyhls/errors.hpp"
#include "timelyhls/kb.hpp"
#include "timelyhls/llm.hpp"
#include "timelyhls/toolchain.hpp"

namespace timelyhls {

struct KeywordRule {
    std::string needle;  // case-sensitive substring
    FailureKind kind = FailureKind::syntax_error;
};

// First matching rule classifies a log line.
std::vector<KeywordRule> default_keyword_rules();

struct RefinementConfig {
    int max_iterations = 10;
    std::size_t k_docs = 4;
    double clock_ns = 0.0;  // 0: the target's default clock
    std::size_t log_excerpt_lines = 40;
    std::vector<KeywordRule> keyword_rules = default_keyword_rules();
};

void validate(const RefinementConfig& cfg);  // throws ConfigError

enum class Verdict { converged, continuing, budget_exhausted };

std::string to_string(Verdict v);  // "converged", "continue", "budget_exhausted"
Verdict verdict_from_string(std::string_view s);

using PhaseOutcomes = std::map<Phase, SynthesisOutcome>;

// converged iff all four phases ran and passed, rtl_synth WNS >= 0, and no
// synthesis phase flagged a resource overflow. Otherwise `continuing`.
Verdict evaluate_convergence(const PhaseOutcomes& outcomes);

// Origin follows the outcome's phase. Lines are classified by the config's
// keyword rules; failing QoR (negative WNS, overflow) adds a line when the log
// did not already mention it. Each category keeps its last
// `log_excerpt_lines` lines. Nothing classifiable: one syntax_error entry
// with the log tail.
FeedbackDigest build_digest(const SynthesisOutcome& outcome, const RefinementConfig& cfg);

// What the loop needs to know about one benchmark.
struct KernelTask {
    std::string benchmark_id;
    std::string top_function;
    std::string source;
    std::string testbench;
    std::string objective;
    std::string challenge;  // also used as retrieval query text
};

struct IterationRecord {
    int index = 0;
    PromptBundle prompt;
    std::string raw_response;
    std::string generated_source;
    PhaseOutcomes outcomes;
    std::optional<FeedbackDigest> digest;
    Verdict verdict = Verdict::continuing;
};

struct RunState {
    std::string benchmark_id;
    FpgaTarget target;
    std::vector<IterationRecord> iterations;
    Verdict final_verdict = Verdict::continuing;
    std::optional<std::string> abort_reason;
};

std::string run_state_json(const RunState& state);

// Carries the partial state (already persisted) of a run stopped by a
// backend or tool error.
class RunAborted : public Error {
public:
    RunAborted(const std::string& what, RunState state) : Error(what), state_(std::move(state)) {}
    const RunState& state() const noexcept { return state_; }

private:
    RunState state_;
};

/// Generate, verify in two stages, feed back, repeat. With a non-empty
/// `archive_root`, iteration n lands in
/// `<archive_root>/<benchmark>/<part>/iter_<n>/` and `state.json` beside the
/// iteration directories is rewritten after every iteration. ScriptExhausted,
/// BackendError, ToolMissing and ToolTimeout stop the run with RunAborted.
RunState run_refinement(const KernelTask& task, const FpgaTarget& target, const RefinementConfig& cfg,
                        const KbIndex& kb, GenerationBackend& backend, Toolchain& toolchain,
                        const std::filesystem::path& archive_root = {});

}  // namespace timelyhls
