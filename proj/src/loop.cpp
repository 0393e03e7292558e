#include "timelyhls/loop.hpp"

#include <algorithm>

#include <json.hpp>

#include "util.hpp"

namespace timelyhls {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::vector<KeywordRule> default_keyword_rules() {
    return {
        {"mismatch", FailureKind::functional_mismatch},
        {"overflow", FailureKind::resource_overflow},
        {"cannot bind", FailureKind::resource_binding},
        {"II =", FailureKind::pipeline_violation},
        {"failed to meet", FailureKind::timing_violation},
        {"Critical path", FailureKind::critical_path},
        {"error:", FailureKind::syntax_error},
        {"ERROR:", FailureKind::syntax_error},
    };
}

void validate(const RefinementConfig& cfg) {
    if (cfg.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (cfg.log_excerpt_lines < 1) throw ConfigError("log_excerpt_lines must be >= 1");
    if (cfg.clock_ns < 0) throw ConfigError("clock_ns must be >= 0");
    for (const auto& r : cfg.keyword_rules)
        if (r.needle.empty()) throw ConfigError("keyword rule with empty needle");
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::continuing: return "continue";
    case Verdict::budget_exhausted: return "budget_exhausted";
    }
    return "continue";
}

Verdict verdict_from_string(std::string_view s) {
    for (auto v : {Verdict::converged, Verdict::continuing, Verdict::budget_exhausted})
        if (to_string(v) == s) return v;
    throw ConfigError("unknown verdict '" + std::string(s) + "'");
}

Verdict evaluate_convergence(const PhaseOutcomes& outcomes) {
    for (Phase p : kStageOrder) {
        auto it = outcomes.find(p);
        if (it == outcomes.end() || !it->second.ok) return Verdict::continuing;
    }
    for (Phase p : {Phase::hls_synth, Phase::rtl_synth}) {
        const auto& qor = outcomes.at(p).qor;
        if (!qor || !qor->resources.overflow.empty()) return Verdict::continuing;
    }
    return outcomes.at(Phase::rtl_synth).qor->timing.wns_ns >= 0 ? Verdict::converged : Verdict::continuing;
}

FeedbackDigest build_digest(const SynthesisOutcome& outcome, const RefinementConfig& cfg) {
    FeedbackDigest d;
    d.origin = outcome.phase == Phase::hls_synth || outcome.phase == Phase::c_sim ? DigestOrigin::hls_stage
                                                                                  : DigestOrigin::rtl_stage;
    std::map<FailureKind, std::vector<std::string>> buckets;
    const auto lines = split_lines(outcome.log);
    for (const auto& line : lines) {
        for (const auto& rule : cfg.keyword_rules) {
            if (line.find(rule.needle) != std::string::npos) {
                buckets[rule.kind].push_back(line);
                break;
            }
        }
    }
    if (outcome.qor) {
        const auto& q = *outcome.qor;
        if (q.timing.wns_ns < 0 && !buckets.count(FailureKind::timing_violation))
            buckets[FailureKind::timing_violation].push_back(
                "Timing not met: WNS(ns) = " + format_fixed(q.timing.wns_ns, 2) + ", TNS(ns) = " +
                format_fixed(q.timing.tns_ns, 2) + " at clock " + format_fixed(q.timing.clock_ns, 2) + " ns");
        if (!q.resources.overflow.empty() && !buckets.count(FailureKind::resource_overflow)) {
            std::vector<std::string> names(q.resources.overflow.begin(), q.resources.overflow.end());
            buckets[FailureKind::resource_overflow].push_back("Resource overflow flagged: " + join(names, ", "));
        }
    }
    if (buckets.empty()) {
        std::vector<std::string> tail(lines.end() - static_cast<std::ptrdiff_t>(std::min(lines.size(), cfg.log_excerpt_lines)),
                                      lines.end());
        if (tail.empty()) tail.push_back(to_string(outcome.phase) + " failed without log output");
        buckets[FailureKind::syntax_error] = std::move(tail);
    }
    for (auto& [kind, matched] : buckets) {
        const std::size_t keep = std::min(matched.size(), cfg.log_excerpt_lines);
        std::vector<std::string> last(matched.end() - static_cast<std::ptrdiff_t>(keep), matched.end());
        d.categories.push_back({kind, join(last, "\n")});
    }
    return d;
}

// ---------------------------------------------------------------------------
// Archive

namespace {

ojson digest_json(const FeedbackDigest& d) {
    ojson j;
    j["origin"] = to_string(d.origin);
    auto& cats = j["categories"] = ojson::array();
    for (const auto& c : d.categories) cats.push_back({{"kind", to_string(c.kind)}, {"excerpt", c.excerpt}});
    return j;
}

ojson outcome_json(const SynthesisOutcome& o) {
    ojson j;
    j["ok"] = o.ok;
    j["qor"] = o.qor ? ojson::parse(canonical_json(*o.qor)) : ojson(nullptr);
    return j;
}

ojson iteration_json(const IterationRecord& it) {
    ojson j;
    j["index"] = it.index;
    j["stage"] = to_string(it.prompt.stage);
    j["context_docs"] = it.prompt.context_docs;
    j["verdict"] = to_string(it.verdict);
    auto& phases = j["phases"] = ojson::object();
    for (Phase p : kStageOrder) {
        auto found = it.outcomes.find(p);
        if (found != it.outcomes.end()) phases[to_string(p)] = outcome_json(found->second);
    }
    j["digest"] = it.digest ? digest_json(*it.digest) : ojson(nullptr);
    return j;
}

std::string phase_logs(const IterationRecord& it) {
    std::string out;
    for (Phase p : kStageOrder) {
        auto found = it.outcomes.find(p);
        if (found == it.outcomes.end()) continue;
        out += "==== " + to_string(p) + (found->second.ok ? " (ok)" : " (failed)") + " ====\n" + found->second.log;
        if (!out.empty() && out.back() != '\n') out += "\n";
    }
    return out;
}

fs::path iteration_dir(const fs::path& run_dir, int index) { return run_dir / ("iter_" + std::to_string(index)); }

void persist_iteration(const fs::path& run_dir, const IterationRecord& it) {
    if (run_dir.empty()) return;
    const fs::path dir = iteration_dir(run_dir, it.index);
    write_file(dir / "response.txt", it.raw_response);
    std::string kernel = it.generated_source;
    if (!kernel.empty() && kernel.back() != '\n') kernel += '\n';
    write_file(dir / "kernel.cpp", kernel);
    for (const auto& [phase, outcome] : it.outcomes)
        if (outcome.qor) canonical_save(*outcome.qor, dir / ("qor_" + to_string(phase) + ".json"));
    write_file(dir / "log.txt", phase_logs(it));
    if (it.digest) write_file(dir / "digest.json", digest_json(*it.digest).dump(2) + "\n");
    write_file(dir / "verdict.txt", to_string(it.verdict) + "\n");
}

void persist_state(const fs::path& run_dir, const RunState& state) {
    if (!run_dir.empty()) write_file(run_dir / "state.json", run_state_json(state));
}

}  // namespace

std::string run_state_json(const RunState& s) {
    ojson j;
    j["benchmark_id"] = s.benchmark_id;
    j["part"] = s.target.part;
    j["family"] = s.target.family;
    j["final_verdict"] = to_string(s.final_verdict);
    j["aborted"] = s.abort_reason ? ojson(*s.abort_reason) : ojson(nullptr);
    auto& iters = j["iterations"] = ojson::array();
    for (const auto& it : s.iterations) iters.push_back(iteration_json(it));
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Refinement loop

namespace {

bool stage_a_failed(const SynthesisOutcome& o) {
    return !o.ok || (o.phase == Phase::hls_synth && (!o.qor || !o.qor->resources.overflow.empty()));
}

bool stage_b_failed(const SynthesisOutcome& o) {
    return !o.ok || (o.phase == Phase::rtl_synth &&
                     (!o.qor || o.qor->timing.wns_ns < 0 || !o.qor->resources.overflow.empty()));
}

}  // namespace

RunState run_refinement(const KernelTask& task, const FpgaTarget& target, const RefinementConfig& cfg,
                        const KbIndex& kb, GenerationBackend& backend, Toolchain& toolchain,
                        const fs::path& archive_root) {
    validate(cfg);
    const double clock = cfg.clock_ns > 0 ? cfg.clock_ns : target.default_clock_ns;
    const fs::path run_dir = archive_root.empty() ? fs::path{} : archive_root / task.benchmark_id / target.part;
    if (!run_dir.empty()) fs::remove_all(run_dir);

    RunState state;
    state.benchmark_id = task.benchmark_id;
    state.target = target;

    auto abort = [&](const std::string& why) -> RunAborted {
        state.abort_reason = why;
        if (!state.iterations.empty()) persist_iteration(run_dir, state.iterations.back());
        persist_state(run_dir, state);
        return RunAborted(why, state);
    };

    for (int n = 1; n <= cfg.max_iterations; ++n) {
        IterationRecord it;
        it.index = n;
        if (n == 1) {
            std::vector<KnowledgeDoc> docs;
            if (cfg.k_docs > 0)
                docs = retrieve(kb, task.objective + " " + task.challenge + " " + target.family, target, cfg.k_docs);
            it.prompt = build_initial_prompt(make_source_unit(task.source, "kernel.cpp"), task.objective, target, docs,
                                             clock);
        } else {
            const auto& prev = state.iterations.back();
            const std::string& prev_code = prev.generated_source.empty() ? prev.raw_response : prev.generated_source;
            it.prompt = build_feedback_prompt(prev.prompt, prev_code, *prev.digest);
        }
        if (!run_dir.empty()) write_file(iteration_dir(run_dir, n) / "prompt.txt", render_prompt(it.prompt));
        state.iterations.push_back(it);
        IterationRecord& cur = state.iterations.back();

        try {
            GenerationResult gen = backend.generate(cur.prompt);
            cur.raw_response = std::move(gen.raw);
            cur.generated_source = std::move(gen.code);
        } catch (const ExtractionError& e) {
            cur.digest = FeedbackDigest{DigestOrigin::hls_stage,
                                        {{FailureKind::syntax_error,
                                          std::string("error: response did not contain a usable kernel: ") + e.what()}}};
        } catch (const ScriptExhausted& e) {
            throw abort(std::string("ScriptExhausted: ") + e.what());
        } catch (const BackendError& e) {
            throw abort(std::string("BackendError: ") + e.what());
        }

        if (!cur.digest) {
            KernelJob job{task.benchmark_id, task.top_function, cur.generated_source, task.testbench, target, clock,
                          run_dir.empty() ? fs::path{} : iteration_dir(run_dir, n) / "work"};
            try {
                for (Phase p : {Phase::hls_synth, Phase::c_sim}) {
                    auto& o = cur.outcomes[p] = toolchain.run(p, job);
                    if (stage_a_failed(o)) {
                        cur.digest = build_digest(o, cfg);
                        break;
                    }
                }
                if (!cur.digest) {
                    for (Phase p : {Phase::rtl_synth, Phase::rtl_sim}) {
                        auto& o = cur.outcomes[p] = toolchain.run(p, job);
                        if (stage_b_failed(o)) {
                            cur.digest = build_digest(o, cfg);
                            break;
                        }
                    }
                }
            } catch (const ToolMissing& e) {
                throw abort(std::string("ToolMissing: ") + e.what());
            } catch (const ToolTimeout& e) {
                throw abort(std::string("ToolTimeout: ") + e.what());
            }
        }

        cur.verdict = evaluate_convergence(cur.outcomes);
        if (cur.verdict == Verdict::continuing && n == cfg.max_iterations) cur.verdict = Verdict::budget_exhausted;
        state.final_verdict = cur.verdict;
        persist_iteration(run_dir, cur);
        persist_state(run_dir, state);
        if (cur.verdict != Verdict::continuing) break;
    }
    return state;
}

}  // namespace timelyhls
