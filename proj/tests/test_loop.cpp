#include <doctest.h>

#include <random>

#include <json.hpp>

#include "test_support.hpp"
#include "timelyhls/errors.hpp"
#include "timelyhls/loop.hpp"

using namespace timelyhls;
using testing_support::slurp;
using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

const char* kKernel = R"(void mac(int a[64], int b[64], int out[1]) {
    int acc = 0;
MAC:
    for (int i = 0; i < 64; i++) {
        acc += a[i] * b[i];
    }
    out[0] = acc;
}
)";

const char* kPipelined = R"(void mac(int a[64], int b[64], int out[1]) {
    int acc = 0;
MAC:
    for (int i = 0; i < 64; i++) {
#pragma HLS PIPELINE II=1
        acc += a[i] * b[i];
    }
    out[0] = acc;
}
)";

KernelModel mac_model() {
    KernelModel m;
    LoopDescriptor l;
    l.label = "MAC";
    l.trip_count = 64;
    l.ops = {1, 1, 2, 0};
    m.loops.push_back(l);
    m.arrays.push_back({"a", 64, 1, 1, "MAC"});
    m.arrays.push_back({"b", 64, 1, 1, "MAC"});
    return m;
}

// Six logic levels miss a 0.46 ns clock by 0.08 ns; four meet it with 0.10 ns.
FpgaTarget scenario_target() {
    FpgaTarget t;
    t.family = "Artix-7";
    t.part = "xc7a200tfbg676-2";
    t.luts = 134600;
    t.ffs = 269200;
    t.dsps = 740;
    t.brams = 730;
    t.default_clock_ns = 0.46;
    t.logic_delay_ns = 0.09;
    t.tier = DeviceTier::low_cost;
    return t;
}

KernelTask mac_task() {
    return {"mac", "mac", kKernel, "int main() { return 0; }\n", "Minimize latency under timing closure.",
            "Loop-carried accumulation"};
}

const KbIndex& bundled_kb() {
    static const KbIndex index = ingest(testing_support::data_dir() / "kb").index;
    return index;
}

std::string fence(const std::string& code) { return "Here you go:\n```cpp\n" + code + "```\n"; }

RunState run(const std::vector<ScriptEntry>& script, const fs::path& archive, RefinementConfig cfg = {}) {
    ScriptedBackend backend(script);
    SimulatedToolchain tc(mac_model(), kKernel);
    return run_refinement(mac_task(), scenario_target(), cfg, bundled_kb(), backend, tc, archive);
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
    return out;
}

SynthesisOutcome synth(Phase p, bool ok, double wns, std::set<std::string> overflow = {}) {
    SynthesisOutcome o;
    o.phase = p;
    o.ok = ok;
    if (!ok) o.log = "ERROR: failed";
    if (ok) {
        QoRReport q;
        q.timing.wns_ns = wns;
        q.timing.met = wns >= 0;
        q.resources.overflow = std::move(overflow);
        o.qor = q;
    }
    return o;
}

SynthesisOutcome functional(Phase p, bool ok) {
    SynthesisOutcome o;
    o.phase = p;
    o.ok = ok;
    o.log = ok ? "pass" : "mismatch";
    return o;
}

}  // namespace

TEST_CASE("two-response scenario converges at iteration 2") {
    TempDir dir;
    const auto state = run({{"initial", fence(kKernel)}, {"rtl_repair", fence(kPipelined)}}, dir.path());
    REQUIRE(state.iterations.size() == 2);
    CHECK(state.final_verdict == Verdict::converged);

    const auto& first = state.iterations[0];
    CHECK(first.verdict == Verdict::continuing);
    CHECK(first.outcomes.at(Phase::rtl_synth).qor->timing.wns_ns == -0.08);
    CHECK_FALSE(first.outcomes.count(Phase::rtl_sim));
    REQUIRE(first.digest);
    CHECK(first.digest->origin == DigestOrigin::rtl_stage);
    CHECK(state.iterations[1].prompt.stage == PromptStage::rtl_repair);
    CHECK(state.iterations[1].prompt.user.find("-0.08") != std::string::npos);
    CHECK(state.iterations[1].outcomes.at(Phase::rtl_synth).qor->timing.wns_ns == 0.1);
    CHECK_FALSE(state.iterations[1].digest);

    const fs::path run_dir = dir / "mac/xc7a200tfbg676-2";
    for (const char* f : {"prompt.txt", "kernel.cpp", "log.txt", "verdict.txt", "digest.json", "qor_hls_synth.json",
                          "qor_rtl_synth.json"})
        CHECK(fs::exists(run_dir / "iter_1" / f));
    CHECK(fs::exists(run_dir / "iter_2/qor_rtl_synth.json"));
    CHECK_FALSE(fs::exists(run_dir / "iter_2/digest.json"));
    CHECK_FALSE(fs::exists(run_dir / "iter_3"));
    CHECK(slurp(run_dir / "iter_2/verdict.txt") == "converged\n");
    CHECK(slurp(run_dir / "iter_2/kernel.cpp") == kPipelined);

    const auto j = nlohmann::json::parse(slurp(run_dir / "state.json"));
    CHECK(j["final_verdict"] == "converged");
    CHECK(j["iterations"].size() == 2);
    // Convergence is checkable from the persisted outcomes alone.
    const auto& last = j["iterations"][1]["phases"];
    CHECK(last["c_sim"]["ok"] == true);
    CHECK(last["rtl_sim"]["ok"] == true);
    CHECK(last["rtl_synth"]["qor"]["timing"]["wns_ns"].get<double>() >= 0);
}

TEST_CASE("always-failing script exhausts the budget") {
    TempDir dir;
    std::vector<ScriptEntry> script;
    for (int i = 0; i < 12; ++i) script.push_back({"*", fence("void mac(int a[64] {\n")});
    const auto state = run(script, dir.path());
    CHECK(state.iterations.size() == 10);
    CHECK(state.final_verdict == Verdict::budget_exhausted);
    CHECK(state.iterations.back().verdict == Verdict::budget_exhausted);
    for (std::size_t i = 0; i + 1 < state.iterations.size(); ++i) {
        CHECK(state.iterations[i].verdict == Verdict::continuing);
        CHECK(state.iterations[i].index == static_cast<int>(i) + 1);
        REQUIRE(state.iterations[i].digest);
        CHECK(state.iterations[i].digest->categories.at(0).kind == FailureKind::syntax_error);
    }
    CHECK(fs::exists(dir / "mac/xc7a200tfbg676-2/iter_10/verdict.txt"));
    CHECK_FALSE(fs::exists(dir / "mac/xc7a200tfbg676-2/iter_11"));

    RefinementConfig small;
    small.max_iterations = 3;
    CHECK(run(script, {}, small).iterations.size() == 3);
}

TEST_CASE("first response passing converges immediately") {
    const auto state = run({{"initial", fence(kPipelined)}}, {});
    REQUIRE(state.iterations.size() == 1);
    CHECK(state.final_verdict == Verdict::converged);
    CHECK_FALSE(state.iterations[0].digest);
    CHECK(state.iterations[0].outcomes.size() == 4);
}

TEST_CASE("responses without code become syntax feedback") {
    const auto state = run({{"initial", "I cannot help with that."}, {"hls_repair", fence(kPipelined)}}, {});
    REQUIRE(state.iterations.size() == 2);
    CHECK(state.iterations[0].outcomes.empty());
    CHECK(state.iterations[0].digest->categories.at(0).kind == FailureKind::syntax_error);
    CHECK(state.final_verdict == Verdict::converged);
}

TEST_CASE("functional edits are reported as mismatches") {
    std::string changed = kPipelined;
    changed.replace(changed.find("a[i] * b[i]"), 11, "a[i] + b[i]");
    const auto state = run({{"initial", fence(changed)}, {"hls_repair", fence(kPipelined)}}, {});
    REQUIRE(state.iterations.size() == 2);
    const auto& d = *state.iterations[0].digest;
    CHECK(d.origin == DigestOrigin::hls_stage);
    CHECK(d.categories.at(0).kind == FailureKind::functional_mismatch);
    CHECK(state.iterations[1].prompt.user.find("### FUNCTIONAL MISMATCH") != std::string::npos);
}

TEST_CASE("backend exhaustion aborts with the partial state persisted") {
    TempDir dir;
    try {
        run({{"initial", fence(kKernel)}}, dir.path());
        FAIL("expected RunAborted");
    } catch (const RunAborted& e) {
        CHECK(e.state().iterations.size() == 2);
        CHECK(e.state().abort_reason->rfind("ScriptExhausted", 0) == 0);
    }
    const fs::path run_dir = dir / "mac/xc7a200tfbg676-2";
    CHECK(fs::is_directory(run_dir / "iter_1"));
    CHECK(fs::is_directory(run_dir / "iter_2"));
    CHECK(fs::exists(run_dir / "iter_2/prompt.txt"));
    const auto j = nlohmann::json::parse(slurp(run_dir / "state.json"));
    CHECK(j["aborted"].is_string());
    CHECK(j["iterations"].size() == 2);
}

TEST_CASE("tool failures abort the run") {
    struct Missing : Toolchain {
        SynthesisOutcome run(Phase, const KernelJob&) override { throw ToolMissing("vitis_hls not found"); }
        std::string name() const override { return "missing"; }
    } tc;
    ScriptedBackend backend({{"initial", fence(kKernel)}});
    CHECK_THROWS_AS(run_refinement(mac_task(), scenario_target(), {}, bundled_kb(), backend, tc), RunAborted);
}

TEST_CASE("re-running a scenario reproduces the archive byte for byte") {
    TempDir a, b;
    const std::vector<ScriptEntry> script{{"initial", fence(kKernel)}, {"rtl_repair", fence(kPipelined)}};
    run(script, a.path());
    run(script, b.path());
    const auto ta = tree(a.path());
    CHECK(ta.size() > 10);
    CHECK(ta == tree(b.path()));
}

TEST_CASE("evaluate_convergence is the six-way conjunction") {
    PhaseOutcomes all{{Phase::hls_synth, synth(Phase::hls_synth, true, 1.0)},
                      {Phase::c_sim, functional(Phase::c_sim, true)},
                      {Phase::rtl_synth, synth(Phase::rtl_synth, true, 0.0)},
                      {Phase::rtl_sim, functional(Phase::rtl_sim, true)}};
    CHECK(evaluate_convergence(all) == Verdict::converged);
    auto neg = all;
    neg[Phase::rtl_synth] = synth(Phase::rtl_synth, true, -0.08);
    CHECK(evaluate_convergence(neg) == Verdict::continuing);
    auto csim = all;
    csim[Phase::c_sim] = functional(Phase::c_sim, false);
    CHECK(evaluate_convergence(csim) == Verdict::continuing);
    CHECK(evaluate_convergence({}) == Verdict::continuing);

    std::mt19937 rng(11);
    const double wns_values[] = {-1.0, -0.08, -0.01, 0.0, 0.1, 2.0};
    for (int i = 0; i < 5000; ++i) {
        const bool c = rng() % 4 != 0, r = rng() % 4 != 0, h = rng() % 4 != 0, s = rng() % 4 != 0;
        const bool ov = rng() % 4 == 0;
        const double wns = wns_values[rng() % 6];
        PhaseOutcomes o;
        o[Phase::hls_synth] = synth(Phase::hls_synth, h, 0.5, ov && rng() % 2 ? std::set<std::string>{"dsp"}
                                                                                 : std::set<std::string>{});
        const bool hls_overflow = h && !o[Phase::hls_synth].qor->resources.overflow.empty();
        const bool rtl_overflow = ov && !hls_overflow;
        o[Phase::c_sim] = functional(Phase::c_sim, c);
        o[Phase::rtl_synth] = synth(Phase::rtl_synth, s, wns, rtl_overflow ? std::set<std::string>{"lut"}
                                                                             : std::set<std::string>{});
        o[Phase::rtl_sim] = functional(Phase::rtl_sim, r);
        const bool any_overflow = hls_overflow || (s && rtl_overflow);
        const bool expect = c && r && h && s && wns >= 0 && !any_overflow;
        CHECK((evaluate_convergence(o) == Verdict::converged) == expect);
    }
}

TEST_CASE("build_digest classification") {
    RefinementConfig cfg;
    SynthesisOutcome o;
    o.phase = Phase::hls_synth;
    o.log = "INFO: start\nkernel.cpp:3: error: expected ';'\nkernel.cpp:9: error: unknown type\n"
            "note: here\nkernel.cpp:12: error: bad\n";
    auto d = build_digest(o, cfg);
    CHECK(d.origin == DigestOrigin::hls_stage);
    REQUIRE(d.categories.size() == 1);
    CHECK(d.categories[0].kind == FailureKind::syntax_error);
    CHECK(d.categories[0].excerpt ==
          "kernel.cpp:3: error: expected ';'\nkernel.cpp:9: error: unknown type\nkernel.cpp:12: error: bad");

    SynthesisOutcome ov = synth(Phase::rtl_synth, true, 0.5, {"dsp"});
    ov.log = "INFO: done\n";
    d = build_digest(ov, cfg);
    CHECK(d.origin == DigestOrigin::rtl_stage);
    REQUIRE(d.categories.size() == 1);
    CHECK(d.categories[0].kind == FailureKind::resource_overflow);

    SynthesisOutcome many;
    many.phase = Phase::c_sim;
    for (int i = 0; i < 500; ++i) many.log += "line " + std::to_string(i) + ": error: x\n";
    d = build_digest(many, cfg);
    REQUIRE(d.categories.size() == 1);
    const auto lines = std::count(d.categories[0].excerpt.begin(), d.categories[0].excerpt.end(), '\n') + 1;
    CHECK(lines == 40);
    CHECK(d.categories[0].excerpt.rfind("line 460: error: x", 0) == 0);

    SynthesisOutcome odd;
    odd.phase = Phase::rtl_sim;
    odd.log = "segmentation fault\ncore dumped\n";
    d = build_digest(odd, cfg);
    REQUIRE(d.categories.size() == 1);
    CHECK(d.categories[0].kind == FailureKind::syntax_error);
    CHECK(d.categories[0].excerpt == "segmentation fault\ncore dumped");

    SynthesisOutcome timing = synth(Phase::rtl_synth, true, -0.08);
    timing.log = "WNS(ns): -0.08\nCritical path: 6 logic levels\n";
    d = build_digest(timing, cfg);
    REQUIRE(d.categories.size() == 2);
    CHECK(d.categories[0].kind == FailureKind::timing_violation);
    CHECK(d.categories[0].excerpt.find("-0.08") != std::string::npos);
    CHECK(d.categories[1].kind == FailureKind::critical_path);
}
