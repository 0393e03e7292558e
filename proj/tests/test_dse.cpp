#include <doctest.h>

#include <json.hpp>

#include "test_support.hpp"
#include "timelyhls/bench.hpp"
#include "timelyhls/dse.hpp"
#include "timelyhls/errors.hpp"

using namespace timelyhls;

namespace {

FpgaTarget toy_target() {
    FpgaTarget t;
    t.family = "Toy";
    t.part = "toy-1";
    t.luts = 100000;
    t.ffs = 200000;
    t.dsps = 500;
    t.brams = 100;
    t.default_clock_ns = 3.0;
    t.logic_delay_ns = 0.5;
    return t;
}

// One loop of 8 multiply-adds: 2 pipeline settings x 4 unroll rungs.
KernelModel toy_model() {
    KernelModel m;
    LoopDescriptor l;
    l.label = "L";
    l.trip_count = 8;
    l.ops = {1, 1, 0, 0};
    m.loops.push_back(l);
    return m;
}

std::size_t differing_fields(const PragmaConfig& a, const PragmaConfig& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.loops.size(); ++i)
        n += (a.loops[i].pipeline != b.loops[i].pipeline) + (a.loops[i].unroll_factor != b.loops[i].unroll_factor);
    for (std::size_t i = 0; i < a.arrays.size(); ++i) n += a.arrays[i].partition_factor != b.arrays[i].partition_factor;
    return n;
}

}  // namespace

TEST_CASE("factor ladders") {
    CHECK(unroll_ladder(64) == std::vector<long long>{1, 2, 4, 8, 16, 32, 64});
    CHECK(unroll_ladder(6) == std::vector<long long>{1, 2, 6});
    CHECK(unroll_ladder(127) == std::vector<long long>{1, 127});
    CHECK(unroll_ladder(1) == std::vector<long long>{1});
    CHECK(partition_ladder(9) == std::vector<long long>{1, 2, 4, 8, 9});
    CHECK(partition_ladder(16) == std::vector<long long>{1, 2, 4, 8, 16});
    CHECK(partition_ladder(1) == std::vector<long long>{1});
}

TEST_CASE("objective") {
    QoRReport q;
    q.latency_cycles = 19;
    q.timing.wns_ns = 0.1;
    CHECK(objective(q, 5.0) == 19.0);
    q.timing.wns_ns = -0.1;
    CHECK(objective(q, 5.0) == 1000019.0);
    q.resources.overflow = {"dsp", "lut"};
    CHECK(objective(q, 5.0) == 19.0 + 3e6);
}

TEST_CASE("neighbor changes exactly one knob") {
    const auto model = load_kernel_model(testing_support::data_dir() / "bench" / "models" / "viterbi.json");
    const auto space = full_space(model);
    std::mt19937_64 rng(1);
    PragmaConfig cur = space.origin;
    for (int i = 0; i < 2000; ++i) {
        const auto next = neighbor(cur, space, rng);
        CHECK(differing_fields(cur, next) == 1);
        cur = next;
    }

    std::mt19937_64 a(42), b(42);
    PragmaConfig ca = space.origin, cb = space.origin;
    for (int i = 0; i < 100; ++i) {
        ca = neighbor(ca, space, a);
        cb = neighbor(cb, space, b);
        CHECK(ca == cb);
    }

    // At the top rung the only move is down.
    ConfigSpace top;
    top.origin = space.origin;
    top.dims.push_back({Dimension::Kind::unroll, 0, {1, 2, 4, 16}});
    PragmaConfig at_top = space.origin;
    at_top.loops[0].unroll_factor = 16;
    for (int i = 0; i < 50; ++i) CHECK(neighbor(at_top, top, rng).loops[0].unroll_factor == 4);
    PragmaConfig at_bottom = space.origin;
    for (int i = 0; i < 50; ++i) CHECK(neighbor(at_bottom, top, rng).loops[0].unroll_factor == 2);
}

TEST_CASE("space restriction and exhaustive search") {
    const auto model = load_kernel_model(testing_support::data_dir() / "bench" / "models" / "matmul.json");
    const auto full = full_space(model);
    CHECK(full.size() > 256);
    const auto small = restrict_space(full, 256);
    CHECK(small.size() <= 256);
    CHECK(small.size() > 1);
    CHECK_THROWS_AS(brute_force(model, toy_target(), full, 0.0, 256), ContractError);
    const auto bf = brute_force(model, toy_target(), small);
    CHECK(bf.evaluated == small.size());

    KernelModel bad = model;
    PragmaConfig cfg = full.origin;
    cfg.loops[0].label = "ghost";
    CHECK_THROWS_AS(apply_config(bad, cfg), MappingError);
}

TEST_CASE("toy space: pipelining wins and the search finds it") {
    const auto model = toy_model();
    const auto target = toy_target();
    const auto space = full_space(model);
    REQUIRE(space.size() == 8);
    const auto bf = brute_force(model, target, space);
    REQUIRE(bf.best.loops.size() == 1);
    CHECK(bf.best.loops[0].pipeline);
    CHECK(bf.best_objective == 5.0);  // fully unrolled inside the pipeline: one body

    AnnealSchedule s;
    s.steps = 200;
    s.seed = 9;
    const auto r = anneal(model, target, s);
    CHECK(r.best.loops[0].pipeline);
    CHECK(r.best_objective == bf.best_objective);
    CHECK(r.best_qor.latency_cycles == 5);
}

TEST_CASE("anneal basics") {
    const auto model = load_kernel_model(testing_support::data_dir() / "bench" / "models" / "lms.json");
    const auto target = toy_target();
    const auto space = full_space(model);

    AnnealSchedule one;
    one.steps = 1;
    one.seed = 5;
    const auto r1 = anneal(model, target, one, space);
    REQUIRE(r1.trace.size() == 2);
    std::mt19937_64 rng(5);
    const auto nb = neighbor(space.origin, space, rng);
    const double o0 = objective(simulate(apply_config(model, space.origin), target, 3.0));
    const double o1 = objective(simulate(apply_config(model, nb), target, 3.0));
    CHECK(r1.best_objective == std::min(o0, o1));
    CHECK(r1.best == (o1 < o0 ? nb : space.origin));

    AnnealSchedule s;
    s.steps = 800;
    s.seed = 77;
    const auto a = anneal(model, target, s, space);
    const auto b = anneal(model, target, s, space);
    CHECK(a.best == b.best);
    CHECK(a.trace == b.trace);
    CHECK(a.trace.size() == 801);
    for (std::size_t i = 1; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].best <= a.trace[i - 1].best);
        CHECK(a.trace[i].best <= a.trace[i].objective);
    }
    CHECK(a.trace.back().best == a.best_objective);
    CHECK(objective(a.best_qor) == a.best_objective);

    AnnealSchedule bad;
    bad.alpha = 1.0;
    CHECK_THROWS_AS(anneal(model, target, bad), ConfigError);
    bad = {};
    bad.t0 = 0;
    CHECK_THROWS_AS(anneal(model, target, bad), ConfigError);
    bad = {};
    bad.steps = 0;
    CHECK_THROWS_AS(anneal(model, target, bad), ConfigError);

    const auto j = nlohmann::json::parse(anneal_result_json(a, "lms", target, s));
    CHECK(j["trace"].size() == 801);
    CHECK(j["best_qor"]["latency_cycles"] == a.best_qor.latency_cycles);
    CHECK(j["schedule"]["seed"] == 77);
}

TEST_CASE("annealing matches the exhaustive optimum on every corpus model") {
    const auto corpus = load_manifest(testing_support::data_dir() / "bench" / "manifest.json");
    const auto kb = ingest(testing_support::data_dir() / "kb");
    const auto& target = kb.target("xc7a200tfbg676-2");
    for (const auto& d : corpus) {
        CAPTURE(d.id);
        const auto model = load_kernel_model(d.model_path);
        const auto space = restrict_space(full_space(model), 256);
        const auto bf = brute_force(model, target, space);
        int hits = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            AnnealSchedule s;
            s.steps = 2000;
            s.seed = seed;
            hits += anneal(model, target, s, space).best_objective == bf.best_objective;
        }
        CHECK(hits >= 95);
    }
}
