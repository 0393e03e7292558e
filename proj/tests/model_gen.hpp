#pragma once

// Random valid KernelModel generator for simulator property tests. Trip
// counts and unroll factors are powers of two so unroll ladders divide evenly.

#include <random>
#include <string>

#include "timelyhls/toolchain.hpp"

namespace test_gen {

inline timelyhls::KernelModel random_model(std::mt19937& rng) {
    using namespace timelyhls;
    KernelModel m;
    m.datapath_bits = rng() % 3 == 0 ? 16 : 32;
    const int n = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
        LoopDescriptor l;
        l.label = "L" + std::to_string(i);
        l.trip_count = 1LL << (rng() % 8);
        if (i > 0 && rng() % 4 != 0) l.parent = "L" + std::to_string(rng() % i);
        l.ops = {static_cast<long long>(rng() % 3), static_cast<long long>(rng() % 5),
                 static_cast<long long>(rng() % 4), static_cast<long long>(rng() % 2)};
        l.carried_dependence_distance = rng() % 4 == 0 ? static_cast<long long>(rng() % 6) : 0;
        if (rng() % 3 == 0) l.applied.pipeline_ii = 1 + static_cast<long long>(rng() % 3);
        const long long max_shift = [&] { long long s = 0; while ((1LL << s) < l.trip_count) ++s; return s; }();
        l.applied.unroll_factor = 1LL << (rng() % (max_shift + 1));
        m.loops.push_back(l);
    }
    const int arrays = static_cast<int>(rng() % 4);
    for (int i = 0; i < arrays; ++i) {
        ArrayDescriptor a;
        a.name = "arr" + std::to_string(i);
        a.elements = 1 + static_cast<long long>(rng() % 4096);
        a.accesses_per_iteration = static_cast<long long>(rng() % 5);
        a.partition_factor = 1LL << (rng() % 4);
        a.loop = m.loops[rng() % m.loops.size()].label;
        m.arrays.push_back(a);
    }
    return m;
}

inline timelyhls::FpgaTarget random_target(std::mt19937& rng) {
    timelyhls::FpgaTarget t;
    t.family = "Test";
    t.part = "xtest-" + std::to_string(rng() % 1000);
    t.luts = 1000 + static_cast<long long>(rng() % 500000);
    t.ffs = 1000 + static_cast<long long>(rng() % 1000000);
    t.dsps = 10 + static_cast<long long>(rng() % 5000);
    t.brams = 10 + static_cast<long long>(rng() % 3000);
    t.default_clock_ns = 1.0 + static_cast<double>(rng() % 900) / 100.0;
    t.logic_delay_ns = 0.05 + static_cast<double>(rng() % 95) / 100.0;
    return t;
}

}  // namespace test_gen
