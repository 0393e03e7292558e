#pragma once

// Random valid QoRReport generator for property tests.

#include <random>
#include <string>

#include "timelyhls/reports.hpp"

namespace test_gen {

inline timelyhls::QoRReport random_qor(std::mt19937& rng) {
    using namespace timelyhls;
    std::uniform_real_distribution<double> slack(-5.0, 5.0);
    std::uniform_int_distribution<long long> count(0, 5'000'000);
    QoRReport r;
    r.latency_cycles = count(rng);
    r.timing.wns_ns = rng() % 10 == 0 ? 0.0 : slack(rng);
    r.timing.tns_ns = -std::abs(slack(rng)) * static_cast<double>(rng() % 3);
    r.timing.clock_ns = std::uniform_real_distribution<double>(0.5, 20.0)(rng);
    r.timing.met = r.timing.wns_ns >= 0;
    r.resources.ff = count(rng);
    r.resources.lut = count(rng);
    r.resources.dsp = count(rng) % 10000;
    r.resources.bram = count(rng) % 5000;
    for (const char* name : {"ff", "lut", "dsp", "bram"})
        if (rng() % 4 == 0) r.resources.overflow.insert(name);
    for (int i = 0, n = static_cast<int>(rng() % 5); i < n; ++i) {
        LoopMetric loop;
        loop.loop_label = "loop_" + std::to_string(i) + "_" + std::to_string(rng() % 100);
        loop.pipelined = rng() % 2 == 0;
        if (loop.pipelined) loop.ii = 1 + static_cast<long long>(rng() % 32);
        loop.depth = static_cast<long long>(rng() % 2000);
        r.loops.push_back(loop);
    }
    r.source_phase = static_cast<QoRPhase>(rng() % 3);
    return r;
}

}  // namespace test_gen
