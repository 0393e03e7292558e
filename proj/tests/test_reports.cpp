#include <doctest.h>

#include <random>

#include "qor_gen.hpp"
#include "test_support.hpp"
#include "timelyhls/errors.hpp"
#include "timelyhls/reports.hpp"

using namespace timelyhls;
using testing_support::TempDir;

TEST_CASE("golden vendor fixture parses exactly") {
    const auto text = testing_support::slurp(testing_support::fixture_dir() / "matmul_base_report.txt");
    auto r = parse_vendor_report(text, ExtractionProfile::vivado_default());
    CHECK(r.timing.wns_ns == -0.08);
    CHECK(r.timing.tns_ns == -0.24);
    CHECK(r.timing.clock_ns == 10.0);
    CHECK_FALSE(r.timing.met);
    CHECK(r.latency_cycles == 16531);
    CHECK(r.resources.ff == 579);
    CHECK(r.resources.lut == 1196);
    CHECK(r.resources.dsp == 3);
    CHECK(r.resources.bram == 2);
    CHECK(r.resources.overflow.empty());
    REQUIRE(r.loops.size() == 3);
    CHECK(r.loops[0].loop_label == "row");
    CHECK_FALSE(r.loops[0].pipelined);
    CHECK(r.loops[2].loop_label == "prod");
    CHECK(r.loops[2].ii == 16);
    CHECK(r.loops[2].depth == 18);
    CHECK(r.source_phase == QoRPhase::rtl_synth);
}

TEST_CASE("all-zero fixture is valid with timing met") {
    const auto text = testing_support::slurp(testing_support::fixture_dir() / "zero_report.txt");
    auto r = parse_vendor_report(text, ExtractionProfile::vivado_default());
    CHECK(r.timing.wns_ns == 0.0);
    CHECK(r.timing.met);
    CHECK(r.latency_cycles == 0);
    CHECK(r.loops.empty());
}

TEST_CASE("vendor parse errors name the field") {
    const auto profile = ExtractionProfile::vivado_default();
    try {
        parse_vendor_report("", profile);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.token() == "wns");
    }
    try {
        parse_vendor_report("WNS(ns): abc\n", profile);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.token() == "wns");
    }
    try {
        parse_vendor_report("WNS(ns): 0.1\nTNS(ns): 0\n", profile);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.token() == "latency");
    }
}

TEST_CASE("shipped default profile matches the built-in one") {
    auto shipped = ExtractionProfile::load(testing_support::data_dir() / "profiles/vivado_default.json");
    CHECK(shipped.patterns == ExtractionProfile::vivado_default().patterns);
}

TEST_CASE("profiles are user-overridable data") {
    ExtractionProfile p;
    p.patterns = {{"wns", R"(slack=(\S+))"}, {"tns", R"(total=(\S+))"}, {"latency", R"(cycles=(\S+))"},
                  {"ff", R"(ff=(\S+))"},      {"lut", R"(lut=(\S+))"},    {"dsp", R"(dsp=(\S+))"},
                  {"bram", R"(bram=(\S+))"}};
    auto r = parse_vendor_report("slack=0.1 total=0 cycles=4277 ff=247 lut=619 dsp=160 bram=4", p);
    CHECK(r.timing.wns_ns == 0.1);
    CHECK(r.latency_cycles == 4277);
    CHECK(r.resources.dsp == 160);
    CHECK(r.timing.clock_ns == 0.0);
}

TEST_CASE("canonical save/load round trips random reports") {
    TempDir tmp;
    std::mt19937 rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const auto r = test_gen::random_qor(rng);
        const auto path = tmp / "qor.json";
        canonical_save(r, path);
        const auto back = canonical_load(path);
        CHECK(back == r);
        CHECK(canonical_json(back) == testing_support::slurp(path));
    }
}

TEST_CASE("canonical load rules") {
    std::mt19937 rng(3);
    auto r = test_gen::random_qor(rng);
    auto text = canonical_json(r);

    SUBCASE("unknown key is ignored with a warning") {
        auto patched = text;
        patched.insert(patched.find('{') + 1, "\n  \"producer\": \"vivado\",");
        std::vector<std::string> warnings;
        CHECK(canonical_from_json(patched, &warnings) == r);
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("producer") != std::string::npos);
    }
    SUBCASE("missing timing") {
        CHECK_THROWS_AS(canonical_from_json(R"({"schema_version":1,"source_phase":"simulated","latency_cycles":1,
            "resources":{"ff":0,"lut":0,"dsp":0,"bram":0,"overflow":[]},"loops":[]})"),
                        VersionError);
    }
    SUBCASE("wrong schema version") {
        auto patched = text;
        patched.replace(patched.find("\"schema_version\": 1"), 19, "\"schema_version\": 2");
        CHECK_THROWS_AS(canonical_from_json(patched), VersionError);
    }
    SUBCASE("met is recomputed from wns") {
        CHECK(canonical_from_json(R"({"schema_version":1,"source_phase":"simulated","latency_cycles":1,
            "timing":{"wns_ns":-0.08,"tns_ns":-0.08,"clock_ns":1,"met":true},
            "resources":{"ff":0,"lut":0,"dsp":0,"bram":0,"overflow":[]},"loops":[]})")
                  .timing.met == false);
    }
}
