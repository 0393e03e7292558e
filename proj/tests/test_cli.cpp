#include <doctest.h>

#include <map>
#include <sstream>

#include <json.hpp>

#include "test_support.hpp"
#include "timelyhls/cli.hpp"
#include "timelyhls/errors.hpp"

using namespace timelyhls;
using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "timelyhls");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// Config pointing at the bundled data with results under `dir`.
std::string write_config(const TempDir& dir, const std::string& script_path = {}, const std::string& manifest = {}) {
    const fs::path data = testing_support::data_dir();
    nlohmann::json j = {
        {"kb_dir", (data / "kb").string()},
        {"bench_manifest", manifest.empty() ? (data / "bench" / "manifest.json").string() : manifest},
        {"results_root", (dir / "results").string()},
        {"jobs", 2},
        {"backend",
         {{"kind", "scripted"},
          {"script_path", script_path.empty() ? (data / "bench" / "scripts" / "{benchmark}.json").string() : script_path}}},
        {"toolchain", {{"kind", "simulated"}}},
        {"refinement", {{"max_iterations", 10}, {"k_docs", 4}}},
        {"dse", {{"steps", 300}, {"max_points", 256}}}};
    const auto path = dir / "config.json";
    testing_support::write(path, j.dump(2));
    return path.string();
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = testing_support::slurp(e.path());
    return out;
}

}  // namespace

TEST_CASE("kb validate") {
    const auto ok = cli({"kb", "validate", "--kb-dir", (testing_support::data_dir() / "kb").string()});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("10 targets, 14 docs, 0 errors") != std::string::npos);

    TempDir dir;
    fs::copy(testing_support::data_dir() / "kb", dir / "kb", fs::copy_options::recursive);
    auto targets = nlohmann::json::parse(testing_support::slurp(dir / "kb" / "targets.json"));
    targets.push_back(targets[2]);
    testing_support::write(dir / "kb" / "targets.json", targets.dump(2));
    const auto dup = cli({"kb", "validate", "--kb-dir", (dir / "kb").string()});
    CHECK(dup.code == 1);
    CHECK(dup.err.find(targets[2]["part"].get<std::string>()) != std::string::npos);

    fs::create_directories(dir / "empty");
    CHECK(cli({"kb", "validate", "--kb-dir", (dir / "empty").string()}).code == 1);

    // Through the config file.
    CHECK(cli({"--config", write_config(dir), "kb", "validate"}).code == 0);
}

TEST_CASE("optimize") {
    TempDir dir;
    const auto cfg = write_config(dir);
    const auto r = cli({"--config", cfg, "optimize", "--benchmark", "vecadd", "--part", "xc7a200tfbg676-2"});
    CHECK(r.code == 0);
    const auto run_dir = dir / "results" / "runs" / "vecadd" / "xc7a200tfbg676-2";
    const auto state = nlohmann::json::parse(testing_support::slurp(run_dir / "state.json"));
    CHECK(state["final_verdict"] == "converged");
    CHECK(state["iterations"].size() == 2);
    CHECK(fs::exists(run_dir / "iter_1" / "prompt.txt"));
    CHECK(fs::exists(run_dir / "iter_2" / "qor_rtl_synth.json"));

    CHECK(cli({"--config", cfg, "optimize", "--benchmark", "vecadd", "--part", "nope"}).code == 2);
    CHECK(cli({"--config", cfg, "optimize", "--benchmark", "nope", "--part", "xc7a200tfbg676-2"}).code == 2);
    CHECK(cli({"--config", cfg, "optimize", "--benchmark", "vecadd"}).code == 2);  // --part is required

    // A script that never produces a kernel runs out the budget.
    const std::string broken = R"({"stage": "*", "response": "```cpp\nvoid vecadd( {\n```"})";
    std::string entries = "[";
    for (int i = 0; i < 12; ++i) entries += (i ? "," : "") + broken;
    testing_support::write(dir / "scripts" / "vecadd.json", entries + "]");
    const auto failing = write_config(dir, (dir / "scripts" / "{benchmark}.json").string());
    const auto f = cli({"--config", failing, "optimize", "--benchmark", "vecadd", "--part", "xc7a200tfbg676-2"});
    CHECK(f.code == 1);
    const auto fstate = nlohmann::json::parse(testing_support::slurp(run_dir / "state.json"));
    CHECK(fstate["final_verdict"] == "budget_exhausted");
    CHECK(fstate["iterations"].size() == 10);

    const auto capped = cli({"--config", failing, "optimize", "--benchmark", "vecadd", "--part", "xc7a200tfbg676-2",
                             "--max-iters", "3"});
    CHECK(capped.code == 1);
    CHECK(nlohmann::json::parse(testing_support::slurp(run_dir / "state.json"))["iterations"].size() == 3);
}

TEST_CASE("matrix output and report rendering") {
    TempDir a, b;
    const auto ra = cli({"--config", write_config(a), "matrix", "--jobs", "1"});
    const auto rb = cli({"--config", write_config(b), "matrix", "--jobs", "8"});
    CHECK(ra.code == 0);
    CHECK(rb.code == 0);
    CHECK(ra.out.find("100 cells") != std::string::npos);
    const auto ta = tree(a / "results"), tb = tree(b / "results");
    CHECK(ta == tb);

    std::size_t states = 0;
    for (const auto& [rel, _] : ta) states += rel.size() > 10 && rel.substr(rel.size() - 10) == "state.json";
    CHECK(states == 100);
    for (const char* f : {"tables/ff_usage.csv", "tables/lut_usage.md", "tables/loop_ii.csv", "tables/slack.md",
                          "tables/speedup.csv", "tables/full.csv", "success_matrix.csv", "deltas.json", "cells.csv",
                          "plotdata/success_by_family.csv", "plotdata/speedup_xc7a200tfbg676-2.csv"})
        CHECK_MESSAGE(ta.count(f), f);
    CHECK(ta.at("success_matrix.csv").rfind("family,attempted,converged,success_pct\n", 0) == 0);

    // Nothing lands outside the results root.
    for (const auto& e : fs::directory_iterator(a.path()))
        CHECK((e.path().filename() == "results" || e.path().filename() == "config.json"));

    const auto md = cli({"--config", write_config(a), "report", "render", "--table", "ff_usage", "--format", "md"});
    CHECK(md.code == 0);
    CHECK(md.out.rfind("| Benchmark | Family | Part | FF Used | FF Change (%) |", 0) == 0);
    const auto csv = cli({"report", "render", "--input", (a / "results" / "deltas.json").string(), "--format", "csv",
                          "--table", "full"});
    CHECK(csv.code == 0);
    CHECK(csv.out == ta.at("tables/full.csv"));
    CHECK(cli({"report", "render", "--input", (a / "nope.json").string()}).code == 2);
    CHECK(cli({"report", "render", "--table", "bogus"}).code == 2);
}

TEST_CASE("a cell without a script is recorded and the rest complete") {
    TempDir dir;
    fs::copy(testing_support::data_dir() / "bench" / "scripts", dir / "scripts");
    fs::remove(dir / "scripts" / "cordic.json");
    const auto r = cli({"--config", write_config(dir, (dir / "scripts" / "{benchmark}.json").string()), "matrix"});
    CHECK(r.code == 0);
    CHECK(r.out.find("100 cells, 90 converged, 10 with errors") != std::string::npos);
    const auto cells = testing_support::slurp(dir / "results" / "cells.csv");
    CHECK(cells.find("cordic,Zynq,xc7z020-clg484-1,continue,0,no script for 'cordic'") != std::string::npos);
}

TEST_CASE("dse") {
    TempDir dir;
    const auto cfg = write_config(dir);
    const auto r = cli({"--config", cfg, "dse", "--benchmark", "cordic", "--part", "xc7a200tfbg676-2", "--seed", "4"});
    CHECK(r.code == 0);
    const auto file = dir / "results" / "dse" / "cordic_xc7a200tfbg676-2.json";
    REQUIRE(fs::exists(file));
    const auto first = testing_support::slurp(file);
    const auto j = nlohmann::json::parse(first);
    CHECK(j["schedule"]["seed"] == 4);
    CHECK(j["trace"].size() == 301);
    CHECK(cli({"--config", cfg, "dse", "--benchmark", "cordic", "--part", "xc7a200tfbg676-2", "--seed", "4"}).code == 0);
    CHECK(testing_support::slurp(file) == first);

    CHECK(cli({"--config", cfg, "dse", "--benchmark", "nope", "--part", "xc7a200tfbg676-2"}).code == 2);

    // Manifest whose model file is gone.
    fs::copy(testing_support::data_dir() / "bench", dir / "bench", fs::copy_options::recursive);
    fs::remove(dir / "bench" / "models" / "cordic.json");
    const auto broken = write_config(dir, {}, (dir / "bench" / "manifest.json").string());
    CHECK(cli({"--config", broken, "dse", "--benchmark", "cordic", "--part", "xc7a200tfbg676-2"}).code == 2);
}

TEST_CASE("usage errors") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"bogus"}).code == 2);
    CHECK(cli({"matrix", "--jobs", "0"}).code == 2);
    CHECK(cli({"optimize", "--benchmark", "x", "--part", "y", "--backend", "carrier-pigeon"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"--config", "/nonexistent/config.json", "matrix"}).code == 2);
}

TEST_CASE("config loading") {
    TempDir dir;
    const auto cfg = load_app_config(write_config(dir));
    CHECK(cfg.jobs == 2);
    CHECK(cfg.dse.steps == 300);
    CHECK(cfg.toolchain == ToolchainKind::simulated);
    CHECK(script_for(cfg.backend, "nw").filename() == "nw.json");

    const auto bundled = load_app_config(testing_support::data_dir() / "configs" / "default.json");
    CHECK(bundled.jobs >= 1);
    CHECK(fs::exists(bundled.kb_dir / "targets.json"));
    CHECK(bundled.refinement.max_iterations == 10);

    testing_support::write(dir / "neg.json", R"({"kb_dir": ".", "bench_manifest": "config.json", "jobs": -1})");
    CHECK_THROWS_AS(load_app_config(dir / "neg.json"), ConfigError);
    testing_support::write(dir / "nokb.json", R"({"kb_dir": "missing", "bench_manifest": "config.json"})");
    CHECK_THROWS_AS(load_app_config(dir / "nokb.json"), ConfigError);
}
