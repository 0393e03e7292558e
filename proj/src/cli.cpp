#include "timelyhls/cli.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "timelyhls/bench.hpp"
#include "timelyhls/errors.hpp"
#include "timelyhls/kb.hpp"
#include "util.hpp"

namespace timelyhls {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string to_string(ToolchainKind kind) { return kind == ToolchainKind::simulated ? "simulated" : "external"; }

ToolchainKind toolchain_kind_from_string(std::string_view s) {
    if (s == "simulated") return ToolchainKind::simulated;
    if (s == "external") return ToolchainKind::external;
    throw ConfigError("unknown toolchain '" + std::string(s) + "' (expected simulated or external)");
}

// ---------------------------------------------------------------------------
// Config

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <typename T>
void read_opt(const json& j, const char* key, T& into) {
    if (j.contains(key) && !j[key].is_null()) into = j[key].get<T>();
}

void read_backend(const json& j, const fs::path& base, BackendConfig& b) {
    if (j.contains("kind")) b.kind = backend_kind_from_string(j["kind"].get<std::string>());
    if (j.contains("endpoint") && !j["endpoint"].is_null()) b.endpoint = j["endpoint"].get<std::string>();
    if (j.contains("model") && !j["model"].is_null()) b.model = j["model"].get<std::string>();
    read_opt(j, "temperature", b.temperature);
    read_opt(j, "max_retries", b.max_retries);
    if (j.contains("request_timeout_s")) b.request_timeout = std::chrono::seconds(j["request_timeout_s"].get<long long>());
    if (j.contains("script_path") && !j["script_path"].is_null())
        b.script_path = resolve(base, j["script_path"].get<std::string>());
}

void read_toolchain(const json& j, const fs::path& base, AppConfig& cfg) {
    if (j.contains("kind")) cfg.toolchain = toolchain_kind_from_string(j["kind"].get<std::string>());
    if (j.contains("timeout_s")) cfg.external.timeout = std::chrono::seconds(j["timeout_s"].get<long long>());
    if (j.contains("profile") && !j["profile"].is_null())
        cfg.external.profile = ExtractionProfile::load(resolve(base, j["profile"].get<std::string>()));
    if (j.contains("phases") && !j["phases"].is_null()) {
        for (const auto& [name, pj] : j["phases"].items()) {
            PhaseCommand pc;
            pc.command = pj.at("command").get<std::string>();
            if (pj.contains("report_globs")) pc.report_globs = pj["report_globs"].get<std::vector<std::string>>();
            cfg.external.phases[phase_from_string(name)] = std::move(pc);
        }
    }
}

void read_refinement(const json& j, RefinementConfig& r) {
    read_opt(j, "max_iterations", r.max_iterations);
    read_opt(j, "k_docs", r.k_docs);
    read_opt(j, "clock_ns", r.clock_ns);
    read_opt(j, "log_excerpt_lines", r.log_excerpt_lines);
}

void read_dse(const json& j, AppConfig& cfg) {
    read_opt(j, "t0", cfg.dse.t0);
    read_opt(j, "alpha", cfg.dse.alpha);
    read_opt(j, "steps", cfg.dse.steps);
    read_opt(j, "seed", cfg.dse.seed);
    read_opt(j, "max_points", cfg.dse_max_points);
}

}  // namespace

AppConfig load_app_config(const fs::path& path) {
    AppConfig cfg;
    const fs::path base = fs::absolute(path).parent_path();
    try {
        const json j = json::parse(read_file(path));
        cfg.kb_dir = resolve(base, j.at("kb_dir").get<std::string>());
        cfg.bench_manifest = resolve(base, j.at("bench_manifest").get<std::string>());
        cfg.results_root = resolve(base, j.value("results_root", std::string("results")));
        long long jobs = j.value("jobs", 0LL);
        if (jobs < 0) throw ConfigError("jobs must be >= 1 (or 0 for one per CPU)");
        cfg.jobs = jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : static_cast<std::size_t>(jobs);
        if (j.contains("backend")) read_backend(j["backend"], base, cfg.backend);
        if (j.contains("toolchain")) read_toolchain(j["toolchain"], base, cfg);
        if (j.contains("refinement")) read_refinement(j["refinement"], cfg.refinement);
        if (j.contains("dse")) read_dse(j["dse"], cfg);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    cfg.backend = with_env_overrides(cfg.backend);
    if (!fs::is_directory(cfg.kb_dir)) throw ConfigError("kb_dir does not exist: " + cfg.kb_dir.string());
    if (!fs::is_regular_file(cfg.bench_manifest))
        throw ConfigError("bench_manifest does not exist: " + cfg.bench_manifest.string());
    validate(cfg.refinement);
    validate(cfg.dse);
    return cfg;
}

fs::path script_for(const BackendConfig& cfg, std::string_view benchmark_id) {
    if (!cfg.script_path) throw ConfigError("scripted backend needs script_path");
    std::string p = cfg.script_path->string();
    for (auto at = p.find("{benchmark}"); at != std::string::npos; at = p.find("{benchmark}", at + benchmark_id.size()))
        p.replace(at, 11, benchmark_id);
    return p;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct Flags {
    std::string config = "data/configs/default.json";
    std::string benchmark;
    std::string part;
    std::size_t jobs = 0;
    std::string backend;
    std::string toolchain;
    int max_iters = 0;
    std::optional<std::uint64_t> seed;
    std::size_t steps = 0;
    std::size_t max_points = 0;
    std::string kb_dir;
    std::string input;
    std::string format = "md";
    std::string table = "full";
};

AppConfig resolve_config(const Flags& f) {
    AppConfig cfg = load_app_config(f.config);
    if (!f.backend.empty()) cfg.backend.kind = backend_kind_from_string(f.backend);
    if (!f.toolchain.empty()) cfg.toolchain = toolchain_kind_from_string(f.toolchain);
    if (f.max_iters > 0) cfg.refinement.max_iterations = f.max_iters;
    if (f.jobs > 0) cfg.jobs = f.jobs;
    if (f.seed) cfg.dse.seed = *f.seed;
    if (f.steps > 0) cfg.dse.steps = f.steps;
    if (f.max_points > 0) cfg.dse_max_points = f.max_points;
    return cfg;
}

std::vector<BenchmarkDescriptor> load_corpus(const AppConfig& cfg) {
    try {
        return load_manifest(cfg.bench_manifest);
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
}

std::unique_ptr<GenerationBackend> backend_for(const AppConfig& cfg, const BenchmarkDescriptor& desc) {
    BackendConfig b = cfg.backend;
    if (b.kind == BackendKind::scripted) {
        b.script_path = script_for(b, desc.id);
        if (!fs::exists(*b.script_path)) throw ConfigError("no script for '" + desc.id + "': " + b.script_path->string());
    }
    validate(b);
    return make_backend(b);
}

std::unique_ptr<Toolchain> toolchain_for(const AppConfig& cfg, const BenchmarkDescriptor& desc) {
    if (cfg.toolchain == ToolchainKind::external) return std::make_unique<ExternalToolchain>(cfg.external);
    return std::make_unique<SimulatedToolchain>(load_kernel_model(desc.model_path), read_file(desc.source_path));
}

int cmd_kb_validate(const Flags& f, std::ostream& out, std::ostream& err) {
    fs::path dir = f.kb_dir;
    if (dir.empty()) {
        try {
            dir = load_app_config(f.config).kb_dir;
        } catch (const Error& e) {
            err << "error: " << e.what() << "\n";
            return exit_code::usage;
        }
    }
    try {
        const KnowledgeBase kb = ingest(dir);
        std::set<std::string> families;
        for (const auto& t : kb.targets) families.insert(t.family);
        std::size_t warnings = 0;
        for (const auto& d : kb.index.docs)
            for (const auto& fam : d.applicable_families)
                if (!families.count(fam)) {
                    out << "warning: document '" << d.id << "' names family '" << fam << "' with no target\n";
                    ++warnings;
                }
        out << kb.targets.size() << " targets, " << kb.index.docs.size() << " docs, 0 errors";
        if (warnings) out << ", " << warnings << " warnings";
        out << "\n";
        return exit_code::ok;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        out << "kb validation failed: 1 errors\n";
        return exit_code::failure;
    }
}

int cmd_optimize(const Flags& f, std::ostream& out, std::ostream& err) {
    const AppConfig cfg = resolve_config(f);
    const auto corpus = load_corpus(cfg);
    const KnowledgeBase kb = ingest(cfg.kb_dir);
    const BenchmarkDescriptor* desc = nullptr;
    const FpgaTarget* target = nullptr;
    try {
        desc = &find_benchmark(corpus, f.benchmark);
        target = &kb.target(f.part);
    } catch (const NotFound& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    }
    auto backend = backend_for(cfg, *desc);
    auto toolchain = toolchain_for(cfg, *desc);
    const fs::path archive = cfg.results_root / "runs";
    RunState state;
    try {
        state = run_refinement(make_task(*desc), *target, cfg.refinement, kb.index, *backend, *toolchain, archive);
    } catch (const RunAborted& e) {
        err << "run aborted: " << e.what() << "\n";
        out << desc->id << " on " << target->part << ": aborted after " << e.state().iterations.size()
            << " iterations\n";
        return exit_code::failure;
    }
    for (const auto& it : state.iterations) out << "iteration " << it.index << ": " << to_string(it.verdict) << "\n";
    out << desc->id << " on " << target->part << ": " << to_string(state.final_verdict) << " ("
        << (archive / desc->id / target->part).string() << ")\n";
    return state.final_verdict == Verdict::converged ? exit_code::ok : exit_code::failure;
}

int cmd_matrix(const Flags& f, std::ostream& out, std::ostream& /*err*/) {
    const AppConfig cfg = resolve_config(f);
    auto corpus = load_corpus(cfg);
    const KnowledgeBase kb = ingest(cfg.kb_dir);
    auto targets = kb.targets;
    if (!f.benchmark.empty()) corpus = {find_benchmark(corpus, f.benchmark)};
    if (!f.part.empty()) targets = {kb.target(f.part)};

    MatrixOptions opt;
    opt.refinement = cfg.refinement;
    opt.jobs = cfg.jobs;
    opt.archive_root = cfg.results_root / "runs";
    const auto result = run_matrix(
        corpus, targets, kb.index, [&](const BenchmarkDescriptor& d, const FpgaTarget&) { return backend_for(cfg, d); },
        [&](const BenchmarkDescriptor& d, const FpgaTarget&) { return toolchain_for(cfg, d); }, opt);
    write_results(result, cfg.results_root);

    std::size_t converged = 0, errors = 0;
    for (const auto& c : result.cells) {
        converged += c.state.final_verdict == Verdict::converged;
        errors += c.error.has_value();
    }
    out << result.cells.size() << " cells, " << converged << " converged, " << errors << " with errors\n";
    out << success_matrix_csv(result.success);
    out << "results in " << cfg.results_root.string() << "\n";
    return exit_code::ok;
}

int cmd_dse(const Flags& f, std::ostream& out, std::ostream& err) {
    const AppConfig cfg = resolve_config(f);
    const auto corpus = load_corpus(cfg);
    const auto targets = load_targets(cfg.kb_dir / "targets.json");
    KernelModel model;
    const FpgaTarget* target = nullptr;
    try {
        const auto& desc = find_benchmark(corpus, f.benchmark);
        for (const auto& t : targets)
            if (t.part == f.part) target = &t;
        if (!target) throw NotFound("unknown part '" + f.part + "'");
        model = load_kernel_model(desc.model_path);
    } catch (const NotFound& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    }
    ConfigSpace space = full_space(model);
    if (cfg.dse_max_points > 0) space = restrict_space(space, cfg.dse_max_points);
    const auto result = anneal(model, *target, cfg.dse, space, cfg.refinement.clock_ns);
    const fs::path file = cfg.results_root / "dse" / (f.benchmark + "_" + f.part + ".json");
    write_file(file, anneal_result_json(result, f.benchmark, *target, cfg.dse));
    out << f.benchmark << " on " << f.part << ": best objective " << format_double(result.best_objective)
        << " (latency " << result.best_qor.latency_cycles << ", WNS " << format_fixed(result.best_qor.timing.wns_ns, 2)
        << " ns) -> " << file.string() << "\n";
    return exit_code::ok;
}

int cmd_report_render(const Flags& f, std::ostream& out, std::ostream& /*err*/) {
    fs::path input = f.input;
    if (input.empty()) input = load_app_config(f.config).results_root / "deltas.json";
    const auto deltas = deltas_from_json(read_file(input));
    const TableFormat format = table_format_from_string(f.format);
    for (TableKind k : kAllTables)
        if (to_string(k) == f.table) {
            out << emit_table(deltas, k, format);
            return exit_code::ok;
        }
    throw ConfigError("unknown table '" + f.table + "'");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"LLM-guided HLS timing-closure flow"};
    app.require_subcommand(1);
    Flags f;
    app.add_option("--config", f.config, "Config file")->capture_default_str();

    auto* kb = app.add_subcommand("kb", "Knowledge base tools");
    kb->require_subcommand(1);
    auto* kb_validate = kb->add_subcommand("validate", "Ingest and validate the knowledge base");
    kb_validate->add_option("--kb-dir", f.kb_dir, "Knowledge base directory (default: from config)");

    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--backend", f.backend, "scripted or http")->check(CLI::IsMember({"scripted", "http"}));
        sub->add_option("--toolchain", f.toolchain, "simulated or external")
            ->check(CLI::IsMember({"simulated", "external"}));
        sub->add_option("--max-iters", f.max_iters, "Refinement budget")->check(CLI::PositiveNumber);
    };
    auto* optimize = app.add_subcommand("optimize", "Run the refinement loop on one benchmark and device");
    optimize->add_option("--benchmark", f.benchmark)->required();
    optimize->add_option("--part", f.part)->required();
    add_run_flags(optimize);

    auto* matrix = app.add_subcommand("matrix", "Run every benchmark on every device");
    matrix->add_option("--jobs", f.jobs, "Parallel cells")->check(CLI::PositiveNumber);
    matrix->add_option("--benchmark", f.benchmark, "Only this benchmark");
    matrix->add_option("--part", f.part, "Only this device");
    add_run_flags(matrix);

    auto* dse = app.add_subcommand("dse", "Simulated-annealing pragma search");
    dse->add_option("--benchmark", f.benchmark)->required();
    dse->add_option("--part", f.part)->required();
    std::uint64_t seed = 0;
    auto* seed_opt = dse->add_option("--seed", seed);
    dse->add_option("--steps", f.steps)->check(CLI::PositiveNumber);
    dse->add_option("--max-points", f.max_points, "Restrict the space to at most this many points");

    auto* report = app.add_subcommand("report", "Result tables");
    report->require_subcommand(1);
    auto* render = report->add_subcommand("render", "Render a table from a matrix's deltas.json");
    render->add_option("--input", f.input, "Delta list (default: <results_root>/deltas.json)");
    render->add_option("--format", f.format)->check(CLI::IsMember({"csv", "md", "markdown"}))->capture_default_str();
    render->add_option("--table", f.table)
        ->check(CLI::IsMember({"ff_usage", "lut_usage", "loop_ii", "slack", "speedup", "full"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_code::ok : exit_code::usage;
    }
    if (seed_opt->count()) f.seed = seed;

    try {
        if (kb_validate->parsed()) return cmd_kb_validate(f, out, err);
        if (optimize->parsed()) return cmd_optimize(f, out, err);
        if (matrix->parsed()) return cmd_matrix(f, out, err);
        if (dse->parsed()) return cmd_dse(f, out, err);
        if (render->parsed()) return cmd_report_render(f, out, err);
    } catch (const NotFound& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::failure;
    }
    return exit_code::usage;
}

}  // namespace timelyhls
