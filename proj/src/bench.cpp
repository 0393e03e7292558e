#include "timelyhls/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <set>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "timelyhls/errors.hpp"
#include "util.hpp"

namespace timelyhls {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Corpus

std::vector<BenchmarkDescriptor> load_manifest(const fs::path& manifest) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(manifest));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("benchmark manifest " + manifest.string() + ": " + e.what());
    }
    if (!j.is_array()) throw ConfigError("benchmark manifest must be a JSON array");

    const fs::path base = fs::absolute(manifest).parent_path();
    std::vector<BenchmarkDescriptor> out;
    std::set<std::string> seen;
    for (const auto& e : j) {
        BenchmarkDescriptor d;
        try {
            d.id = e.at("id").get<std::string>();
            d.title = e.at("title").get<std::string>();
            d.challenge = e.at("challenge").get<std::string>();
            d.top_function = e.at("top_function").get<std::string>();
            d.source_path = base / e.at("source_path").get<std::string>();
            d.testbench_path = base / e.at("testbench_path").get<std::string>();
            d.model_path = base / e.at("model_path").get<std::string>();
            if (e.contains("objective")) d.objective = e["objective"].get<std::string>();
        } catch (const nlohmann::json::exception& ex) {
            throw ConfigError(std::string("benchmark manifest entry: ") + ex.what());
        }
        if (d.id.empty()) throw ValidationError("benchmark with empty id");
        if (!seen.insert(d.id).second) throw ValidationError("duplicate benchmark id '" + d.id + "'");
        for (const auto* p : {&d.source_path, &d.testbench_path, &d.model_path})
            if (!fs::exists(*p)) throw ValidationError("benchmark '" + d.id + "': missing file " + p->string());
        out.push_back(std::move(d));
    }
    return out;
}

const BenchmarkDescriptor& find_benchmark(const std::vector<BenchmarkDescriptor>& corpus, std::string_view id) {
    for (const auto& d : corpus)
        if (d.id == id) return d;
    throw NotFound("unknown benchmark '" + std::string(id) + "'");
}

KernelTask make_task(const BenchmarkDescriptor& desc) {
    return {desc.id, desc.top_function, read_file(desc.source_path), read_file(desc.testbench_path), desc.objective,
            desc.challenge};
}

// ---------------------------------------------------------------------------
// Metrics

double compute_speedup(long long base_cycles, long long opt_cycles) {
    if (base_cycles <= 0 || opt_cycles <= 0)
        throw ContractError("speedup needs positive cycle counts (got " + std::to_string(base_cycles) + ", " +
                            std::to_string(opt_cycles) + ")");
    return static_cast<double>(base_cycles) / static_cast<double>(opt_cycles);
}

std::string format_speedup(double speedup) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", speedup);
    return buf;
}

PercentChange percent_change(long long base, long long opt) {
    if (base < 0 || opt < 0) throw ContractError("resource counts cannot be negative");
    if (base == 0) return opt == 0 ? PercentChange{} : PercentChange{0.0, true};
    double pct = round_to((static_cast<double>(opt) - static_cast<double>(base)) / static_cast<double>(base) * 100.0, 2);
    if (pct == 0.0) pct = 0.0;  // no "-0.00"
    return {pct, false};
}

std::string format_change(const PercentChange& c) { return c.is_new ? "new" : format_fixed(c.pct, 2); }

ResourceDelta compute_resource_delta(const ResourceUsage& base, const ResourceUsage& opt) {
    return {percent_change(base.ff, opt.ff), percent_change(base.lut, opt.lut), percent_change(base.dsp, opt.dsp),
            percent_change(base.bram, opt.bram)};
}

std::optional<long long> worst_ii(const QoRReport& qor) {
    std::optional<long long> worst;
    for (const auto& l : qor.loops)
        if (l.pipelined && l.ii) worst = std::max(worst.value_or(0), *l.ii);
    return worst;
}

QoRDelta make_delta(std::string benchmark_id, const FpgaTarget& target, const QoRReport& base, const QoRReport& opt) {
    QoRDelta d;
    d.benchmark_id = std::move(benchmark_id);
    d.family = target.family;
    d.part = target.part;
    d.latency_base = base.latency_cycles;
    d.latency_opt = opt.latency_cycles;
    d.speedup = compute_speedup(base.latency_cycles, opt.latency_cycles);
    const auto rd = compute_resource_delta(base.resources, opt.resources);
    d.ff_base = base.resources.ff;
    d.ff_opt = opt.resources.ff;
    d.ff_change = rd.ff;
    d.lut_base = base.resources.lut;
    d.lut_opt = opt.resources.lut;
    d.lut_change = rd.lut;
    d.dsp_base = base.resources.dsp;
    d.dsp_opt = opt.resources.dsp;
    d.ii_base = worst_ii(base);
    d.ii_opt = worst_ii(opt);
    d.wns_base = base.timing.wns_ns;
    d.wns_opt = opt.timing.wns_ns;
    return d;
}

// ---------------------------------------------------------------------------
// Tables

std::string to_string(TableKind kind) {
    switch (kind) {
    case TableKind::ff_usage: return "ff_usage";
    case TableKind::lut_usage: return "lut_usage";
    case TableKind::loop_ii: return "loop_ii";
    case TableKind::slack: return "slack";
    case TableKind::speedup: return "speedup";
    case TableKind::full: return "full";
    }
    return "full";
}

TableFormat table_format_from_string(std::string_view s) {
    if (s == "csv") return TableFormat::csv;
    if (s == "md" || s == "markdown") return TableFormat::markdown;
    throw ConfigError("unknown table format '" + std::string(s) + "'");
}

namespace {

using Row = std::vector<std::string>;

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string md_field(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|' || c == '\\') out += '\\';
        out += c == '\n' ? ' ' : c;
    }
    return out;
}

std::string render(const Row& header, const std::vector<Row>& rows, TableFormat format) {
    std::string out;
    auto line = [&](const Row& r) {
        if (format == TableFormat::csv) {
            for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + csv_field(r[i]);
            out += "\n";
        } else {
            out += "|";
            for (const auto& f : r) out += " " + md_field(f) + " |";
            out += "\n";
        }
    };
    line(header);
    if (format == TableFormat::markdown) {
        out += "|";
        for (std::size_t i = 0; i < header.size(); ++i) out += i < 3 ? " --- |" : " ---: |";
        out += "\n";
    }
    for (const auto& r : rows) line(r);
    return out;
}

std::string ii_text(const std::optional<long long>& ii) { return ii ? std::to_string(*ii) : "not pipelined"; }
std::string opt_int(const std::optional<long long>& v) { return v ? std::to_string(*v) : ""; }

}  // namespace

namespace {

Row full_row(const QoRDelta& d) {
    return {d.benchmark_id,
            d.family,
            d.part,
            std::to_string(d.latency_base),
            std::to_string(d.latency_opt),
            format_double(d.speedup),
            std::to_string(d.ff_base),
            std::to_string(d.ff_opt),
            format_change(d.ff_change),
            std::to_string(d.lut_base),
            std::to_string(d.lut_opt),
            format_change(d.lut_change),
            std::to_string(d.dsp_base),
            std::to_string(d.dsp_opt),
            opt_int(d.ii_base),
            opt_int(d.ii_opt),
            format_double(d.wns_base),
            format_double(d.wns_opt)};
}

}  // namespace

std::string emit_table(std::vector<QoRDelta> deltas, TableKind kind, TableFormat format) {
    // (benchmark, part) first; the full row breaks ties so input order never shows.
    std::vector<std::pair<Row, const QoRDelta*>> keyed;
    for (const auto& d : deltas) keyed.emplace_back(full_row(d), &d);
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        return std::tie(a.second->benchmark_id, a.second->part, a.first) <
               std::tie(b.second->benchmark_id, b.second->part, b.first);
    });

    Row header{"Benchmark", "Family", "Part"};
    switch (kind) {
    case TableKind::ff_usage: header.insert(header.end(), {"FF Used", "FF Change (%)"}); break;
    case TableKind::lut_usage: header.insert(header.end(), {"LUTs Used", "LUTs Change (%)"}); break;
    case TableKind::loop_ii: header.insert(header.end(), {"Base II", "Optimized II"}); break;
    case TableKind::slack: header.insert(header.end(), {"Base WNS (ns)", "Optimized WNS (ns)"}); break;
    case TableKind::speedup:
        header.insert(header.end(), {"Base Latency (cycles)", "Optimized Latency (cycles)", "Speedup"});
        break;
    case TableKind::full:
        header.insert(header.end(), {"latency_base", "latency_opt", "speedup", "ff_base", "ff_opt", "ff_change_pct",
                                     "lut_base", "lut_opt", "lut_change_pct", "dsp_base", "dsp_opt", "ii_base",
                                     "ii_opt", "wns_base", "wns_opt"});
        break;
    }
    std::vector<Row> rows;
    for (const auto& [full, dp] : keyed) {
        const QoRDelta& d = *dp;
        Row r{d.benchmark_id, d.family, d.part};
        switch (kind) {
        case TableKind::ff_usage: r.insert(r.end(), {std::to_string(d.ff_opt), format_change(d.ff_change)}); break;
        case TableKind::lut_usage: r.insert(r.end(), {std::to_string(d.lut_opt), format_change(d.lut_change)}); break;
        case TableKind::loop_ii: r.insert(r.end(), {ii_text(d.ii_base), ii_text(d.ii_opt)}); break;
        case TableKind::slack: r.insert(r.end(), {format_fixed(d.wns_base, 2), format_fixed(d.wns_opt, 2)}); break;
        case TableKind::speedup:
            r.insert(r.end(), {std::to_string(d.latency_base), std::to_string(d.latency_opt), format_speedup(d.speedup)});
            break;
        case TableKind::full: r = full; break;
        }
        rows.push_back(std::move(r));
    }
    return render(header, rows, format);
}

std::string emit_tables(const std::vector<QoRDelta>& deltas, TableFormat format) {
    return emit_table(deltas, TableKind::full, format);
}

namespace {

nlohmann::ordered_json change_json(const PercentChange& c) {
    return c.is_new ? nlohmann::ordered_json("new") : nlohmann::ordered_json(c.pct);
}

PercentChange change_from_json(const nlohmann::json& j) {
    if (j.is_string() && j.get<std::string>() == "new") return {0.0, true};
    return {j.get<double>(), false};
}

nlohmann::ordered_json opt_json(const std::optional<long long>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<long long> opt_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<long long>();
}

}  // namespace

std::string deltas_json(const std::vector<QoRDelta>& deltas) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& d : deltas)
        arr.push_back({{"benchmark_id", d.benchmark_id},
                       {"family", d.family},
                       {"part", d.part},
                       {"latency_base", d.latency_base},
                       {"latency_opt", d.latency_opt},
                       {"speedup", d.speedup},
                       {"ff_base", d.ff_base},
                       {"ff_opt", d.ff_opt},
                       {"ff_change_pct", change_json(d.ff_change)},
                       {"lut_base", d.lut_base},
                       {"lut_opt", d.lut_opt},
                       {"lut_change_pct", change_json(d.lut_change)},
                       {"dsp_base", d.dsp_base},
                       {"dsp_opt", d.dsp_opt},
                       {"ii_base", opt_json(d.ii_base)},
                       {"ii_opt", opt_json(d.ii_opt)},
                       {"wns_base", d.wns_base},
                       {"wns_opt", d.wns_opt}});
    return arr.dump(2) + "\n";
}

std::vector<QoRDelta> deltas_from_json(std::string_view text) {
    std::vector<QoRDelta> out;
    try {
        for (const auto& j : nlohmann::json::parse(text)) {
            QoRDelta d;
            d.benchmark_id = j.at("benchmark_id").get<std::string>();
            d.family = j.at("family").get<std::string>();
            d.part = j.at("part").get<std::string>();
            d.latency_base = j.at("latency_base").get<long long>();
            d.latency_opt = j.at("latency_opt").get<long long>();
            d.speedup = j.at("speedup").get<double>();
            d.ff_base = j.at("ff_base").get<long long>();
            d.ff_opt = j.at("ff_opt").get<long long>();
            d.ff_change = change_from_json(j.at("ff_change_pct"));
            d.lut_base = j.at("lut_base").get<long long>();
            d.lut_opt = j.at("lut_opt").get<long long>();
            d.lut_change = change_from_json(j.at("lut_change_pct"));
            d.dsp_base = j.at("dsp_base").get<long long>();
            d.dsp_opt = j.at("dsp_opt").get<long long>();
            d.ii_base = opt_from_json(j.at("ii_base"));
            d.ii_opt = opt_from_json(j.at("ii_opt"));
            d.wns_base = j.at("wns_base").get<double>();
            d.wns_opt = j.at("wns_opt").get<double>();
            out.push_back(std::move(d));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("delta list: ") + e.what());
    }
    return out;
}

std::vector<FamilySuccess> emit_success_matrix(const std::vector<RunState>& states) {
    std::map<std::string, FamilySuccess> by_family;
    for (const auto& s : states) {
        auto& f = by_family[s.target.family];
        f.family = s.target.family;
        ++f.attempted;
        if (s.final_verdict == Verdict::converged) ++f.converged;
    }
    std::vector<FamilySuccess> out;
    for (auto& [_, f] : by_family) {
        f.success_pct = round_to(100.0 * static_cast<double>(f.converged) / static_cast<double>(f.attempted), 1);
        out.push_back(f);
    }
    return out;
}

std::string success_matrix_csv(const std::vector<FamilySuccess>& rows) {
    std::string out = "family,attempted,converged,success_pct\n";
    for (const auto& r : rows)
        out += csv_field(r.family) + "," + std::to_string(r.attempted) + "," + std::to_string(r.converged) + "," +
               format_fixed(r.success_pct, 1) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Matrix

namespace {

void run_cell(MatrixCell& cell, const BenchmarkDescriptor& desc, const KbIndex& kb, const BackendFactory& backends,
              const ToolchainFactory& toolchains, const MatrixOptions& opt) {
    cell.state.benchmark_id = desc.id;
    cell.state.target = cell.target;
    try {
        const KernelTask task = make_task(desc);
        auto backend = backends(desc, cell.target);
        auto toolchain = toolchains(desc, cell.target);
        try {
            cell.state = run_refinement(task, cell.target, opt.refinement, kb, *backend, *toolchain, opt.archive_root);
        } catch (const RunAborted& e) {
            cell.state = e.state();
            cell.error = e.what();
            return;
        }
        if (cell.state.final_verdict == Verdict::converged)
            cell.opt_qor = cell.state.iterations.back().outcomes.at(Phase::rtl_synth).qor;

        // Baseline: the untouched kernel through RTL synthesis.
        const double clock =
            opt.refinement.clock_ns > 0 ? opt.refinement.clock_ns : cell.target.default_clock_ns;
        fs::path workdir;
        if (!opt.archive_root.empty()) workdir = opt.archive_root / desc.id / cell.target.part / "baseline";
        KernelJob job{desc.id, desc.top_function, task.source, task.testbench, cell.target, clock, workdir};
        const auto base = toolchain->run(Phase::rtl_synth, job);
        if (base.ok && base.qor) {
            cell.base_qor = base.qor;
            if (!workdir.empty()) canonical_save(*base.qor, workdir / "qor_rtl_synth.json");
        } else if (!cell.error) {
            cell.error = "baseline synthesis failed";
        }
    } catch (const Error& e) {
        cell.error = e.what();
    }
}

}  // namespace

MatrixResult run_matrix(const std::vector<BenchmarkDescriptor>& corpus, const std::vector<FpgaTarget>& targets,
                        const KbIndex& kb, const BackendFactory& backends, const ToolchainFactory& toolchains,
                        const MatrixOptions& options) {
    if (options.jobs < 1) throw ConfigError("jobs must be >= 1");
    validate(options.refinement);
    MatrixResult result;
    std::vector<const BenchmarkDescriptor*> descs;
    for (const auto& d : corpus)
        for (const auto& t : targets) {
            MatrixCell cell;
            cell.benchmark_id = d.id;
            cell.target = t;
            result.cells.push_back(std::move(cell));
            descs.push_back(&d);
        }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < result.cells.size(); i = next++)
            run_cell(result.cells[i], *descs[i], kb, backends, toolchains, options);
    };
    const std::size_t n = std::min(options.jobs, std::max<std::size_t>(result.cells.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<RunState> states;
    for (const auto& c : result.cells) {
        states.push_back(c.state);
        if (c.base_qor && c.opt_qor) result.deltas.push_back(make_delta(c.benchmark_id, c.target, *c.base_qor, *c.opt_qor));
    }
    result.success = emit_success_matrix(states);
    return result;
}

void write_results(const MatrixResult& result, const fs::path& root) {
    for (TableKind kind : kAllTables) {
        write_file(root / "tables" / (to_string(kind) + ".csv"), emit_table(result.deltas, kind, TableFormat::csv));
        write_file(root / "tables" / (to_string(kind) + ".md"), emit_table(result.deltas, kind, TableFormat::markdown));
    }
    write_file(root / "deltas.json", deltas_json(result.deltas));
    write_file(root / "success_matrix.csv", success_matrix_csv(result.success));

    std::string cells = "benchmark,family,part,verdict,iterations,error\n";
    for (const auto& c : result.cells)
        cells += csv_field(c.benchmark_id) + "," + csv_field(c.target.family) + "," + csv_field(c.target.part) + "," +
                 to_string(c.state.final_verdict) + "," + std::to_string(c.state.iterations.size()) + "," +
                 csv_field(c.error.value_or("")) + "\n";
    write_file(root / "cells.csv", cells);

    std::map<std::string, std::vector<const QoRDelta*>> by_part;
    for (const auto& d : result.deltas) by_part[d.part].push_back(&d);
    for (auto& [part, ds] : by_part) {
        std::stable_sort(ds.begin(), ds.end(),
                         [](const QoRDelta* a, const QoRDelta* b) { return a->benchmark_id < b->benchmark_id; });
        std::string csv = "x,y\n";
        for (const auto* d : ds) csv += csv_field(d->benchmark_id) + "," + format_speedup(d->speedup) + "\n";
        write_file(root / "plotdata" / ("speedup_" + part + ".csv"), csv);
    }
    std::string fam = "x,y\n";
    for (const auto& f : result.success) fam += csv_field(f.family) + "," + format_fixed(f.success_pct, 1) + "\n";
    write_file(root / "plotdata" / "success_by_family.csv", fam);
}

}  // namespace timelyhls
