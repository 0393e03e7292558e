#include "timelyhls/toolchain.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <fnmatch.h>
#include <map>
#include <poll.h>
#include <set>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "timelyhls/errors.hpp"
#include "util.hpp"

namespace timelyhls {

namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Kernel model

const LoopDescriptor* KernelModel::find_loop(std::string_view label) const {
    for (const auto& l : loops)
        if (l.label == label) return &l;
    return nullptr;
}

LoopDescriptor* KernelModel::find_loop(std::string_view label) {
    for (auto& l : loops)
        if (l.label == label) return &l;
    return nullptr;
}

const ArrayDescriptor* KernelModel::find_array(std::string_view name) const {
    for (const auto& a : arrays)
        if (a.name == name) return &a;
    return nullptr;
}

ArrayDescriptor* KernelModel::find_array(std::string_view name) {
    for (auto& a : arrays)
        if (a.name == name) return &a;
    return nullptr;
}

void validate(const KernelModel& m) {
    auto fail = [](const std::string& why) { throw ValidationError("kernel model: " + why); };
    if (m.loops.empty()) fail("no loops");
    if (m.datapath_bits < 1) fail("datapath_bits must be >= 1");
    std::set<std::string> seen;
    for (const auto& l : m.loops) {
        const std::string where = "loop '" + l.label + "': ";
        if (l.label.empty()) fail("loop with empty label");
        if (l.trip_count < 1) fail(where + "trip_count must be >= 1");
        if (l.ops.mul < 0 || l.ops.add < 0 || l.ops.load < 0 || l.ops.store < 0) fail(where + "negative op count");
        if (l.carried_dependence_distance < 0) fail(where + "negative dependence distance");
        if (l.applied.unroll_factor < 1) fail(where + "unroll_factor must be >= 1");
        if (l.applied.pipeline_ii && *l.applied.pipeline_ii < 1) fail(where + "pipeline_ii must be >= 1");
        // Parents must precede children, which also rules out cycles.
        if (l.parent && !seen.count(*l.parent)) fail(where + "parent '" + *l.parent + "' not defined before it");
        if (!seen.insert(l.label).second) fail("duplicate loop label '" + l.label + "'");
    }
    std::set<std::string> names;
    for (const auto& a : m.arrays) {
        const std::string where = "array '" + a.name + "': ";
        if (a.name.empty()) fail("array with empty name");
        if (!names.insert(a.name).second) fail("duplicate array '" + a.name + "'");
        if (a.elements < 1) fail(where + "elements must be >= 1");
        if (a.accesses_per_iteration < 0) fail(where + "negative accesses_per_iteration");
        if (a.partition_factor < 1) fail(where + "partition_factor must be >= 1");
        if (!seen.count(a.loop)) fail(where + "unknown loop '" + a.loop + "'");
    }
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    return j[key].get<T>();
}

}  // namespace

KernelModel kernel_model_from_json(std::string_view text) {
    KernelModel m;
    try {
        const json j = json::parse(text);
        if (!j.is_object()) throw ValidationError("kernel model: expected a JSON object");
        m.datapath_bits = get_or<long long>(j, "datapath_bits", 32);
        for (const auto& jl : j.at("loops")) {
            LoopDescriptor l;
            l.label = jl.at("label").get<std::string>();
            l.trip_count = jl.at("trip_count").get<long long>();
            if (jl.contains("parent") && !jl["parent"].is_null()) l.parent = jl["parent"].get<std::string>();
            if (jl.contains("ops")) {
                const auto& o = jl["ops"];
                l.ops = {get_or<long long>(o, "mul", 0), get_or<long long>(o, "add", 0),
                         get_or<long long>(o, "load", 0), get_or<long long>(o, "store", 0)};
            }
            l.carried_dependence_distance = get_or<long long>(jl, "carried_dependence_distance", 0);
            if (jl.contains("applied")) {
                const auto& a = jl["applied"];
                if (a.contains("pipeline_ii") && !a["pipeline_ii"].is_null())
                    l.applied.pipeline_ii = a["pipeline_ii"].get<long long>();
                l.applied.unroll_factor = get_or<long long>(a, "unroll_factor", 1);
            }
            m.loops.push_back(std::move(l));
        }
        if (j.contains("arrays")) {
            for (const auto& ja : j["arrays"]) {
                ArrayDescriptor a;
                a.name = ja.at("name").get<std::string>();
                a.elements = ja.at("elements").get<long long>();
                a.accesses_per_iteration = get_or<long long>(ja, "accesses_per_iteration", 0);
                a.partition_factor = get_or<long long>(ja, "partition_factor", 1);
                a.loop = ja.at("loop").get<std::string>();
                m.arrays.push_back(std::move(a));
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("kernel model: ") + e.what());
    }
    validate(m);
    return m;
}

std::string kernel_model_to_json(const KernelModel& m) {
    ojson j;
    j["datapath_bits"] = m.datapath_bits;
    auto& loops = j["loops"] = ojson::array();
    for (const auto& l : m.loops) {
        ojson jl;
        jl["label"] = l.label;
        jl["trip_count"] = l.trip_count;
        jl["parent"] = l.parent ? ojson(*l.parent) : ojson(nullptr);
        jl["ops"] = {{"mul", l.ops.mul}, {"add", l.ops.add}, {"load", l.ops.load}, {"store", l.ops.store}};
        jl["carried_dependence_distance"] = l.carried_dependence_distance;
        jl["applied"] = {{"pipeline_ii", l.applied.pipeline_ii ? ojson(*l.applied.pipeline_ii) : ojson(nullptr)},
                         {"unroll_factor", l.applied.unroll_factor}};
        loops.push_back(std::move(jl));
    }
    auto& arrays = j["arrays"] = ojson::array();
    for (const auto& a : m.arrays) {
        arrays.push_back({{"name", a.name},
                          {"elements", a.elements},
                          {"accesses_per_iteration", a.accesses_per_iteration},
                          {"partition_factor", a.partition_factor},
                          {"loop", a.loop}});
    }
    return j.dump(2) + "\n";
}

KernelModel load_kernel_model(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw NotFound("kernel model " + path.string() + " not found");
    try {
        return kernel_model_from_json(read_file(path));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

KernelModel without_pragmas(KernelModel model) {
    for (auto& l : model.loops) l.applied = {};
    for (auto& a : model.arrays) a.partition_factor = 1;
    return model;
}

KernelModel apply_pragmas_to_model(KernelModel model, const std::vector<PragmaDirective>& pragmas,
                                   const std::vector<AnchorPoint>& anchors) {
    for (const auto& p : pragmas) {
        const std::string where = "line " + std::to_string(p.source_line) + ": " + to_string(p.kind);
        switch (p.kind) {
        case PragmaKind::PIPELINE:
        case PragmaKind::UNROLL: {
            const AnchorPoint* a = enclosing_anchor(anchors, p.source_line);
            if (!a) throw MappingError(where + " outside any function or loop");
            if (a->kind == AnchorKind::function_body_start) break;  // function-level: nothing to model
            LoopDescriptor* loop = model.find_loop(a->label);
            if (!loop) throw MappingError(where + " on loop '" + a->label + "' which the kernel model does not know");
            if (p.kind == PragmaKind::PIPELINE) {
                loop->applied.pipeline_ii = p.ii.value_or(1);
            } else {
                loop->applied.unroll_factor = std::min(p.factor.value_or(loop->trip_count), loop->trip_count);
            }
            break;
        }
        case PragmaKind::ARRAY_PARTITION: {
            if (!p.variable) throw MappingError(where + " without variable=");
            ArrayDescriptor* arr = model.find_array(*p.variable);
            if (!arr) throw MappingError(where + " on array '" + *p.variable + "' which the kernel model does not know");
            if (p.partition_type == PartitionType::complete || !p.factor)
                arr->partition_factor = arr->elements;
            else
                arr->partition_factor = std::min(*p.factor, arr->elements);
            break;
        }
        case PragmaKind::DATAFLOW:
        case PragmaKind::INTERFACE:
        case PragmaKind::INLINE:
            break;
        }
    }
    return model;
}

// ---------------------------------------------------------------------------
// Analytical simulator

namespace {

long long ceil_div(long long a, long long b) { return (a + b - 1) / b; }

long long ceil_log2(long long v) {
    long long levels = 0;
    while ((1LL << levels) < v) ++levels;
    return levels;
}

long long op_depth(const OpCounts& o) {
    return o.mul * sim::kMulDepth + o.add * sim::kAddDepth + o.load * sim::kLoadDepth + o.store * sim::kStoreDepth;
}

}  // namespace

SimulationResult simulate_detailed(const KernelModel& model, const FpgaTarget& target, double clock_ns) {
    validate(model);
    if (!(clock_ns > 0)) throw ContractError("simulate: clock_ns must be > 0");
    const std::size_t n = model.loops.size();
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[model.loops[i].label] = i;

    SimulationResult out;
    out.schedule.resize(n);
    std::vector<long long> child_latency(n, 0);
    const long long bits = model.datapath_bits;

    // Loops under a pipelined ancestor are flattened into that pipeline and
    // registered like it.
    std::vector<bool> in_pipeline(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& l = model.loops[k];
        if (l.parent) {
            const std::size_t p = index[*l.parent];
            in_pipeline[k] = in_pipeline[p] || model.loops[p].applied.pipeline_ii.has_value();
        }
    }

    // Children come after their parents, so a reverse sweep sees them first.
    for (std::size_t k = n; k-- > 0;) {
        const auto& l = model.loops[k];
        auto& s = out.schedule[k];
        const long long u = l.applied.unroll_factor;
        s.label = l.label;
        s.depth = op_depth(l.ops);
        s.body_latency = s.depth + child_latency[k];
        s.effective_trips = ceil_div(l.trip_count, u);
        for (const auto& a : model.arrays)
            if (a.loop == l.label)
                s.memory_floor = std::max(s.memory_floor,
                                          ceil_div(a.accesses_per_iteration * u, sim::kPortsPerBank * a.partition_factor));
        s.dependence_floor = std::max<long long>(1, l.carried_dependence_distance);
        if (l.applied.pipeline_ii) {
            const long long ii = std::max({*l.applied.pipeline_ii, s.memory_floor, s.dependence_floor});
            s.achieved_ii = ii;
            s.latency = (s.effective_trips - 1) * ii + s.body_latency;
            s.logic_levels = sim::kBaseLogicLevels;
        } else {
            s.latency = s.effective_trips * std::max({s.body_latency, s.memory_floor, s.dependence_floor});
            s.logic_levels = in_pipeline[k] ? sim::kBaseLogicLevels
                                            : sim::kBaseLogicLevels + ceil_log2(u) +
                                                  (l.ops.mul > 0 ? sim::kMulChainLevels : 0);
        }
        if (l.parent) child_latency[index[*l.parent]] += s.latency;
    }

    QoRReport& q = out.qor;
    q.source_phase = QoRPhase::simulated;
    long long ff8 = 0, lut2 = 0;  // FF in eighths, LUT in halves, rounded up at the end
    auto& res = q.resources;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& l = model.loops[k];
        const auto& s = out.schedule[k];
        const long long u = l.applied.unroll_factor;
        if (!l.parent) q.latency_cycles += s.latency;
        res.dsp += l.ops.mul * u * (bits <= 18 ? 1 : 3);
        ff8 += 2 * l.ops.total() * u * bits + (l.applied.pipeline_ii ? s.depth * bits * u : 0);
        lut2 += l.ops.total() * u * bits;
        if (s.logic_levels > out.logic_levels) {
            out.logic_levels = s.logic_levels;
            out.critical_loop = l.label;
        }
        q.loops.push_back({l.label, s.achieved_ii, s.body_latency, s.achieved_ii.has_value()});
    }
    res.ff = ceil_div(ff8, 8);
    res.lut = ceil_div(lut2, 2);
    for (const auto& a : model.arrays) {
        const long long per_bank = ceil_div(a.elements * bits, static_cast<long long>(sim::kBramBits) * a.partition_factor);
        res.bram += per_bank * a.partition_factor;
    }
    if (res.ff > target.ffs) res.overflow.insert("ff");
    if (res.lut > target.luts) res.overflow.insert("lut");
    if (res.dsp > target.dsps) res.overflow.insert("dsp");
    if (res.bram > target.brams) res.overflow.insert("bram");

    // Slack in integer hundredths so that wns + critical path == clock holds exactly.
    const std::int64_t clock_c = to_centi(clock_ns);
    const std::int64_t path_c = to_centi(static_cast<double>(out.logic_levels) * target.logic_delay_ns);
    const std::int64_t wns_c = clock_c - path_c;
    out.critical_path_ns = static_cast<double>(path_c) / 100.0;
    q.timing.clock_ns = static_cast<double>(clock_c) / 100.0;
    q.timing.wns_ns = static_cast<double>(wns_c) / 100.0;
    q.timing.tns_ns = static_cast<double>(std::min<std::int64_t>(0, wns_c) * static_cast<std::int64_t>(n)) / 100.0;
    q.timing.met = wns_c >= 0;
    return out;
}

QoRReport simulate(const KernelModel& model, const FpgaTarget& target, double clock_ns) {
    return simulate_detailed(model, target, clock_ns).qor;
}

// ---------------------------------------------------------------------------
// Phases

std::string to_string(Phase phase) {
    switch (phase) {
    case Phase::hls_synth: return "hls_synth";
    case Phase::c_sim: return "c_sim";
    case Phase::rtl_synth: return "rtl_synth";
    case Phase::rtl_sim: return "rtl_sim";
    }
    return "hls_synth";
}

Phase phase_from_string(std::string_view s) {
    for (Phase p : kStageOrder)
        if (to_string(p) == s) return p;
    throw ConfigError("unknown phase '" + std::string(s) + "'");
}

namespace {

bool is_synth(Phase p) { return p == Phase::hls_synth || p == Phase::rtl_synth; }

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Simulated toolchain

SimulatedToolchain::SimulatedToolchain(KernelModel model, std::string reference_source)
    : model_(without_pragmas(std::move(model))), reference_tokens_(code_tokens(reference_source)) {
    validate(model_);
}

SynthesisOutcome SimulatedToolchain::run(Phase phase, const KernelJob& job) {
    return is_synth(phase) ? synthesize(phase, job) : functional(phase, job);
}

SynthesisOutcome SimulatedToolchain::synthesize(Phase phase, const KernelJob& job) const {
    SynthesisOutcome out;
    out.phase = phase;
    const std::string tag = phase == Phase::hls_synth ? "HLS" : "Synth";
    std::string log;
    auto fail = [&](const std::string& msg) {
        out.ok = false;
        out.log = log + "ERROR: [" + tag + " 200-70] kernel.cpp:" + msg + "\n";
        return out;
    };

    SourceUnit unit;
    try {
        unit = make_source_unit(job.source, "kernel.cpp");
    } catch (const ParseError& e) {
        return fail(std::to_string(e.line()) + ": error: " + e.what());
    }
    const bool has_top = std::any_of(unit.anchors.begin(), unit.anchors.end(), [&](const AnchorPoint& a) {
        return a.kind == AnchorKind::function_body_start && a.label == job.top_function;
    });
    if (!has_top) return fail("0: error: top function '" + job.top_function + "' is not defined");

    KernelModel applied;
    try {
        applied = apply_pragmas_to_model(model_, unit.pragmas, unit.anchors);
    } catch (const MappingError& e) {
        return fail("0: error: cannot bind directive: " + std::string(e.what()));
    }
    const double clock = job.clock_ns > 0 ? job.clock_ns : job.target.default_clock_ns;
    SimulationResult r = simulate_detailed(applied, job.target, clock);
    r.qor.source_phase = phase == Phase::hls_synth ? QoRPhase::hls_synth : QoRPhase::rtl_synth;

    log += "INFO: [" + tag + " 200-1] Running " + to_string(phase) + " for '" + job.top_function + "' on " +
           job.target.part + " at " + format_fixed(r.qor.timing.clock_ns, 2) + " ns\n";
    for (std::size_t k = 0; k < applied.loops.size(); ++k) {
        const auto& l = applied.loops[k];
        const auto& s = r.schedule[k];
        if (s.achieved_ii && *s.achieved_ii > *l.applied.pipeline_ii) {
            const char* cause = s.dependence_floor >= s.memory_floor ? "carried dependence" : "memory port limit";
            log += "WARNING: [HLS 200-885] Unable to schedule loop '" + l.label + "': II = " +
                   std::to_string(*l.applied.pipeline_ii) + " requested, II = " + std::to_string(*s.achieved_ii) +
                   " achieved (" + cause + ")\n";
        }
    }
    const auto& res = r.qor.resources;
    const std::pair<const char*, std::pair<long long, long long>> usage[] = {
        {"ff", {res.ff, job.target.ffs}},
        {"lut", {res.lut, job.target.luts}},
        {"dsp", {res.dsp, job.target.dsps}},
        {"bram", {res.bram, job.target.brams}},
    };
    for (const auto& [name, pair] : usage) {
        if (res.overflow.count(name))
            log += "WARNING: [HLS 200-1470] Resource overflow: " + upper(name) + " usage " +
                   std::to_string(pair.first) + " exceeds available " + std::to_string(pair.second) + "\n";
    }
    log += "INFO: [" + tag + " 200-2] Latency (cycles): " + std::to_string(r.qor.latency_cycles) + "\n";
    if (phase == Phase::rtl_synth) {
        log += "Clock Period(ns): " + format_fixed(r.qor.timing.clock_ns, 2) + "\n";
        log += "WNS(ns): " + format_fixed(r.qor.timing.wns_ns, 2) + "\n";
        log += "TNS(ns): " + format_fixed(r.qor.timing.tns_ns, 2) + "\n";
        log += "Critical path: " + std::to_string(r.logic_levels) + " logic levels, " +
               format_fixed(r.critical_path_ns, 2) + " ns through loop '" + r.critical_loop + "'\n";
        if (!r.qor.timing.met)
            log += "CRITICAL WARNING: [Timing 38-282] The design failed to meet the timing requirements: WNS(ns) = " +
                   format_fixed(r.qor.timing.wns_ns, 2) + "\n";
    }
    out.ok = true;
    out.qor = std::move(r.qor);
    out.log = std::move(log);
    return out;
}

SynthesisOutcome SimulatedToolchain::functional(Phase phase, const KernelJob& job) const {
    SynthesisOutcome out;
    out.phase = phase;
    const std::string tag = phase == Phase::c_sim ? "SIM 211-100" : "COSIM 212-100";
    const auto tokens = code_tokens(job.source);
    const std::size_t common = std::min(tokens.size(), reference_tokens_.size());
    std::size_t at = 0;
    while (at < common && tokens[at] == reference_tokens_[at]) ++at;
    if (at == common && tokens.size() == reference_tokens_.size()) {
        out.ok = true;
        out.log = "INFO: [" + tag + "] " + to_string(phase) + " finished: testbench passed, 0 errors\n";
        return out;
    }
    const std::string got = at < tokens.size() ? tokens[at] : "<end>";
    const std::string want = at < reference_tokens_.size() ? reference_tokens_[at] : "<end>";
    out.ok = false;
    out.log = "ERROR: [" + tag + "] testbench output mismatch: kernel diverges from the reference at token " +
              std::to_string(at) + " ('" + got + "' where '" + want + "' was expected)\n";
    return out;
}

// ---------------------------------------------------------------------------
// External toolchain

ExternalAdapterConfig ExternalAdapterConfig::vitis_defaults() {
    ExternalAdapterConfig cfg;
    cfg.phases[Phase::c_sim] = {"vitis_hls -f csim.tcl", {}};
    cfg.phases[Phase::hls_synth] = {"vitis_hls -f csynth.tcl", {"qor_hls.json", "reports/csynth*.rpt"}};
    cfg.phases[Phase::rtl_synth] = {"vivado -mode batch -nojournal -source synth.tcl",
                                    {"qor_rtl.json", "reports/synth*.rpt"}};
    cfg.phases[Phase::rtl_sim] = {"vitis_hls -f cosim.tcl", {}};
    return cfg;
}

std::string expand_command(const std::string& templ, const CommandSubstitutions& subs, const fs::path& workdir) {
    const std::pair<std::string, std::string> table[] = {
        {"{part}", subs.part},
        {"{clock_ns}", format_double(subs.clock_ns)},
        {"{top_function}", subs.top},
        {"{top}", subs.top},
        {"{workdir}", workdir.string()},
    };
    std::string out;
    for (std::size_t i = 0; i < templ.size();) {
        bool hit = false;
        for (const auto& [key, value] : table) {
            if (templ.compare(i, key.size(), key) == 0) {
                out += value;
                i += key.size();
                hit = true;
                break;
            }
        }
        if (!hit) out += templ[i++];
    }
    return out;
}

namespace {

struct CommandResult {
    int exit_code = -1;
    std::string output;
};

CommandResult run_shell(const std::string& command, const fs::path& workdir, std::chrono::seconds timeout) {
    int fds[2];
    if (pipe(fds) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
    const pid_t pid = fork();
    if (pid < 0) {
        close(fds[0]);
        close(fds[1]);
        throw Error(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        setpgid(0, 0);
        dup2(fds[1], STDOUT_FILENO);
        dup2(fds[1], STDERR_FILENO);
        close(fds[0]);
        close(fds[1]);
        if (chdir(workdir.c_str()) != 0) _exit(126);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    setpgid(pid, pid);
    close(fds[1]);

    CommandResult result;
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    bool timed_out = false;
    char buf[4096];
    for (;;) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            timed_out = true;
            break;
        }
        pollfd pfd{fds[0], POLLIN, 0};
        const int rc = poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 100)));
        if (rc < 0 && errno != EINTR) break;
        if (rc <= 0) continue;
        const ssize_t got = read(fds[0], buf, sizeof buf);
        if (got <= 0) break;  // EOF: every writer closed
        result.output.append(buf, static_cast<std::size_t>(got));
    }
    close(fds[0]);
    if (timed_out) kill(-pid, SIGKILL);
    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (timed_out) throw ToolTimeout("command exceeded " + std::to_string(timeout.count()) + " s: " + command);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    return result;
}

std::vector<fs::path> matching_reports(const fs::path& workdir, const std::vector<std::string>& globs) {
    std::vector<std::string> files;
    if (fs::is_directory(workdir))
        for (const auto& e : fs::recursive_directory_iterator(workdir))
            if (e.is_regular_file()) files.push_back(fs::relative(e.path(), workdir).generic_string());
    std::sort(files.begin(), files.end());
    std::vector<fs::path> out;
    for (const auto& g : globs)
        for (const auto& f : files)
            if (fnmatch(g.c_str(), f.c_str(), 0) == 0) out.push_back(workdir / f);
    return out;
}

}  // namespace

SynthesisOutcome run_phase(const ExternalAdapterConfig& cfg, Phase phase, const fs::path& workdir,
                           const CommandSubstitutions& subs) {
    auto it = cfg.phases.find(phase);
    if (it == cfg.phases.end()) throw ConfigError("no command configured for phase " + to_string(phase));
    const std::string command = expand_command(it->second.command, subs, workdir);
    const CommandResult r = run_shell(command, workdir, cfg.timeout);
    if (r.exit_code == 127 || r.exit_code == 126)
        throw ToolMissing("cannot run '" + command + "' (exit " + std::to_string(r.exit_code) + "): " + trim(r.output));

    SynthesisOutcome out;
    out.phase = phase;
    out.log = r.output;
    if (r.exit_code != 0) {
        out.ok = false;
        out.log += "ERROR: command exited with status " + std::to_string(r.exit_code) + "\n";
        return out;
    }
    if (!is_synth(phase)) {
        out.ok = true;
        return out;
    }
    const QoRPhase qphase = phase == Phase::hls_synth ? QoRPhase::hls_synth : QoRPhase::rtl_synth;
    for (const auto& report : matching_reports(workdir, it->second.report_globs)) {
        try {
            QoRReport q = report.extension() == ".json" ? canonical_load(report)
                                                        : parse_vendor_report(read_file(report), cfg.profile, qphase);
            out.ok = true;
            out.qor = std::move(q);
            return out;
        } catch (const Error& e) {
            out.log += "WARNING: report " + report.string() + " unreadable: " + e.what() + "\n";
        }
    }
    out.ok = false;
    out.log += "ERROR: no parseable report matched for phase " + to_string(phase) + "\n";
    return out;
}

void write_driver_scripts(const KernelJob& job) {
    const std::string clock = format_double(job.clock_ns > 0 ? job.clock_ns : job.target.default_clock_ns);
    const std::string project = "open_project -reset proj\n"
                                "set_top " + job.top_function + "\n"
                                "add_files kernel.cpp\n"
                                "add_files -tb tb.cpp\n"
                                "open_solution -reset solution1\n"
                                "set_part " + job.target.part + "\n"
                                "create_clock -period " + clock + "\n";
    write_file(job.workdir / "csim.tcl", project + "csim_design\nexit\n");
    write_file(job.workdir / "csynth.tcl",
               project + "csynth_design\n"
                         "file mkdir reports\n"
                         "file copy -force proj/solution1/syn/report/" + job.top_function +
                         "_csynth.rpt reports/csynth.rpt\n"
                         "export_design -format ip_catalog\n"
                         "exit\n");
    write_file(job.workdir / "cosim.tcl", project + "cosim_design\nexit\n");
    write_file(job.workdir / "synth.tcl",
               "read_verilog [glob proj/solution1/syn/verilog/*.v]\n"
               "synth_design -top " + job.top_function + " -part " + job.target.part + "\n"
               "create_clock -period " + clock + " [get_ports ap_clk]\n"
               "file mkdir reports\n"
               "report_timing_summary -file reports/synth_timing.rpt\n"
               "report_utilization -file reports/synth_utilization.rpt\n"
               "exit\n");
}

SynthesisOutcome ExternalToolchain::run(Phase phase, const KernelJob& job) {
    fs::create_directories(job.workdir);
    write_file(job.workdir / "kernel.cpp", job.source);
    write_file(job.workdir / "tb.cpp", job.testbench);
    write_driver_scripts(job);
    const double clock = job.clock_ns > 0 ? job.clock_ns : job.target.default_clock_ns;
    return run_phase(cfg_, phase, job.workdir, {job.target.part, clock, job.top_function});
}

}  // namespace timelyhls
