#include "timelyhls/dse.hpp"

#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "timelyhls/errors.hpp"

namespace timelyhls {

std::vector<long long> unroll_ladder(long long trip_count) {
    std::vector<long long> out;
    for (long long f = 1; f < trip_count; f *= 2)
        if (trip_count % f == 0) out.push_back(f);
    out.push_back(std::max(trip_count, 1LL));
    return out;
}

std::vector<long long> partition_ladder(long long elements) {
    std::vector<long long> out;
    for (long long f = 1; f < elements; f *= 2) out.push_back(f);
    out.push_back(std::max(elements, 1LL));
    return out;
}

std::size_t ConfigSpace::size() const {
    std::size_t n = 1;
    for (const auto& d : dims) {
        if (n > std::numeric_limits<std::size_t>::max() / d.options.size()) return std::numeric_limits<std::size_t>::max();
        n *= d.options.size();
    }
    return n;
}

long long get(const PragmaConfig& cfg, const Dimension& d) {
    switch (d.kind) {
    case Dimension::Kind::pipeline: return cfg.loops.at(d.index).pipeline ? 1 : 0;
    case Dimension::Kind::unroll: return cfg.loops.at(d.index).unroll_factor;
    case Dimension::Kind::partition: return cfg.arrays.at(d.index).partition_factor;
    }
    return 0;
}

void set(PragmaConfig& cfg, const Dimension& d, long long value) {
    switch (d.kind) {
    case Dimension::Kind::pipeline: cfg.loops.at(d.index).pipeline = value != 0; break;
    case Dimension::Kind::unroll: cfg.loops.at(d.index).unroll_factor = value; break;
    case Dimension::Kind::partition: cfg.arrays.at(d.index).partition_factor = value; break;
    }
}

ConfigSpace full_space(const KernelModel& model) {
    ConfigSpace s;
    for (std::size_t i = 0; i < model.loops.size(); ++i) {
        s.origin.loops.push_back({model.loops[i].label, false, 1});
        s.dims.push_back({Dimension::Kind::pipeline, i, {0, 1}});
        auto ladder = unroll_ladder(model.loops[i].trip_count);
        if (ladder.size() > 1) s.dims.push_back({Dimension::Kind::unroll, i, std::move(ladder)});
    }
    for (std::size_t i = 0; i < model.arrays.size(); ++i) {
        s.origin.arrays.push_back({model.arrays[i].name, 1});
        auto ladder = partition_ladder(model.arrays[i].elements);
        if (ladder.size() > 1) s.dims.push_back({Dimension::Kind::partition, i, std::move(ladder)});
    }
    return s;
}

ConfigSpace restrict_space(const ConfigSpace& space, std::size_t max_points) {
    ConfigSpace out;
    out.origin = space.origin;
    std::size_t n = 1;
    for (const auto& d : space.dims) {
        if (n * d.options.size() > max_points) continue;
        n *= d.options.size();
        out.dims.push_back(d);
    }
    return out;
}

KernelModel apply_config(const KernelModel& model, const PragmaConfig& cfg) {
    KernelModel m = without_pragmas(model);
    for (const auto& lc : cfg.loops) {
        LoopDescriptor* l = m.find_loop(lc.label);
        if (!l) throw MappingError("config names unknown loop '" + lc.label + "'");
        if (lc.pipeline) l->applied.pipeline_ii = 1;
        l->applied.unroll_factor = lc.unroll_factor;
    }
    for (const auto& ac : cfg.arrays) {
        ArrayDescriptor* a = m.find_array(ac.name);
        if (!a) throw MappingError("config names unknown array '" + ac.name + "'");
        a->partition_factor = ac.partition_factor;
    }
    return m;
}

void validate(const AnnealSchedule& s) {
    if (!(s.t0 > 0)) throw ConfigError("anneal t0 must be > 0");
    if (!(s.alpha > 0 && s.alpha < 1)) throw ConfigError("anneal alpha must lie in (0, 1)");
    if (s.steps < 1) throw ConfigError("anneal steps must be >= 1");
}

double objective(const QoRReport& qor, double /*clock_ns*/) {
    double penalties = static_cast<double>(qor.resources.overflow.size());
    if (qor.timing.wns_ns < 0) penalties += 1;
    return static_cast<double>(qor.latency_cycles) + kConstraintPenalty * penalties;
}

PragmaConfig neighbor(const PragmaConfig& cfg, const ConfigSpace& space, std::mt19937_64& rng) {
    std::vector<const Dimension*> mutable_dims;
    for (const auto& d : space.dims)
        if (d.options.size() > 1) mutable_dims.push_back(&d);
    if (mutable_dims.empty()) return cfg;

    const Dimension& d = *mutable_dims[std::uniform_int_distribution<std::size_t>(0, mutable_dims.size() - 1)(rng)];
    PragmaConfig out = cfg;
    const long long cur = get(cfg, d);
    std::size_t pos = 0;
    while (pos < d.options.size() && d.options[pos] != cur) ++pos;
    if (pos == d.options.size()) pos = 0;  // off-ladder value: snap to the bottom rung first

    std::size_t next;
    if (d.kind == Dimension::Kind::pipeline || pos == 0)
        next = pos == 0 ? 1 : 0;
    else if (pos + 1 == d.options.size())
        next = pos - 1;
    else
        next = std::uniform_int_distribution<int>(0, 1)(rng) ? pos + 1 : pos - 1;
    set(out, d, d.options[next]);
    return out;
}

namespace {

struct Evaluator {
    const KernelModel& model;
    const FpgaTarget& target;
    double clock;
    std::map<std::vector<long long>, std::pair<double, QoRReport>> cache;

    std::vector<long long> key(const PragmaConfig& c) const {
        std::vector<long long> k;
        for (const auto& l : c.loops) k.insert(k.end(), {l.pipeline ? 1 : 0, l.unroll_factor});
        for (const auto& a : c.arrays) k.push_back(a.partition_factor);
        return k;
    }

    const std::pair<double, QoRReport>& operator()(const PragmaConfig& c) {
        auto k = key(c);
        auto it = cache.find(k);
        if (it != cache.end()) return it->second;
        QoRReport q = simulate(apply_config(model, c), target, clock);
        const double obj = objective(q, clock);
        return cache.emplace(std::move(k), std::make_pair(obj, std::move(q))).first->second;
    }
};

double clock_for(const FpgaTarget& t, double clock_ns) { return clock_ns > 0 ? clock_ns : t.default_clock_ns; }

}  // namespace

AnnealResult anneal(const KernelModel& model, const FpgaTarget& target, const AnnealSchedule& schedule,
                    const ConfigSpace& space, double clock_ns) {
    validate(schedule);
    Evaluator eval{model, target, clock_for(target, clock_ns), {}};
    std::mt19937_64 rng(schedule.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    PragmaConfig cur = space.origin;
    double cur_obj = eval(cur).first;
    AnnealResult r;
    r.best = cur;
    r.best_qor = eval(cur).second;
    r.best_objective = cur_obj;
    r.trace.push_back({0, cur_obj, cur_obj});

    double t = schedule.t0;
    for (std::size_t step = 1; step <= schedule.steps; ++step) {
        PragmaConfig cand = neighbor(cur, space, rng);
        const auto& [cand_obj, cand_qor] = eval(cand);
        const double delta = cand_obj - cur_obj;
        const double u = unit(rng);  // drawn every step so the stream does not depend on delta
        if (delta <= 0 || u < std::exp(-delta / t)) {
            cur = std::move(cand);
            cur_obj = cand_obj;
            if (cur_obj < r.best_objective) {
                r.best = cur;
                r.best_qor = cand_qor;
                r.best_objective = cur_obj;
            }
        }
        r.trace.push_back({step, cur_obj, r.best_objective});
        t *= schedule.alpha;
    }
    return r;
}

AnnealResult anneal(const KernelModel& model, const FpgaTarget& target, const AnnealSchedule& schedule,
                    double clock_ns) {
    return anneal(model, target, schedule, full_space(model), clock_ns);
}

ExhaustiveResult brute_force(const KernelModel& model, const FpgaTarget& target, const ConfigSpace& space,
                             double clock_ns, std::size_t limit) {
    if (space.size() > limit)
        throw ContractError("config space has " + std::to_string(space.size()) + " points, limit is " +
                            std::to_string(limit));
    const double clock = clock_for(target, clock_ns);
    ExhaustiveResult r;
    r.best_objective = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(space.dims.size(), 0);
    while (true) {
        PragmaConfig c = space.origin;
        for (std::size_t i = 0; i < idx.size(); ++i) set(c, space.dims[i], space.dims[i].options[idx[i]]);
        const double obj = objective(simulate(apply_config(model, c), target, clock), clock);
        ++r.evaluated;
        if (obj < r.best_objective) {
            r.best_objective = obj;
            r.best = std::move(c);
        }
        std::size_t i = 0;
        while (i < idx.size() && ++idx[i] == space.dims[i].options.size()) idx[i++] = 0;
        if (i == idx.size()) break;
    }
    return r;
}

std::string anneal_result_json(const AnnealResult& r, const std::string& benchmark_id, const FpgaTarget& target,
                               const AnnealSchedule& s) {
    nlohmann::ordered_json j;
    j["benchmark_id"] = benchmark_id;
    j["part"] = target.part;
    j["schedule"] = {{"t0", s.t0}, {"alpha", s.alpha}, {"steps", s.steps}, {"seed", s.seed}};
    auto& loops = j["best_config"]["loops"] = nlohmann::ordered_json::array();
    for (const auto& l : r.best.loops)
        loops.push_back({{"label", l.label}, {"pipeline", l.pipeline}, {"unroll_factor", l.unroll_factor}});
    auto& arrays = j["best_config"]["arrays"] = nlohmann::ordered_json::array();
    for (const auto& a : r.best.arrays) arrays.push_back({{"name", a.name}, {"partition_factor", a.partition_factor}});
    j["best_objective"] = r.best_objective;
    j["best_qor"] = nlohmann::ordered_json::parse(canonical_json(r.best_qor));
    auto& trace = j["trace"] = nlohmann::ordered_json::array();
    for (const auto& p : r.trace) trace.push_back({p.step, p.objective, p.best});
    return j.dump(2) + "\n";
}

}  // namespace timelyhls
