#include "acqlab/harness.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace acqlab {

namespace {

Error bad(const std::string& what) { return Error(ErrorCode::InvalidParams, what); }

std::string fmt(double v) {
    std::ostringstream o;
    o << std::setprecision(6) << v;
    return o.str();
}

struct Column {
    const char* name;
    bool timing;
    double (*get)(const RunRecord&);
};

const std::vector<Column>& columns() {
    static const std::vector<Column> cols = {
        {"learned", false, [](const RunRecord& r) { return double(r.metrics.learned_size); }},
        {"queries", false, [](const RunRecord& r) { return double(r.metrics.total_queries); }},
        {"q_bar", false, [](const RunRecord& r) { return r.metrics.avg_query_size; }},
        {"complete", false, [](const RunRecord& r) { return double(r.metrics.complete_queries); }},
        {"bias_left", false, [](const RunRecord& r) { return double(r.bias_remaining); }},
        {"avg_wait", true, [](const RunRecord& r) { return r.metrics.avg_wait; }},
        {"max_wait", true, [](const RunRecord& r) { return r.metrics.max_wait; }},
        {"t_queries", true, [](const RunRecord& r) { return r.metrics.t_queries; }},
        {"t_total", true, [](const RunRecord& r) { return r.metrics.t_total; }},
        {"cut_min_hits", true, [](const RunRecord& r) { return double(r.metrics.cut_min_hits); }},
        {"cut_max_hits", true, [](const RunRecord& r) { return double(r.metrics.cut_max_hits); }},
        {"fallback_uses", true, [](const RunRecord& r) { return double(r.metrics.fallback_uses); }},
        {"qgen_calls", true, [](const RunRecord& r) { return double(r.metrics.qgen_calls); }},
    };
    return cols;
}

}  // namespace

void ExperimentPlan::validate() const {
    if (runs < 1) throw bad("runs must be >= 1");
    config.search.validate();
    if (config.findallscopes_cutoff.count() <= 0) throw bad("findallscopes cutoff must be > 0");
    if (verify_budget.count() <= 0) throw bad("verify budget must be > 0");
    if (!instance && benchmark.empty()) throw bad("no benchmark or instance given");
}

bool ExperimentReport::any_collapse() const {
    for (const auto& r : runs)
        if (r.status == Outcome::Collapse) return true;
    return false;
}

std::vector<std::pair<std::string, Summary>> ExperimentReport::aggregate() const {
    std::vector<std::pair<std::string, Summary>> out;
    for (const auto& c : columns()) {
        Summary s;
        if (!runs.empty()) {
            for (const auto& r : runs) s.mean += c.get(r);
            s.mean /= double(runs.size());
            double ss = 0;
            for (const auto& r : runs) ss += (c.get(r) - s.mean) * (c.get(r) - s.mean);
            s.stddev = runs.size() > 1 ? std::sqrt(ss / double(runs.size() - 1)) : 0.0;
        }
        out.emplace_back(c.name, s);
    }
    return out;
}

// splitmix64 step over master + index.
std::uint64_t derive_seed(std::uint64_t master, std::size_t index) noexcept {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

ExperimentReport run_experiment(const ExperimentPlan& plan, const RunHook& on_run) {
    plan.validate();
    const Instance inst = plan.instance ? *plan.instance : build_benchmark(plan.benchmark, plan.params);
    inst.validate();
    const Bias bias0 = inst.make_bias();

    ExperimentReport rep;
    rep.instance_name = inst.name;
    rep.num_vars = inst.vocab.size();
    rep.target_size = inst.target.size();
    rep.bias_size = bias0.size();
    rep.config = plan.config;
    rep.fingerprint = config_fingerprint(plan.config);

    for (std::size_t i = 0; i < plan.runs; ++i) {
        AcquisitionConfig cfg = plan.config;
        cfg.search.seed = derive_seed(plan.master_seed, i);
        SimulatedOracle oracle(inst.vocab.size(), inst.target);
        Acquisition acq(inst.vocab, bias0, oracle, cfg);
        auto res = acq.run();

        RunRecord rec;
        rec.index = i;
        rec.seed = cfg.search.seed;
        rec.status = res.status;
        rec.metrics = res.metrics;
        rec.bias_remaining = res.bias_remaining;
        if (plan.curves) rec.curve = res.curve;
        rec.learned = res.learned;
        if (plan.verify && res.status != Outcome::Collapse) {
            const auto eq = check_equivalence(inst.vocab, res.learned, inst.target, plan.verify_budget);
            rec.verify_complete = eq.complete;
            if (eq.complete || !eq.equivalent) rec.equivalent = eq.equivalent;
        }
        if (on_run) on_run(rec);
        rep.runs.push_back(std::move(rec));
    }
    return rep;
}

std::string config_fingerprint(const AcquisitionConfig& c) {
    std::ostringstream o;
    o << algorithm_name(c.algorithm) << "/fs" << (c.findscope == FindScopeVariant::V1 ? 1 : 2) << "/"
      << qgen_name(c.search.mode) << "/" << var_heuristic_name(c.search.var) << "/" << val_heuristic_name(c.search.val)
      << "/cut" << fmt(c.search.cut_min.count()) << "-" << fmt(c.search.cut_max.count());
    if (c.algorithm == Algorithm::MultiAcq) o << "/fas" << fmt(c.findallscopes_cutoff.count());
    return o.str();
}

std::string report_csv(const ExperimentReport& r, bool include_timings) {
    std::ostringstream o;
    o << "instance,config,cut_min,cut_max,run,seed,status";
    for (const auto& c : columns())
        if (include_timings || !c.timing) o << "," << c.name;
    o << ",equivalent\n";
    for (const auto& run : r.runs) {
        o << r.instance_name << "," << r.fingerprint << "," << fmt(r.config.search.cut_min.count()) << ","
          << fmt(r.config.search.cut_max.count()) << "," << run.index << "," << run.seed << ","
          << outcome_name(run.status);
        for (const auto& c : columns())
            if (include_timings || !c.timing) o << "," << fmt(c.get(run));
        o << "," << (run.equivalent ? (*run.equivalent ? "yes" : "no") : "");
        o << "\n";
    }
    return o.str();
}

json metrics_to_json(const Metrics& m, bool include_timings) {
    json j = {{"learned", m.learned_size},
              {"queries", m.total_queries},
              {"q_bar", m.avg_query_size},
              {"complete", m.complete_queries}};
    if (include_timings) {
        j["avg_wait"] = m.avg_wait;
        j["max_wait"] = m.max_wait;
        j["t_queries"] = m.t_queries;
        j["t_total"] = m.t_total;
        j["cut_min_hits"] = m.cut_min_hits;
        j["cut_max_hits"] = m.cut_max_hits;
        j["fallback_uses"] = m.fallback_uses;
        j["qgen_calls"] = m.qgen_calls;
        j["think_time"] = m.think_time;
    }
    return j;
}

json run_to_json(const RunRecord& run, bool include_timings) {
    json jr = {{"run", run.index},
               {"seed", run.seed},
               {"status", outcome_name(run.status)},
               {"bias_left", run.bias_remaining},
               {"metrics", metrics_to_json(run.metrics, include_timings)}};
    if (run.equivalent) jr["equivalent"] = *run.equivalent;
    if (!run.curve.empty()) {
        json c = json::array();
        for (const auto& p : run.curve) {
            json pt = {{"learned", p.learned}, {"queries", p.queries}};
            if (include_timings) pt["elapsed"] = p.elapsed;
            c.push_back(pt);
        }
        jr["curve"] = c;
    }
    return jr;
}

json report_json(const ExperimentReport& r, bool include_timings) {
    json j;
    j["instance"] = {{"name", r.instance_name},
                     {"variables", r.num_vars},
                     {"target", r.target_size},
                     {"bias", r.bias_size}};
    j["config"] = config_to_json(r.config);
    j["config"].erase("seed");
    j["fingerprint"] = r.fingerprint;
    json runs = json::array();
    for (const auto& run : r.runs) runs.push_back(run_to_json(run, include_timings));
    j["runs"] = runs;
    json agg = json::object();
    const auto& cols = columns();
    const auto a = r.aggregate();
    for (std::size_t i = 0; i < cols.size(); ++i)
        if (include_timings || !cols[i].timing) agg[a[i].first] = {{"mean", a[i].second.mean}, {"stddev", a[i].second.stddev}};
    j["aggregate"] = agg;
    return j;
}

Algorithm parse_algorithm(std::string_view s) {
    if (s == "quacq") return Algorithm::QuAcq;
    if (s == "multiacq") return Algorithm::MultiAcq;
    if (s == "mquacq") return Algorithm::MQuAcq;
    throw bad("unknown algorithm '" + std::string(s) + "'");
}

FindScopeVariant parse_findscope(std::string_view s) {
    if (s == "1") return FindScopeVariant::V1;
    if (s == "2") return FindScopeVariant::V2;
    throw bad("findscope must be 1 or 2");
}

QGenMode parse_qgen(std::string_view s) {
    if (s == "max") return QGenMode::MaxComplete;
    if (s == "maxb") return QGenMode::MaxBPartial;
    throw bad("qgen must be max or maxb");
}

VarHeuristic parse_var_heuristic(std::string_view s) {
    if (s == "domwdeg") return VarHeuristic::DomWdeg;
    if (s == "bdeg") return VarHeuristic::Bdeg;
    if (s == "dom") return VarHeuristic::Dom;
    if (s == "lex") return VarHeuristic::Lex;
    throw bad("unknown variable heuristic '" + std::string(s) + "'");
}

ValHeuristic parse_val_heuristic(std::string_view s) {
    if (s == "random") return ValHeuristic::Random;
    if (s == "lex") return ValHeuristic::Lex;
    if (s == "maxv") return ValHeuristic::MaxV;
    throw bad("unknown value heuristic '" + std::string(s) + "'");
}

std::string_view qgen_name(QGenMode m) noexcept { return m == QGenMode::MaxComplete ? "max" : "maxb"; }

std::string_view var_heuristic_name(VarHeuristic h) noexcept {
    switch (h) {
        case VarHeuristic::DomWdeg: return "domwdeg";
        case VarHeuristic::Bdeg: return "bdeg";
        case VarHeuristic::Dom: return "dom";
        case VarHeuristic::Lex: return "lex";
    }
    return "?";
}

std::string_view val_heuristic_name(ValHeuristic h) noexcept {
    switch (h) {
        case ValHeuristic::Random: return "random";
        case ValHeuristic::Lex: return "lex";
        case ValHeuristic::MaxV: return "maxv";
    }
    return "?";
}

AcquisitionConfig config_from_json(const json& j, AcquisitionConfig c) {
    if (!j.is_object()) throw bad("config must be an object");
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const auto& k = it.key();
            const auto& v = it.value();
            if (k == "algo") c.algorithm = parse_algorithm(v.get<std::string>());
            else if (k == "findscope") c.findscope = parse_findscope(v.is_string() ? v.get<std::string>() : std::to_string(v.get<int>()));
            else if (k == "qgen") c.search.mode = parse_qgen(v.get<std::string>());
            else if (k == "var") c.search.var = parse_var_heuristic(v.get<std::string>());
            else if (k == "val") c.search.val = parse_val_heuristic(v.get<std::string>());
            else if (k == "cutmin") c.search.cut_min = Seconds(v.get<double>());
            else if (k == "cutmax") c.search.cut_max = Seconds(v.get<double>());
            else if (k == "seed") c.search.seed = v.get<std::uint64_t>();
            else if (k == "fas_cutoff") c.findallscopes_cutoff = Seconds(v.get<double>());
            else throw bad("unknown config key '" + k + "'");
        }
    } catch (const json::exception& e) {
        throw bad(std::string("bad config value: ") + e.what());
    }
    c.search.validate();
    return c;
}

json config_to_json(const AcquisitionConfig& c) {
    return {{"algo", algorithm_name(c.algorithm)},
            {"findscope", c.findscope == FindScopeVariant::V1 ? 1 : 2},
            {"qgen", qgen_name(c.search.mode)},
            {"var", var_heuristic_name(c.search.var)},
            {"val", val_heuristic_name(c.search.val)},
            {"cutmin", c.search.cut_min.count()},
            {"cutmax", c.search.cut_max.count()},
            {"seed", c.search.seed},
            {"fas_cutoff", c.findallscopes_cutoff.count()}};
}

}  // namespace acqlab
