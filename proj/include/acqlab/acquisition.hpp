#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "acqlab/model.hpp"
#include "acqlab/oracle.hpp"
#include "acqlab/solver.hpp"

namespace acqlab {

enum class Algorithm { QuAcq, MultiAcq, MQuAcq };
enum class FindScopeVariant { V1, V2 };
enum class Outcome { Converged, PrematureConvergence, Collapse };

std::string_view outcome_name(Outcome o) noexcept;
std::string_view algorithm_name(Algorithm a) noexcept;

struct AcquisitionConfig {
    Algorithm algorithm = Algorithm::MQuAcq;
    FindScopeVariant findscope = FindScopeVariant::V2;  // ignored by MultiAcq
    SearchConfig search;                                // search.mode selects max / max_B
    std::vector<Constraint> background;
    Seconds findallscopes_cutoff{5.0};
    std::optional<Seconds> implied_budget;  // FindC implication checks; defaults to search.cut_min
};

struct Metrics {
    std::size_t learned_size = 0;
    std::size_t total_queries = 0;
    double avg_query_size = 0;
    std::size_t complete_queries = 0;
    double avg_wait = 0;
    double max_wait = 0;
    double t_queries = 0;
    double t_total = 0;
    std::size_t cut_min_hits = 0;
    std::size_t cut_max_hits = 0;
    std::size_t fallback_uses = 0;
    std::size_t qgen_calls = 0;
    double think_time = 0;  // oracle-side seconds, excluded from waits
};

struct CurvePoint {
    std::size_t learned = 0;
    std::size_t queries = 0;
    double elapsed = 0;
};

struct AcquisitionResult {
    Outcome status = Outcome::Converged;
    std::vector<Constraint> learned;
    Metrics metrics;
    std::vector<CurvePoint> curve;
    std::size_t bias_remaining = 0;
    QueryLog log;
};

using Scope = std::vector<VarId>;  // ascending

struct FindAllConsEvent {
    std::string call;  // dotted call path, "0" for the top call
    Scope y;
    std::vector<Scope> scopes;
    std::optional<bool> answer;  // set when e_Y was posted
    std::vector<Scope> returned;
};

struct Trace {
    std::function<void(const FindAllConsEvent&)> find_all_cons;
    std::function<void(const Assignment& e, const Scope& s)> scope_found;
    std::function<void(const Constraint&)> learned;
};

class Acquisition;
using ProgressHook = std::function<void(const Acquisition&)>;

// One acquisition run: owns B, C_L, the solver and the query log.
class Acquisition {
public:
    Acquisition(const Vocabulary& vocab, Bias bias, Oracle& oracle, AcquisitionConfig config);

    AcquisitionResult run();

    // Building blocks.
    Scope find_scope(const Assignment& e, Scope r, Scope y, bool ask_query);
    Scope find_scope2(const Assignment& e, Scope r, Scope y, bool ask_query);
    void set_rej(std::size_t rej) noexcept { rej_ = static_cast<long>(rej); }
    long rej() const noexcept { return rej_; }
    std::optional<Constraint> find_c(const Assignment& e, const Scope& y);
    bool find_all_scopes(const Assignment& e, const Scope& y, std::vector<Scope>& mses);
    std::vector<Scope> find_all_cons(const Assignment& e, const Scope& y, const std::vector<Scope>& scopes);
    void learn(const Constraint& c);

    // Removal order used by FindAllScopes; defaults to descending variable index.
    void set_removal_order(std::vector<VarId> order);

    const Bias& bias() const noexcept { return bias_; }
    const LearnedNetwork& learned() const noexcept { return learned_; }
    const QueryLog& log() const noexcept { return log_; }
    bool collapsed() const noexcept { return collapse_; }
    Trace& trace() noexcept { return trace_; }
    void on_progress(ProgressHook hook) { progress_ = std::move(hook); }
    Metrics metrics() const;
    double elapsed() const;

private:
    struct FasCutoff {};

    bool ask(const Assignment& e, QueryOrigin origin);
    Scope locate_scope(const Assignment& e, const Scope& y);
    std::vector<Scope> fac(const Assignment& e, const Scope& y, const std::vector<Scope>& scopes,
                           const std::string& path, bool top);
    bool fas(const Assignment& e, const Scope& y, std::vector<Scope>& mses);
    std::optional<Outcome> iterate_quacq(const Assignment& e);
    std::optional<Outcome> iterate_multiacq(const Assignment& e);
    std::optional<Outcome> iterate_mquacq(const Assignment& e);
    std::vector<Scope> run_fas(const Assignment& e, const Scope& y, std::vector<Scope> known, bool& cut);

    const Vocabulary* vocab_;
    Bias bias_;
    Oracle* oracle_;
    AcquisitionConfig cfg_;
    Solver solver_;
    std::mt19937_64 rng_;
    LearnedNetwork learned_;
    QueryLog log_;
    std::vector<CurvePoint> curve_;
    Trace trace_;
    ProgressHook progress_;

    Clock::time_point start_;
    Clock::time_point last_event_;
    long rej_ = -1;
    bool in_fs2_ = false;
    bool collapse_ = false;

    std::size_t cut_min_hits_ = 0;
    std::size_t cut_max_hits_ = 0;
    std::size_t fallback_uses_ = 0;
    std::size_t qgen_calls_ = 0;
    double t_total_ = -1;

    std::vector<std::size_t> removal_rank_;
    std::unordered_map<std::string, bool> fas_memo_;
    std::optional<Clock::time_point> fas_deadline_;
    std::size_t fas_found_ = 0;
};

// Convenience: build bias from the instance, run against a simulated oracle.
AcquisitionResult acquire(const Instance& inst, const AcquisitionConfig& config);

}  // namespace acqlab
