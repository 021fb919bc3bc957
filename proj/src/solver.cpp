#include "acqlab/solver.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace acqlab {

void SearchConfig::validate() const {
    if (!(cut_min.count() > 0) || !(cut_max.count() > 0))
        throw Error(ErrorCode::InvalidParams, "cutoffs must be positive");
    if (cut_min > cut_max) throw Error(ErrorCode::InvalidParams, "cut_min must not exceed cut_max");
}

// ---------------------------------------------------------------- ConstraintGraph

void ConstraintGraph::add(const Constraint& c, bool negated) {
    CompiledConstraint cc;
    cc.kind = c.kind();
    cc.param = c.param();
    cc.arity = static_cast<std::uint8_t>(c.arity());
    std::copy(c.scope().begin(), c.scope().end(), cc.scope.begin());
    cc.negated = negated;
    const auto id = static_cast<std::uint32_t>(cons.size());
    cons.push_back(cc);
    for (VarId x : c.scope()) adj[x].push_back(id);
}

namespace {

void pop_last(ConstraintGraph& g) {
    const auto& cc = g.cons.back();
    for (int i = 0; i < cc.arity; ++i) g.adj[cc.scope[i]].pop_back();
    g.cons.pop_back();
}

bool subset_of(const Constraint& c, const std::vector<std::uint8_t>& member) {
    for (VarId x : c.scope())
        if (!member[x]) return false;
    return true;
}

}  // namespace

// ---------------------------------------------------------------- SearchState

SearchState::SearchState(const Vocabulary& vocab, std::span<const VarId> vars)
    : vocab_(&vocab), vars_(vars.begin(), vars.end()) {
    std::sort(vars_.begin(), vars_.end());
    const std::size_t n = vocab.size();
    offset_.resize(n + 1);
    for (std::size_t x = 0; x < n; ++x) offset_[x + 1] = offset_[x] + vocab.domain(static_cast<VarId>(x)).size();
    live_.assign(offset_[n], 1);
    live_count_.resize(n);
    for (std::size_t x = 0; x < n; ++x) live_count_[x] = vocab.domain(static_cast<VarId>(x)).size();
    assigned_.assign(n, -1);
}

std::vector<std::size_t> SearchState::live_indices(VarId x) const {
    std::vector<std::size_t> out;
    out.reserve(live_count_[x]);
    const std::size_t d = vocab_->domain(x).size();
    for (std::size_t i = 0; i < d; ++i)
        if (live_[offset_[x] + i]) out.push_back(i);
    return out;
}

void SearchState::assign(VarId x, std::size_t idx) {
    if (assigned_[x] < 0) ++n_assigned_;
    assigned_[x] = static_cast<long>(idx);
}

void SearchState::unassign(VarId x) {
    if (assigned_[x] >= 0) --n_assigned_;
    assigned_[x] = -1;
}

std::size_t SearchState::remove_value(VarId x, std::size_t idx) {
    auto& f = live_[offset_[x] + idx];
    if (f) {
        f = 0;
        --live_count_[x];
        trail_.emplace_back(x, idx);
    }
    return live_count_[x];
}

void SearchState::undo_to(std::size_t mark) {
    while (trail_.size() > mark) {
        auto [x, idx] = trail_.back();
        trail_.pop_back();
        live_[offset_[x] + idx] = 1;
        ++live_count_[x];
    }
}

Assignment SearchState::to_assignment() const {
    Assignment e(vocab_->size());
    for (VarId x : vars_)
        if (is_assigned(x)) e.set(x, value(x));
    return e;
}

// ---------------------------------------------------------------- heuristics

namespace {

// Weighted degree over hard constraints that still have another free variable.
std::uint64_t wdeg(const SearchState& st, VarId x, const HeuristicContext& ctx) {
    if (!ctx.hard) return 0;
    std::uint64_t w = 0;
    for (std::uint32_t id : ctx.hard->adj[x]) {
        const auto& c = ctx.hard->cons[id];
        for (int i = 0; i < c.arity; ++i) {
            VarId y = c.scope[i];
            if (y != x && !st.is_assigned(y)) {
                w += id < ctx.weights.size() ? ctx.weights[id] : 1;
                break;
            }
        }
    }
    return w;
}

}  // namespace

VarId pick_variable(const SearchState& st, VarHeuristic h, const HeuristicContext& ctx) {
    VarId best = 0;
    bool have = false;
    std::size_t best_size = 0;
    std::uint64_t best_w = 0;
    for (VarId x : st.vars()) {
        if (st.is_assigned(x)) continue;
        if (h == VarHeuristic::Lex) return x;
        const std::size_t size = st.live_size(x);
        bool better = false;
        switch (h) {
            case VarHeuristic::Dom:
                better = !have || size < best_size;
                if (better) best_size = size;
                break;
            case VarHeuristic::Bdeg: {
                const std::size_t d = ctx.soft ? ctx.soft->adj[x].size() : 0;
                better = !have || d > best_size;
                if (better) best_size = d;
                break;
            }
            case VarHeuristic::DomWdeg: {
                // Variables with zero weighted degree rank after all others.
                const std::uint64_t w = wdeg(st, x, ctx);
                if (!have) {
                    better = true;
                } else if ((w == 0) != (best_w == 0)) {
                    better = w != 0;
                } else if (w == 0) {
                    better = size < best_size;
                } else {
                    better = static_cast<unsigned __int128>(size) * best_w <
                             static_cast<unsigned __int128>(best_size) * w;
                }
                if (better) {
                    best_size = size;
                    best_w = w;
                }
                break;
            }
            case VarHeuristic::Lex: break;
        }
        if (better) {
            best = x;
            have = true;
        }
    }
    if (!have) throw Error(ErrorCode::Internal, "pick_variable called with every variable assigned");
    return best;
}

std::vector<std::size_t> order_values(const SearchState& st, VarId x, ValHeuristic h, const HeuristicContext& ctx,
                                      std::mt19937_64& rng) {
    std::vector<std::size_t> vals = st.live_indices(x);
    if (h == ValHeuristic::Random) {
        std::shuffle(vals.begin(), vals.end(), rng);
        return vals;
    }
    if (h == ValHeuristic::Lex || !ctx.soft) return vals;

    const auto dom = st.vocab().domain(x);
    std::vector<std::size_t> conflicts(dom.size(), 0);
    Value t[4];
    for (std::uint32_t id : ctx.soft->adj[x]) {
        const auto& c = ctx.soft->cons[id];
        int pos = -1;
        bool ready = true;
        for (int i = 0; i < c.arity && ready; ++i) {
            VarId y = c.scope[i];
            if (y == x) {
                pos = i;
            } else if (st.is_assigned(y)) {
                t[i] = st.value(y);
            } else {
                ready = false;
            }
        }
        if (!ready) continue;
        for (std::size_t idx : vals) {
            t[pos] = dom[idx];
            if (!c.test(t)) ++conflicts[idx];
        }
    }
    std::stable_sort(vals.begin(), vals.end(),
                     [&](std::size_t a, std::size_t b) { return conflicts[a] > conflicts[b]; });
    return vals;
}

// ---------------------------------------------------------------- engine

namespace {

enum class Objective { Satisfy, MaxComplete, MaxPartial, Discriminate };

struct EngineResult {
    std::optional<Assignment> best;
    std::size_t best_viol = 0;
    bool exhausted = false;
    bool hit_cut_min = false;
    bool hit_cut_max = false;
};

class Engine {
public:
    Engine(const Vocabulary& vocab, std::span<const VarId> vars, const ConstraintGraph& hard,
           std::span<std::uint32_t> weights, const ConstraintGraph* soft, VarHeuristic vh, ValHeuristic valh,
           std::mt19937_64& rng, Objective obj, Seconds cut_min, Seconds cut_max)
        : st_(vocab, vars),
          hard_(hard),
          weights_(weights),
          soft_(soft),
          vh_(vh),
          valh_(valh),
          rng_(rng),
          obj_(obj),
          cut_min_(std::chrono::duration_cast<Clock::duration>(cut_min)),
          cut_max_(std::chrono::duration_cast<Clock::duration>(cut_max)),
          hcnt_(hard.size(), 0),
          scnt_(soft ? soft->size() : 0, 0) {
        ctx_.hard = &hard_;
        ctx_.weights = weights_;
        ctx_.soft = soft_;
        soft_n_ = soft ? soft->size() : 0;
        // Partial examples only need consistency on covered scopes.
        fc_ = obj != Objective::MaxPartial;
    }

    EngineResult run() {
        start_ = Clock::now();
        EngineResult r;
        if (bound_ok()) dfs();
        r.exhausted = !stopped_;
        r.hit_cut_min = hit_min_;
        r.hit_cut_max = hit_max_;
        r.best = std::move(best_);
        r.best_viol = best_viol_;
        return r;
    }

private:
    bool out_of_time() {
        const auto el = Clock::now() - start_;
        if (el >= cut_max_) {
            hit_max_ = stopped_ = true;
            return true;
        }
        if ((obj_ == Objective::MaxComplete || obj_ == Objective::MaxPartial) && best_viol_ >= 1 &&
            el >= cut_min_) {
            hit_min_ = stopped_ = true;
            return true;
        }
        return false;
    }

    bool bound_ok() const {
        switch (obj_) {
            case Objective::Satisfy: return true;
            case Objective::MaxComplete:
            case Objective::MaxPartial: return viol_ + (soft_n_ - full_) > best_viol_;
            case Objective::Discriminate: return viol_ < soft_n_ && viol_ + (soft_n_ - full_) >= 1;
        }
        return true;
    }

    void record() {
        best_ = st_.to_assignment();
        best_viol_ = viol_;
    }

    bool leaf() {
        switch (obj_) {
            case Objective::Satisfy:
                record();
                stopped_ = true;
                return true;
            case Objective::MaxComplete:
                if (viol_ > best_viol_) record();
                return false;
            case Objective::MaxPartial: return false;
            case Objective::Discriminate:
                if (viol_ >= 1 && viol_ < soft_n_) {
                    record();
                    stopped_ = true;
                    return true;
                }
                return false;
        }
        return false;
    }

    bool soft_violated(const CompiledConstraint& c) const {
        Value t[4];
        for (int i = 0; i < c.arity; ++i) t[i] = st_.value(c.scope[i]);
        return !c.test(t);
    }

    bool assign(VarId x, std::size_t idx) {
        st_.assign(x, idx);
        for (std::uint32_t id : hard_.adj[x]) ++hcnt_[id];
        if (soft_) {
            for (std::uint32_t id : soft_->adj[x]) {
                const auto& c = soft_->cons[id];
                if (++scnt_[id] == c.arity) {
                    ++full_;
                    if (soft_violated(c)) ++viol_;
                }
            }
        }
        Value t[4];
        for (std::uint32_t id : hard_.adj[x]) {
            const auto& c = hard_.cons[id];
            const std::size_t k = hcnt_[id];
            if (k == c.arity) {
                for (int i = 0; i < c.arity; ++i) t[i] = st_.value(c.scope[i]);
                if (!c.test(t)) {
                    bump(id);
                    return false;
                }
            } else if (fc_ && k + 1 == c.arity) {
                int pos = 0;
                VarId u = 0;
                for (int i = 0; i < c.arity; ++i) {
                    VarId y = c.scope[i];
                    if (st_.is_assigned(y)) {
                        t[i] = st_.value(y);
                    } else {
                        pos = i;
                        u = y;
                    }
                }
                const auto dom = st_.vocab().domain(u);
                for (std::size_t vi = 0; vi < dom.size(); ++vi) {
                    if (!st_.live(u, vi)) continue;
                    t[pos] = dom[vi];
                    if (!c.test(t) && st_.remove_value(u, vi) == 0) {
                        bump(id);
                        return false;
                    }
                }
            }
        }
        return true;
    }

    void unassign(VarId x, std::size_t mark) {
        if (soft_) {
            for (std::uint32_t id : soft_->adj[x]) {
                const auto& c = soft_->cons[id];
                if (scnt_[id] == c.arity) {
                    --full_;
                    if (soft_violated(c)) --viol_;
                }
                --scnt_[id];
            }
        }
        for (std::uint32_t id : hard_.adj[x]) --hcnt_[id];
        st_.undo_to(mark);
        st_.unassign(x);
    }

    void bump(std::uint32_t id) {
        if (id < weights_.size()) ++weights_[id];
    }

    bool dfs() {
        if (out_of_time()) return true;
        if (st_.assigned_count() == st_.vars().size()) return leaf();
        const VarId x = pick_variable(st_, vh_, ctx_);
        const auto vals = order_values(st_, x, valh_, ctx_, rng_);
        for (std::size_t vi : vals) {
            const std::size_t mark = st_.trail_mark();
            const bool ok = assign(x, vi);
            if (ok && obj_ == Objective::MaxPartial && viol_ > best_viol_) record();
            bool stop = false;
            if (ok && bound_ok()) stop = dfs();
            unassign(x, mark);
            if (stop) return true;
        }
        return false;
    }

    SearchState st_;
    const ConstraintGraph& hard_;
    std::span<std::uint32_t> weights_;
    const ConstraintGraph* soft_;
    HeuristicContext ctx_;
    VarHeuristic vh_;
    ValHeuristic valh_;
    std::mt19937_64& rng_;
    Objective obj_;
    Clock::duration cut_min_;
    Clock::duration cut_max_;
    Clock::time_point start_;

    std::vector<std::uint8_t> hcnt_;
    std::vector<std::uint8_t> scnt_;
    bool fc_ = true;
    std::size_t soft_n_ = 0;
    std::size_t full_ = 0;
    std::size_t viol_ = 0;

    std::optional<Assignment> best_;
    std::size_t best_viol_ = 0;
    bool stopped_ = false;
    bool hit_min_ = false;
    bool hit_max_ = false;
};

std::vector<VarId> all_vars(const Vocabulary& vocab) {
    std::vector<VarId> v(vocab.size());
    std::iota(v.begin(), v.end(), VarId{0});
    return v;
}

ConstraintGraph graph_of(std::size_t n, std::span<const Constraint> cs) {
    ConstraintGraph g(n);
    g.cons.reserve(cs.size() + 1);
    for (const auto& c : cs) g.add(c);
    return g;
}

ConstraintGraph graph_of(const Bias& bias) {
    ConstraintGraph g(bias.num_vars());
    g.cons.reserve(bias.size());
    bias.for_each([&](const Constraint& c) { g.add(c); });
    return g;
}

// Exhaustive check of hard-in-scope ∧ ¬c over scope(c); nullopt when the tuple space is too large.
std::optional<bool> locally_implied(const Vocabulary& vocab, std::span<const Constraint> hard, const Constraint& c,
                                    Assignment* witness) {
    const auto scope = c.scope_set();
    std::size_t space = 1;
    for (VarId x : scope) {
        space *= vocab.domain(x).size();
        if (space > (1u << 20)) return std::nullopt;
    }
    std::vector<const Constraint*> local;
    for (const auto& h : hard) {
        bool inside = true;
        for (VarId x : h.scope()) inside = inside && std::binary_search(scope.begin(), scope.end(), x);
        if (inside) local.push_back(&h);
    }
    std::vector<std::size_t> idx(scope.size(), 0);
    Assignment e(vocab.size());
    for (;;) {
        for (std::size_t i = 0; i < scope.size(); ++i) e.set(scope[i], vocab.domain(scope[i])[idx[i]]);
        bool ok = evaluate(c, e) == Eval::Violated;
        for (const Constraint* h : local) ok = ok && evaluate(*h, e) != Eval::Violated;
        if (ok) {
            if (witness) *witness = e;
            return false;
        }
        std::size_t i = 0;
        while (i < scope.size() && ++idx[i] == vocab.domain(scope[i]).size()) idx[i++] = 0;
        if (i == scope.size()) return true;
    }
}

}  // namespace

// ---------------------------------------------------------------- Solver

Solver::Solver(const Vocabulary& vocab, SearchConfig config)
    : vocab_(&vocab), config_(config), rng_(config.seed) {
    config_.validate();
}

SolveResult Solver::solve(std::span<const Constraint> hard, Seconds budget) {
    const auto vars = all_vars(*vocab_);
    ConstraintGraph g = graph_of(vocab_->size(), hard);
    std::vector<std::uint32_t> w(g.size(), 1);
    Engine eng(*vocab_, vars, g, w, nullptr, config_.var == VarHeuristic::Bdeg ? VarHeuristic::DomWdeg : config_.var,
               ValHeuristic::Lex, rng_, Objective::Satisfy, budget, budget);
    auto r = eng.run();
    SolveResult out;
    if (r.best) {
        out.status = SolveStatus::Sat;
        out.solution = std::move(r.best);
    } else {
        out.status = r.exhausted ? SolveStatus::Unsat : SolveStatus::BudgetExceeded;
    }
    return out;
}

QGenResult Solver::generate(std::span<const Constraint> hard, const Bias& bias) {
    return config_.mode == QGenMode::MaxComplete ? qgen(hard, bias) : qgen_partial(hard, bias);
}

QGenResult Solver::qgen(std::span<const Constraint> hard, const Bias& bias) {
    QGenResult r;
    if (bias.empty()) {
        r.proven_none = true;
        return r;
    }
    if (weights_for_ != hard.size()) {
        weights_.assign(hard.size(), 1);
        weights_for_ = hard.size();
    }
    const auto vars = all_vars(*vocab_);
    ConstraintGraph g = graph_of(vocab_->size(), hard);
    ConstraintGraph soft = graph_of(bias);
    Engine eng(*vocab_, vars, g, weights_, &soft, config_.var, config_.val, rng_, Objective::MaxComplete,
               config_.cut_min, config_.cut_max);
    auto er = eng.run();
    r.cutoffs = {er.hit_cut_min, er.hit_cut_max};
    if (er.best) {
        r.example = std::move(er.best);
        r.violated_count = er.best_viol;
        return r;
    }
    if (er.exhausted) {
        r.proven_none = true;
        return r;
    }
    return fallback(hard, bias, false, r);
}

QGenResult Solver::qgen_partial(std::span<const Constraint> hard, const Bias& bias) {
    QGenResult r;
    if (bias.empty()) {
        r.proven_none = true;
        return r;
    }
    if (weights_for_ != hard.size()) {
        weights_.assign(hard.size(), 1);
        weights_for_ = hard.size();
    }
    const auto vars = all_vars(*vocab_);
    ConstraintGraph g = graph_of(vocab_->size(), hard);
    ConstraintGraph soft = graph_of(bias);
    Engine eng(*vocab_, vars, g, weights_, &soft, config_.var, config_.val, rng_, Objective::MaxPartial,
               config_.cut_min, config_.cut_max);
    auto er = eng.run();
    r.cutoffs = {er.hit_cut_min, er.hit_cut_max};
    if (er.best) {
        r.example = std::move(er.best);
        r.violated_count = er.best_viol;
        return r;
    }
    // An exhausted tree is no proof here: a dead prefix can hide a scope.
    // The local per-constraint pass is exact.
    return fallback(hard, bias, true, r);
}

// One solve per bias constraint: a solution of the hard set violating it.
QGenResult Solver::fallback(std::span<const Constraint> hard, const Bias& bias, bool partial, QGenResult r) {
    bool unknown = false;
    const std::size_t n = vocab_->size();
    const auto everything = all_vars(*vocab_);
    ConstraintGraph g = partial ? ConstraintGraph(n) : graph_of(n, hard);
    std::vector<std::uint8_t> member(n, 0);
    for (const Constraint& c : bias.constraints()) {
        std::vector<VarId> vars;
        if (partial) {
            g = ConstraintGraph(n);
            vars = c.scope_set();
            for (VarId x : vars) member[x] = 1;
            for (const auto& h : hard)
                if (subset_of(h, member)) g.add(h);
            for (VarId x : vars) member[x] = 0;
        }
        g.add(c, true);
        std::vector<std::uint32_t> w(g.size(), 1);
        Engine eng(*vocab_, partial ? std::span<const VarId>(vars) : std::span<const VarId>(everything), g, w,
                   nullptr, config_.var == VarHeuristic::Bdeg ? VarHeuristic::DomWdeg : config_.var, config_.val,
                   rng_, Objective::Satisfy, config_.cut_max, config_.cut_max);
        auto er = eng.run();
        pop_last(g);
        if (er.best) {
            r.example = std::move(er.best);
            r.violated_count = bias.kappa_size(*r.example);
            r.used_fallback = true;
            return r;
        }
        if (!er.exhausted) {
            unknown = true;
            r.cutoffs.hit_cut_max = true;
        }
    }
    r.used_fallback = true;
    r.proven_none = !unknown;
    return r;
}

Implication Solver::is_implied(std::span<const Constraint> hard, const Constraint& c, Seconds budget,
                               Assignment* witness) {
    for (const auto& h : hard)
        if (h == c) return Implication::Implied;
    auto local = locally_implied(*vocab_, hard, c, nullptr);
    if (local && *local) return Implication::Implied;
    const auto vars = all_vars(*vocab_);
    ConstraintGraph g = graph_of(vocab_->size(), hard);
    g.add(c, true);
    std::vector<std::uint32_t> w(g.size(), 1);
    Engine eng(*vocab_, vars, g, w, nullptr, VarHeuristic::DomWdeg, ValHeuristic::Lex, rng_, Objective::Satisfy,
               budget, budget);
    auto er = eng.run();
    if (er.best) {
        if (witness) *witness = *er.best;
        return Implication::NotImplied;
    }
    return er.exhausted ? Implication::Implied : Implication::Unknown;
}

std::optional<Assignment> Solver::gen_discriminating(std::span<const Constraint> hard,
                                                     std::span<const Constraint> delta, std::span<const VarId> scope,
                                                     Seconds budget) {
    if (delta.size() < 2) return std::nullopt;
    const std::size_t n = vocab_->size();
    std::vector<std::uint8_t> member(n, 0);
    for (VarId x : scope) member[x] = 1;
    ConstraintGraph g(n);
    for (const auto& h : hard)
        if (subset_of(h, member)) g.add(h);
    ConstraintGraph soft(n);
    for (const auto& d : delta) soft.add(d);
    std::vector<std::uint32_t> w(g.size(), 1);
    Engine eng(*vocab_, scope, g, w, &soft, VarHeuristic::Lex, config_.val, rng_, Objective::Discriminate, budget,
               budget);
    auto er = eng.run();
    return std::move(er.best);
}

EquivalenceReport check_equivalence(const Vocabulary& vocab, std::span<const Constraint> a,
                                    std::span<const Constraint> b, Seconds budget) {
    SearchConfig cfg;
    cfg.var = VarHeuristic::DomWdeg;
    cfg.val = ValHeuristic::Lex;
    cfg.cut_min = budget;
    cfg.cut_max = budget;
    Solver solver(vocab, cfg);
    EquivalenceReport rep;
    auto sweep = [&](std::span<const Constraint> from, std::span<const Constraint> to, std::vector<Constraint>& miss) {
        std::unordered_set<Constraint, ConstraintHash> have(from.begin(), from.end());
        for (const auto& c : to) {
            if (have.count(c)) continue;
            auto r = solver.is_implied(from, c, budget);
            if (r == Implication::NotImplied) {
                miss.push_back(c);
            } else if (r == Implication::Unknown) {
                miss.push_back(c);
                rep.complete = false;
            }
        }
    };
    sweep(a, b, rep.not_entailed_by_first);
    sweep(b, a, rep.not_entailed_by_second);
    rep.equivalent = rep.not_entailed_by_first.empty() && rep.not_entailed_by_second.empty();
    return rep;
}

}  // namespace acqlab
