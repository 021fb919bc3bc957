#include "acqlab/acquisition.hpp"

#include <algorithm>
#include <numeric>

namespace acqlab {

std::string_view outcome_name(Outcome o) noexcept {
    switch (o) {
        case Outcome::Converged: return "Converged";
        case Outcome::PrematureConvergence: return "PrematureConvergence";
        case Outcome::Collapse: return "Collapse";
    }
    return "?";
}

std::string_view algorithm_name(Algorithm a) noexcept {
    switch (a) {
        case Algorithm::QuAcq: return "quacq";
        case Algorithm::MultiAcq: return "multiacq";
        case Algorithm::MQuAcq: return "mquacq";
    }
    return "?";
}

namespace {

Scope unite(const Scope& a, const Scope& b) {
    Scope out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

Scope without(const Scope& y, VarId x) {
    Scope out;
    out.reserve(y.size());
    for (VarId v : y)
        if (v != x) out.push_back(v);
    return out;
}

bool proper_subset(const Scope& a, const Scope& b) {
    return a.size() < b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool has_scope(const std::vector<Scope>& set, const Scope& s) {
    return std::find(set.begin(), set.end(), s) != set.end();
}

void add_scope(std::vector<Scope>& set, const Scope& s) {
    if (!has_scope(set, s)) set.push_back(s);
}

std::string bits(const Scope& y, std::size_t n) {
    std::string k((n + 7) / 8, '\0');
    for (VarId x : y) k[x / 8] = static_cast<char>(k[x / 8] | (1 << (x % 8)));
    return k;
}

double secs(Clock::duration d) { return std::chrono::duration<double>(d).count(); }

}  // namespace

Acquisition::Acquisition(const Vocabulary& vocab, Bias bias, Oracle& oracle, AcquisitionConfig config)
    : vocab_(&vocab),
      bias_(std::move(bias)),
      oracle_(&oracle),
      cfg_(std::move(config)),
      solver_(vocab, cfg_.search),
      rng_(cfg_.search.seed ^ 0xA5A5A5A55A5A5A5AULL) {
    if (bias_.num_vars() != vocab.size()) throw Error(ErrorCode::InvalidArgument, "bias/vocabulary size mismatch");
    start_ = last_event_ = Clock::now();
    std::vector<VarId> order(vocab.size());
    std::iota(order.rbegin(), order.rend(), VarId{0});
    set_removal_order(order);
    for (const auto& c : cfg_.background) {
        if (c.max_var() >= vocab.size())
            throw Error(ErrorCode::InvalidArgument, "background constraint outside vocabulary");
        learned_.add(c);
        bias_.remove(c);
    }
}

void Acquisition::set_removal_order(std::vector<VarId> order) {
    removal_rank_.assign(vocab_->size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i) removal_rank_[order[i]] = i;
}

double Acquisition::elapsed() const { return secs(Clock::now() - start_); }

bool Acquisition::ask(const Assignment& e, QueryOrigin origin) {
    if (progress_) progress_(*this);
    QueryRecord r;
    r.kappa = bias_.kappa_size(e);
    const auto t0 = Clock::now();
    r.generation = secs(t0 - last_event_);
    r.timestamp = secs(t0 - start_);
    r.answer = oracle_->ask(e);
    const auto t1 = Clock::now();
    last_event_ = t1;
    r.think = secs(t1 - t0);
    r.size = e.assigned_count();
    r.complete = e.is_complete();
    r.origin = origin;
    r.rej = in_fs2_ ? rej_ : -1;
    r.example = e;
    log_.append(std::move(r));
    return log_.records().back().answer;
}

void Acquisition::learn(const Constraint& c) {
    learned_.add(c);
    bias_.remove(c);
    curve_.push_back({learned_.size(), log_.total(), elapsed()});
    if (trace_.learned) trace_.learned(c);
}

// ---------------------------------------------------------------- FindScope

Scope Acquisition::find_scope(const Assignment& e, Scope r, Scope y, bool ask_query) {
    if (ask_query) {
        const Assignment er = e.project(r);
        if (ask(er, QueryOrigin::FindScope))
            bias_.remove_violated(er);
        else
            return {};
    }
    if (y.size() == 1) return y;
    const std::size_t half = (y.size() + 1) / 2;
    Scope y1(y.begin(), y.begin() + static_cast<long>(half));
    Scope y2(y.begin() + static_cast<long>(half), y.end());
    Scope s1 = find_scope(e, unite(r, y1), y2, true);
    Scope s2 = find_scope(e, unite(r, s1), y1, !s1.empty());
    return unite(s1, s2);
}

Scope Acquisition::find_scope2(const Assignment& e, Scope r, Scope y, bool ask_query) {
    if (ask_query) {
        const Assignment er = e.project(r);
        const std::size_t k = bias_.kappa_size(er);
        if (k > 0) {
            if (rej_ == static_cast<long>(k)) return {};
            in_fs2_ = true;
            const bool yes = ask(er, QueryOrigin::FindScope);
            in_fs2_ = false;
            if (yes) {
                bias_.remove_violated(er);
            } else {
                rej_ = static_cast<long>(k);
                return {};
            }
        }
    }
    if (y.size() == 1) return y;
    const std::size_t half = (y.size() + 1) / 2;
    Scope y1(y.begin(), y.begin() + static_cast<long>(half));
    Scope y2(y.begin() + static_cast<long>(half), y.end());
    Scope s1 = find_scope2(e, unite(r, y1), y2, true);
    Scope s2 = find_scope2(e, unite(r, s1), y1, !s1.empty());
    return unite(s1, s2);
}

// Caller has just received "no" for e_Y.
Scope Acquisition::locate_scope(const Assignment& e, const Scope& y) {
    Scope s;
    if (cfg_.findscope == FindScopeVariant::V2) {
        rej_ = static_cast<long>(bias_.kappa_size(e.project(y)));
        s = find_scope2(e, {}, y, false);
    } else {
        s = find_scope(e, {}, y, false);
    }
    if (trace_.scope_found) trace_.scope_found(e, s);
    return s;
}

// ---------------------------------------------------------------- FindC

std::optional<Constraint> Acquisition::find_c(const Assignment& e, const Scope& y) {
    if (y.empty() || y.size() > 4) return std::nullopt;
    const auto cl = learned_.constraints();
    const Seconds budget = cfg_.implied_budget.value_or(cfg_.search.cut_min);
    const Assignment ey = e.project(y);
    // Within one FindAllCons example, C_L grows after e was generated, so e_Y
    // may violate something C_L now implies. That one stays a candidate.
    for (const auto& c : bias_.on_scope(y))
        if (!violates(c, ey) && solver_.is_implied(cl, c, budget) == Implication::Implied) bias_.remove(c);

    std::vector<Constraint> delta;
    for (const auto& c : bias_.on_scope(y))
        if (violates(c, ey)) delta.push_back(c);
    if (delta.empty()) return std::nullopt;

    for (;;) {
        auto probe = solver_.gen_discriminating(cl, delta, y, cfg_.search.cut_max);
        if (!probe) {
            std::uniform_int_distribution<std::size_t> pick(0, delta.size() - 1);
            return delta[pick(rng_)];
        }
        if (ask(*probe, QueryOrigin::FindC)) {
            bias_.remove_violated(*probe);
            std::erase_if(delta, [&](const Constraint& c) { return violates(c, *probe); });
        } else {
            std::erase_if(delta, [&](const Constraint& c) { return !violates(c, *probe); });
        }
        if (delta.empty()) return std::nullopt;
    }
}

// ---------------------------------------------------------------- FindAllScopes

bool Acquisition::fas(const Assignment& e, const Scope& y, std::vector<Scope>& mses) {
    if (has_scope(mses, y)) return true;
    const Assignment ey = e.project(y);
    if (bias_.kappa_size(ey) == 0) return false;
    const std::string key = bits(y, vocab_->size());
    if (auto it = fas_memo_.find(key); it != fas_memo_.end()) return it->second;
    if (fas_deadline_ && fas_found_ > 0 && Clock::now() > *fas_deadline_) throw FasCutoff{};

    bool contains = false;
    for (const auto& m : mses) contains = contains || proper_subset(m, y);
    if (!contains && ask(ey, QueryOrigin::FindAllScopes)) {
        bias_.remove_violated(ey);
        fas_memo_[key] = false;
        return false;
    }
    Scope order = y;
    std::sort(order.begin(), order.end(),
              [this](VarId a, VarId b) { return removal_rank_[a] < removal_rank_[b]; });
    bool flag = false;
    for (VarId x : order) flag = fas(e, without(y, x), mses) || flag;
    if (!flag) {
        mses.push_back(y);
        ++fas_found_;
        if (trace_.scope_found) trace_.scope_found(e, y);
    }
    fas_memo_[key] = true;
    return true;
}

bool Acquisition::find_all_scopes(const Assignment& e, const Scope& y, std::vector<Scope>& mses) {
    fas_memo_.clear();
    fas_deadline_.reset();
    fas_found_ = 0;
    return fas(e, y, mses);
}

std::vector<Scope> Acquisition::run_fas(const Assignment& e, const Scope& y, std::vector<Scope> known, bool& cut) {
    const std::size_t before = known.size();
    fas_memo_.clear();
    fas_deadline_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(cfg_.findallscopes_cutoff);
    fas_found_ = 0;
    cut = false;
    try {
        fas(e, y, known);
    } catch (const FasCutoff&) {
        cut = true;
    }
    fas_deadline_.reset();
    return {known.begin() + static_cast<long>(before), known.end()};
}

// ---------------------------------------------------------------- FindAllCons

std::vector<Scope> Acquisition::find_all_cons(const Assignment& e, const Scope& y, const std::vector<Scope>& scopes) {
    return fac(e, y, scopes, "0", false);
}

std::vector<Scope> Acquisition::fac(const Assignment& e, const Scope& y, const std::vector<Scope>& scopes,
                                    const std::string& path, bool top) {
    FindAllConsEvent ev;
    if (trace_.find_all_cons) {
        ev.call = path;
        ev.y = y;
        ev.scopes = scopes;
    }
    auto finish = [&](std::vector<Scope> out) {
        if (trace_.find_all_cons) {
            ev.returned = out;
            trace_.find_all_cons(ev);
        }
        return out;
    };
    if (collapse_) return finish({});

    const Assignment ey = e.project(y);
    bool learnable = false;
    for (const auto& c : bias_.kappa(ey)) {
        if (!has_scope(scopes, c.scope_set())) {
            learnable = true;
            break;
        }
    }
    if (!learnable) return finish({});

    std::size_t child = 0;
    auto child_path = [&]() { return (path == "0" ? std::string() : path + ".") + std::to_string(++child); };

    std::vector<Scope> nscopes;
    if (!scopes.empty()) {
        const Scope s = scopes.front();
        std::vector<Scope> rest(scopes.begin() + 1, scopes.end());
        for (VarId x : s) {
            std::vector<Scope> arg = rest;
            for (const auto& n : nscopes) add_scope(arg, n);
            for (const auto& r : fac(e, without(y, x), arg, child_path(), false)) add_scope(nscopes, r);
            if (collapse_) return finish({});
        }
    } else {
        const bool yes = ask(ey, top ? QueryOrigin::Main : QueryOrigin::FindAllCons);
        if (trace_.find_all_cons) ev.answer = yes;
        if (yes) {
            bias_.remove_violated(ey);
        } else {
            const Scope scope = locate_scope(e, y);
            auto c = find_c(e, scope);
            if (!c) {
                collapse_ = true;
                return finish({});
            }
            learn(*c);
            add_scope(nscopes, scope);
            for (const auto& r : fac(e, y, nscopes, child_path(), false)) add_scope(nscopes, r);
        }
    }
    return finish(nscopes);
}

// ---------------------------------------------------------------- main loops

std::optional<Outcome> Acquisition::iterate_quacq(const Assignment& e) {
    if (ask(e, QueryOrigin::Main)) {
        bias_.remove_violated(e);
        return std::nullopt;
    }
    const Scope s = locate_scope(e, e.assigned_vars());
    auto c = find_c(e, s);
    if (!c) {
        collapse_ = true;
        return Outcome::Collapse;
    }
    learn(*c);
    return std::nullopt;
}

std::optional<Outcome> Acquisition::iterate_mquacq(const Assignment& e) {
    collapse_ = false;
    fac(e, e.assigned_vars(), {}, "0", true);
    if (collapse_) return Outcome::Collapse;
    return std::nullopt;
}

std::optional<Outcome> Acquisition::iterate_multiacq(const Assignment& e) {
    const Scope y = e.assigned_vars();
    auto learn_all = [&](const std::vector<Scope>& mses) {
        for (const auto& s : mses) {
            auto c = find_c(e, s);
            if (!c) {
                collapse_ = true;
                return false;
            }
            learn(*c);
        }
        return true;
    };
    bool cut = false;
    auto found = run_fas(e, y, {}, cut);
    if (!learn_all(found)) return Outcome::Collapse;
    if (cut) {
        // Retry the same example with the variable order reversed.
        std::vector<VarId> order(vocab_->size());
        std::iota(order.begin(), order.end(), VarId{0});
        std::sort(order.begin(), order.end(),
                  [this](VarId a, VarId b) { return removal_rank_[a] > removal_rank_[b]; });
        set_removal_order(order);
        bool cut2 = false;
        auto more = run_fas(e, y, found, cut2);
        if (!learn_all(more)) return Outcome::Collapse;
        if (cut2) {
            std::shuffle(order.begin(), order.end(), rng_);
            set_removal_order(order);
        }
    }
    return std::nullopt;
}

AcquisitionResult Acquisition::run() {
    start_ = last_event_ = Clock::now();
    Outcome out = Outcome::Converged;
    for (;;) {
        const auto cl = learned_.constraints();
        if (solver_.solve(cl, cfg_.search.cut_max).status == SolveStatus::Unsat) {
            collapse_ = true;
            out = Outcome::Collapse;
            break;
        }
        ++qgen_calls_;
        QGenResult q = solver_.generate(cl, bias_);
        cut_min_hits_ += q.cutoffs.hit_cut_min ? 1 : 0;
        cut_max_hits_ += q.cutoffs.hit_cut_max ? 1 : 0;
        fallback_uses_ += q.used_fallback ? 1 : 0;
        if (!q.example) {
            out = q.proven_none ? Outcome::Converged : Outcome::PrematureConvergence;
            break;
        }
        std::optional<Outcome> step;
        switch (cfg_.algorithm) {
            case Algorithm::QuAcq: step = iterate_quacq(*q.example); break;
            case Algorithm::MultiAcq: step = iterate_multiacq(*q.example); break;
            case Algorithm::MQuAcq: step = iterate_mquacq(*q.example); break;
        }
        if (step) {
            out = *step;
            break;
        }
    }
    t_total_ = elapsed();
    if (progress_) progress_(*this);

    AcquisitionResult res;
    res.status = out;
    res.learned.assign(learned_.constraints().begin(), learned_.constraints().end());
    res.metrics = metrics();
    res.curve = curve_;
    res.bias_remaining = bias_.size();
    res.log = log_;
    return res;
}

Metrics Acquisition::metrics() const {
    Metrics m;
    m.learned_size = learned_.size();
    m.total_queries = log_.total();
    m.avg_query_size = log_.mean_size();
    m.complete_queries = log_.complete_count();
    double sum = 0;
    for (const auto& r : log_.records()) {
        sum += r.generation;
        m.max_wait = std::max(m.max_wait, r.generation);
        m.think_time += r.think;
    }
    m.avg_wait = log_.total() ? sum / static_cast<double>(log_.total()) : 0.0;
    m.t_queries = log_.total() ? log_.records().back().timestamp : 0.0;
    m.t_total = t_total_ >= 0 ? t_total_ : elapsed();
    m.cut_min_hits = cut_min_hits_;
    m.cut_max_hits = cut_max_hits_;
    m.fallback_uses = fallback_uses_;
    m.qgen_calls = qgen_calls_;
    return m;
}

AcquisitionResult acquire(const Instance& inst, const AcquisitionConfig& config) {
    SimulatedOracle oracle(inst.vocab.size(), inst.target);
    Acquisition acq(inst.vocab, inst.make_bias(), oracle, config);
    return acq.run();
}

}  // namespace acqlab
