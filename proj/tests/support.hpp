#pragma once

// Brute-force references shared by the unit tests.

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <vector>

#include "acqlab/model.hpp"
#include "acqlab/oracle.hpp"

namespace acqlab::testing {

inline Assignment assignment_of(std::initializer_list<Value> vals) { return Assignment::complete(vals); }

inline Assignment partial(std::size_t n, std::initializer_list<std::pair<VarId, Value>> binds) {
    Assignment a(n);
    for (auto [x, v] : binds) a.set(x, v);
    return a;
}

// Ground truth for ask: scan every target constraint.
inline bool brute_ask(std::span<const Constraint> target, const Assignment& e) {
    for (const auto& c : target)
        if (evaluate(c, e) == Eval::Violated) return false;
    return true;
}

inline std::vector<Constraint> brute_kappa(std::span<const Constraint> cs, const Assignment& e) {
    std::vector<Constraint> out;
    for (const auto& c : cs)
        if (evaluate(c, e) == Eval::Violated) out.push_back(c);
    std::sort(out.begin(), out.end());
    return out;
}

// S is minimal: e_S rejected, every e_{S\{x}} accepted.
inline bool is_minimal_scope(std::span<const Constraint> target, const Assignment& e, const std::vector<VarId>& s) {
    if (s.empty() || brute_ask(target, e.project(s))) return false;
    for (VarId x : s) {
        std::vector<VarId> t;
        for (VarId y : s)
            if (y != x) t.push_back(y);
        if (!t.empty() && !brute_ask(target, e.project(t))) return false;
    }
    return true;
}

// All minimal rejected subsets of Y, by enumerating every subset (|Y| <= 12).
inline std::set<std::vector<VarId>> brute_minimal_scopes(std::span<const Constraint> target, const Assignment& e,
                                                         const std::vector<VarId>& y) {
    std::set<std::vector<VarId>> out;
    const std::size_t m = y.size();
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
        std::vector<VarId> s;
        for (std::size_t i = 0; i < m; ++i)
            if (mask & (1u << i)) s.push_back(y[i]);
        if (is_minimal_scope(target, e, s)) out.insert(s);
    }
    return out;
}

// Every complete assignment of a small vocabulary.
inline void for_each_complete(const Vocabulary& vocab, const std::function<void(const Assignment&)>& f) {
    const std::size_t n = vocab.size();
    std::vector<std::size_t> idx(n, 0);
    Assignment a(n);
    for (;;) {
        for (VarId x = 0; x < n; ++x) a.set(x, vocab.domain(x)[idx[x]]);
        f(a);
        std::size_t k = 0;
        while (k < n && ++idx[k] == vocab.domain(static_cast<VarId>(k)).size()) idx[k++] = 0;
        if (k == n) return;
    }
}

inline bool satisfies_all(std::span<const Constraint> cs, const Assignment& e) {
    return std::none_of(cs.begin(), cs.end(), [&](const Constraint& c) { return violates(c, e); });
}

// sol(a) subset of sol(b) over the full tuple space.
inline bool brute_entails(const Vocabulary& vocab, std::span<const Constraint> a, std::span<const Constraint> b) {
    bool ok = true;
    for_each_complete(vocab, [&](const Assignment& e) {
        if (ok && satisfies_all(a, e) && !satisfies_all(b, e)) ok = false;
    });
    return ok;
}

inline Assignment random_complete(const Vocabulary& vocab, std::mt19937_64& rng) {
    Assignment a(vocab.size());
    for (VarId x = 0; x < vocab.size(); ++x) {
        std::uniform_int_distribution<std::size_t> d(0, vocab.domain(x).size() - 1);
        a.set(x, vocab.domain(x)[d(rng)]);
    }
    return a;
}

inline std::vector<VarId> all_vars(std::size_t n) {
    std::vector<VarId> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<VarId>(i);
    return v;
}

// Random normalized target over {=, !=, <, >}; satisfiable by construction.
inline Instance random_instance(std::mt19937_64& rng, std::size_t n, Value dmax, std::size_t k) {
    Instance inst;
    inst.name = "random";
    inst.vocab = Vocabulary::uniform(n, 1, dmax);
    inst.language = {{RelationKind::Eq, 0}, {RelationKind::Neq, 0}, {RelationKind::Gt, 0}, {RelationKind::Lt, 0}};
    const Assignment hidden = random_complete(inst.vocab, rng);
    std::vector<std::pair<VarId, VarId>> pairs;
    for (VarId i = 0; i < n; ++i)
        for (VarId j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    for (auto [i, j] : pairs) {
        if (inst.target.size() == k) break;
        std::vector<Constraint> fits;
        for (const auto& r : inst.language) {
            Constraint c(r, std::vector<VarId>{i, j});
            if (!violates(c, hidden)) fits.push_back(c);
        }
        std::uniform_int_distribution<std::size_t> pick(0, fits.size() - 1);
        inst.target.push_back(fits[pick(rng)]);
    }
    return inst;
}

// Oracle wrapper recording each asked assignment.
class RecordingOracle : public Oracle {
public:
    RecordingOracle(std::size_t n, std::span<const Constraint> target) : inner_(n, target) {}
    bool ask(const Assignment& e) override {
        const bool a = inner_.ask(e);
        asked.emplace_back(e, a);
        return a;
    }
    std::vector<std::pair<Assignment, bool>> asked;

private:
    SimulatedOracle inner_;
};

}  // namespace acqlab::testing
