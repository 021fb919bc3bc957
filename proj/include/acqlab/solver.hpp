#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "acqlab/model.hpp"

namespace acqlab {

using Clock = std::chrono::steady_clock;
using Seconds = std::chrono::duration<double>;

enum class VarHeuristic { DomWdeg, Bdeg, Dom, Lex };
enum class ValHeuristic { Random, Lex, MaxV };
enum class QGenMode { MaxComplete, MaxBPartial };

struct SearchConfig {
    VarHeuristic var = VarHeuristic::DomWdeg;
    ValHeuristic val = ValHeuristic::Random;
    Seconds cut_min{1.0};
    Seconds cut_max{5.0};
    std::uint64_t seed = 0;
    QGenMode mode = QGenMode::MaxComplete;

    // Throws InvalidParams unless 0 < cut_min <= cut_max.
    void validate() const;
};

struct CutoffEvents {
    bool hit_cut_min = false;
    bool hit_cut_max = false;
};

struct QGenResult {
    std::optional<Assignment> example;
    std::size_t violated_count = 0;
    CutoffEvents cutoffs;
    bool proven_none = false;
    bool used_fallback = false;
};

enum class SolveStatus { Sat, Unsat, BudgetExceeded };

struct SolveResult {
    SolveStatus status = SolveStatus::Unsat;
    std::optional<Assignment> solution;
};

enum class Implication { Implied, NotImplied, Unknown };

// A constraint in solver form; negated ones hold where the relation fails.
struct CompiledConstraint {
    RelationKind kind = RelationKind::Eq;
    Value param = 0;
    std::array<VarId, 4> scope{};
    std::uint8_t arity = 0;
    bool negated = false;

    bool test(const Value* t) const noexcept { return relation_holds(kind, param, t) != negated; }
};

struct ConstraintGraph {
    std::vector<CompiledConstraint> cons;
    std::vector<std::vector<std::uint32_t>> adj;  // var -> constraint ids

    ConstraintGraph() = default;
    explicit ConstraintGraph(std::size_t num_vars) : adj(num_vars) {}
    void add(const Constraint& c, bool negated = false);
    std::size_t size() const noexcept { return cons.size(); }
};

// Domains as value indices with live flags, undone through a trail.
class SearchState {
public:
    SearchState(const Vocabulary& vocab, std::span<const VarId> vars);

    const Vocabulary& vocab() const noexcept { return *vocab_; }
    std::span<const VarId> vars() const noexcept { return vars_; }
    bool is_assigned(VarId x) const noexcept { return assigned_[x] >= 0; }
    std::size_t value_index(VarId x) const noexcept { return static_cast<std::size_t>(assigned_[x]); }
    Value value(VarId x) const noexcept { return vocab_->domain(x)[static_cast<std::size_t>(assigned_[x])]; }
    std::size_t live_size(VarId x) const noexcept { return live_count_[x]; }
    bool live(VarId x, std::size_t idx) const noexcept { return live_[offset_[x] + idx] != 0; }
    std::vector<std::size_t> live_indices(VarId x) const;
    std::size_t assigned_count() const noexcept { return n_assigned_; }

    void assign(VarId x, std::size_t idx);
    void unassign(VarId x);
    // Returns the new live size.
    std::size_t remove_value(VarId x, std::size_t idx);
    std::size_t trail_mark() const noexcept { return trail_.size(); }
    void undo_to(std::size_t mark);

    Assignment to_assignment() const;

private:
    const Vocabulary* vocab_;
    std::vector<VarId> vars_;
    std::vector<std::size_t> offset_;
    std::vector<std::uint8_t> live_;
    std::vector<std::size_t> live_count_;
    std::vector<long> assigned_;
    std::vector<std::pair<VarId, std::size_t>> trail_;
    std::size_t n_assigned_ = 0;
};

struct HeuristicContext {
    const ConstraintGraph* hard = nullptr;
    std::span<const std::uint32_t> weights;  // parallel to hard->cons
    const ConstraintGraph* soft = nullptr;
};

// Precondition: some search variable is unassigned.
VarId pick_variable(const SearchState& st, VarHeuristic h, const HeuristicContext& ctx);
std::vector<std::size_t> order_values(const SearchState& st, VarId x, ValHeuristic h, const HeuristicContext& ctx,
                                      std::mt19937_64& rng);

class Solver {
public:
    Solver(const Vocabulary& vocab, SearchConfig config);

    const SearchConfig& config() const noexcept { return config_; }
    SearchConfig& config() noexcept { return config_; }
    const Vocabulary& vocab() const noexcept { return *vocab_; }

    SolveResult solve(std::span<const Constraint> hard, Seconds budget);
    SolveResult solve(std::span<const Constraint> hard) { return solve(hard, config_.cut_max); }

    QGenResult qgen(std::span<const Constraint> hard, const Bias& bias);
    QGenResult qgen_partial(std::span<const Constraint> hard, const Bias& bias);
    // Dispatches on config().mode.
    QGenResult generate(std::span<const Constraint> hard, const Bias& bias);

    Implication is_implied(std::span<const Constraint> hard, const Constraint& c, Seconds budget,
                           Assignment* witness = nullptr);

    // Assignment over exactly `scope`, consistent with the hard constraints inside
    // it, violating at least one but not all of delta.
    std::optional<Assignment> gen_discriminating(std::span<const Constraint> hard,
                                                 std::span<const Constraint> delta, std::span<const VarId> scope,
                                                 Seconds budget);

private:
    QGenResult fallback(std::span<const Constraint> hard, const Bias& bias, bool partial, QGenResult r);

    const Vocabulary* vocab_;
    SearchConfig config_;
    std::mt19937_64 rng_;
    std::vector<std::uint32_t> weights_;
    std::size_t weights_for_ = static_cast<std::size_t>(-1);
};

// Mutual entailment of two networks by UNSAT checks. Unknown on budget exhaustion.
struct EquivalenceReport {
    bool equivalent = false;
    bool complete = true;  // false when some check ran out of budget
    std::vector<Constraint> not_entailed_by_first;   // members of b not implied by a
    std::vector<Constraint> not_entailed_by_second;  // members of a not implied by b
};

EquivalenceReport check_equivalence(const Vocabulary& vocab, std::span<const Constraint> a,
                                    std::span<const Constraint> b, Seconds budget_per_check);

}  // namespace acqlab
