#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace acqlab {

using VarId = std::uint32_t;
using Value = std::int64_t;

enum class ErrorCode {
    InvalidArgument,
    UnknownBenchmark,
    InvalidParams,
    InvalidInstance,
    Io,
    UnknownSession,
    WrongPhase,
    Internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::vector<Value>> domains);
    static Vocabulary uniform(std::size_t n, Value lo, Value hi);

    std::size_t size() const noexcept { return domains_.size(); }
    std::span<const Value> domain(VarId x) const { return domains_[x]; }
    bool contains(VarId x, Value v) const;
    std::optional<std::size_t> index_of(VarId x, Value v) const;
    bool uniform_domains() const noexcept;
    std::size_t max_domain_size() const noexcept;

private:
    std::vector<std::vector<Value>> domains_;  // each sorted ascending
};

enum class RelationKind : std::uint8_t {
    Eq,
    Neq,
    Gt,
    Lt,
    Geq,
    Leq,
    DiffEq1,
    AbsDiffEq1,
    AbsDiffGtY,
    AbsDiffEqY,
    FloorDistGtY,
    AbsDiffPairEq,
    AbsDiffPairNeq,
};

inline constexpr std::size_t kRelationKinds = 13;

constexpr std::size_t arity_of(RelationKind k) noexcept {
    return (k == RelationKind::AbsDiffPairEq || k == RelationKind::AbsDiffPairNeq) ? 4 : 2;
}
bool is_symmetric(RelationKind k) noexcept;
bool takes_param(RelationKind k) noexcept;
std::string_view relation_name(RelationKind k) noexcept;
std::optional<RelationKind> parse_relation(std::string_view name);

struct RelationTemplate {
    RelationKind kind = RelationKind::Eq;
    Value param = 0;  // only meaningful for the *Y kinds

    std::size_t arity() const noexcept { return arity_of(kind); }
    friend bool operator==(const RelationTemplate&, const RelationTemplate&) = default;
};

// Closed-form predicate over a tuple in scope order.
bool relation_holds(RelationKind kind, Value param, const Value* t) noexcept;

class Constraint {
public:
    Constraint() = default;
    // Canonicalizes the scope. Throws InvalidArgument on repeated variables or arity mismatch.
    Constraint(RelationTemplate rel, std::span<const VarId> scope);
    Constraint(RelationKind kind, std::initializer_list<VarId> scope, Value param = 0)
        : Constraint(RelationTemplate{kind, param}, std::span<const VarId>(scope.begin(), scope.size())) {}

    const RelationTemplate& relation() const noexcept { return rel_; }
    RelationKind kind() const noexcept { return rel_.kind; }
    Value param() const noexcept { return rel_.param; }
    std::size_t arity() const noexcept { return arity_; }
    std::span<const VarId> scope() const noexcept { return {scope_.data(), arity_}; }
    // Scope as an ascending set.
    std::vector<VarId> scope_set() const;
    VarId min_var() const noexcept;
    VarId max_var() const noexcept;

    bool holds(std::span<const Value> tuple) const noexcept {
        return relation_holds(rel_.kind, rel_.param, tuple.data());
    }
    std::string to_string() const;

    friend bool operator==(const Constraint& a, const Constraint& b) noexcept {
        return a.rel_ == b.rel_ && a.arity_ == b.arity_ && a.scope_ == b.scope_;
    }
    friend bool operator<(const Constraint& a, const Constraint& b) noexcept;

private:
    RelationTemplate rel_;
    std::array<VarId, 4> scope_{};
    std::uint8_t arity_ = 0;
};

struct ConstraintHash {
    std::size_t operator()(const Constraint& c) const noexcept;
};

class Assignment {
public:
    Assignment() = default;
    explicit Assignment(std::size_t num_vars) : values_(num_vars, 0), bound_(num_vars, 0) {}
    static Assignment complete(std::vector<Value> values);

    std::size_t num_vars() const noexcept { return values_.size(); }
    std::size_t assigned_count() const noexcept { return count_; }
    bool empty() const noexcept { return count_ == 0; }
    bool is_complete() const noexcept { return count_ == values_.size(); }
    bool is_assigned(VarId x) const noexcept { return bound_[x] != 0; }
    Value at(VarId x) const noexcept { return values_[x]; }
    std::optional<Value> get(VarId x) const;

    void set(VarId x, Value v);
    void unset(VarId x);

    std::vector<VarId> assigned_vars() const;
    // Restriction to vars; every member of vars must be assigned.
    Assignment project(std::span<const VarId> vars) const;
    bool valid_for(const Vocabulary& vocab) const;
    std::string to_string() const;

    friend bool operator==(const Assignment& a, const Assignment& b) noexcept;

private:
    std::vector<Value> values_;
    std::vector<std::uint8_t> bound_;
    std::size_t count_ = 0;
};

enum class Eval { Satisfied, Violated, Undecided };

Eval evaluate(const Constraint& c, const Assignment& e) noexcept;
bool violates(const Constraint& c, const Assignment& e) noexcept;
bool scope_within(const Constraint& c, const Assignment& e) noexcept;

using ConstraintId = std::uint32_t;

// Mutable candidate set with per-variable and per-scope indexes.
class Bias {
public:
    Bias() = default;
    explicit Bias(std::size_t num_vars);
    Bias(std::size_t num_vars, std::span<const Constraint> constraints);

    std::size_t num_vars() const noexcept { return by_var_.size(); }
    std::size_t size() const noexcept { return live_; }
    bool empty() const noexcept { return live_ == 0; }

    bool add(const Constraint& c);
    bool contains(const Constraint& c) const;
    bool remove(const Constraint& c);
    std::size_t remove_all(std::span<const Constraint> cs);

    std::vector<Constraint> constraints() const;
    template <class F>
    void for_each(F&& f) const {
        for (std::size_t i = 0; i < pool_.size(); ++i)
            if (alive_[i]) f(pool_[i]);
    }

    // Live constraints mentioning x (bdeg).
    std::size_t degree(VarId x) const { return degree_[x]; }
    std::vector<Constraint> on_scope(std::span<const VarId> scope_set) const;

    std::vector<Constraint> kappa(const Assignment& e) const;
    std::size_t kappa_size(const Assignment& e) const;
    std::size_t remove_violated(const Assignment& e);

    bool check_consistency() const;

private:
    struct ScopeKey {
        std::array<VarId, 4> vars{};
        std::uint8_t n = 0;
        friend bool operator==(const ScopeKey&, const ScopeKey&) = default;
    };
    struct ScopeKeyHash {
        std::size_t operator()(const ScopeKey& k) const noexcept;
    };
    static ScopeKey key_of(const Constraint& c);
    static ScopeKey key_of(std::span<const VarId> sorted);

    template <class F>
    void visit_kappa(const Assignment& e, F&& f) const;
    void kill(ConstraintId id);
    void compact(VarId x);

    std::vector<Constraint> pool_;
    std::vector<std::uint8_t> alive_;
    std::vector<VarId> anchor_;
    std::unordered_map<Constraint, ConstraintId, ConstraintHash> lookup_;
    std::vector<std::vector<ConstraintId>> by_var_;
    std::vector<std::size_t> dead_in_list_;
    std::vector<std::size_t> degree_;
    std::unordered_map<ScopeKey, std::vector<ConstraintId>, ScopeKeyHash> by_scope_;
    std::size_t live_ = 0;
};

class LearnedNetwork {
public:
    bool add(const Constraint& c);
    bool contains(const Constraint& c) const { return set_.count(c) != 0; }
    std::size_t size() const noexcept { return list_.size(); }
    bool empty() const noexcept { return list_.empty(); }
    std::span<const Constraint> constraints() const noexcept { return list_; }

private:
    std::vector<Constraint> list_;
    std::unordered_set<Constraint, ConstraintHash> set_;
};

// All canonical instantiations of language over every scope of matching arity.
std::vector<Constraint> default_bias(std::size_t num_vars, std::span<const RelationTemplate> language);

struct Instance {
    std::string name;
    Vocabulary vocab;
    std::vector<RelationTemplate> language;
    std::vector<Constraint> target;
    std::optional<std::vector<Constraint>> bias;
    std::optional<std::vector<Constraint>> learned;
    std::vector<std::string> var_names;

    Bias make_bias() const;
    // Scope ranges, duplicate and normalization checks. Throws InvalidInstance.
    void validate() const;
};

}  // namespace acqlab
