#include "acqlab/model.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <sstream>

namespace acqlab {

// ---------------------------------------------------------------- Vocabulary

Vocabulary::Vocabulary(std::vector<std::vector<Value>> domains) : domains_(std::move(domains)) {
    if (domains_.empty())
        throw Error(ErrorCode::InvalidArgument, "vocabulary needs at least one variable");
    for (std::size_t i = 0; i < domains_.size(); ++i) {
        auto& d = domains_[i];
        if (d.empty())
            throw Error(ErrorCode::InvalidArgument, "empty domain for variable " + std::to_string(i));
        std::sort(d.begin(), d.end());
        if (std::adjacent_find(d.begin(), d.end()) != d.end())
            throw Error(ErrorCode::InvalidArgument, "duplicate value in domain of variable " + std::to_string(i));
    }
}

Vocabulary Vocabulary::uniform(std::size_t n, Value lo, Value hi) {
    if (hi < lo) throw Error(ErrorCode::InvalidArgument, "empty domain range");
    std::vector<Value> d;
    d.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (Value v = lo; v <= hi; ++v) d.push_back(v);
    return Vocabulary(std::vector<std::vector<Value>>(n, d));
}

bool Vocabulary::contains(VarId x, Value v) const {
    if (x >= domains_.size()) return false;
    return std::binary_search(domains_[x].begin(), domains_[x].end(), v);
}

std::optional<std::size_t> Vocabulary::index_of(VarId x, Value v) const {
    const auto& d = domains_[x];
    auto it = std::lower_bound(d.begin(), d.end(), v);
    if (it == d.end() || *it != v) return std::nullopt;
    return static_cast<std::size_t>(it - d.begin());
}

bool Vocabulary::uniform_domains() const noexcept {
    for (const auto& d : domains_)
        if (d != domains_.front()) return false;
    return true;
}

std::size_t Vocabulary::max_domain_size() const noexcept {
    std::size_t m = 0;
    for (const auto& d : domains_) m = std::max(m, d.size());
    return m;
}

// ---------------------------------------------------------------- relations

namespace {

struct KindInfo {
    RelationKind kind;
    std::string_view name;
    bool symmetric;
    bool param;
};

constexpr KindInfo kKinds[kRelationKinds] = {
    {RelationKind::Eq, "Eq", true, false},
    {RelationKind::Neq, "Neq", true, false},
    {RelationKind::Gt, "Gt", false, false},
    {RelationKind::Lt, "Lt", false, false},
    {RelationKind::Geq, "Geq", false, false},
    {RelationKind::Leq, "Leq", false, false},
    {RelationKind::DiffEq1, "DiffEq1", false, false},
    {RelationKind::AbsDiffEq1, "AbsDiffEq1", true, false},
    {RelationKind::AbsDiffGtY, "AbsDiffGtY", true, true},
    {RelationKind::AbsDiffEqY, "AbsDiffEqY", true, true},
    {RelationKind::FloorDistGtY, "FloorDistGtY", true, true},
    {RelationKind::AbsDiffPairEq, "AbsDiffPairEq", false, false},
    {RelationKind::AbsDiffPairNeq, "AbsDiffPairNeq", false, false},
};

constexpr Value floor_div3(Value v) noexcept { return v >= 0 ? v / 3 : -((-v + 2) / 3); }

constexpr Value absdiff(Value a, Value b) noexcept { return a > b ? a - b : b - a; }

// Gt/Lt and Geq/Leq are mirror images; a reversed scope flips the kind.
std::optional<RelationKind> mirror(RelationKind k) {
    switch (k) {
        case RelationKind::Gt: return RelationKind::Lt;
        case RelationKind::Lt: return RelationKind::Gt;
        case RelationKind::Geq: return RelationKind::Leq;
        case RelationKind::Leq: return RelationKind::Geq;
        default: return std::nullopt;
    }
}

}  // namespace

bool is_symmetric(RelationKind k) noexcept { return kKinds[static_cast<int>(k)].symmetric; }
bool takes_param(RelationKind k) noexcept { return kKinds[static_cast<int>(k)].param; }
std::string_view relation_name(RelationKind k) noexcept { return kKinds[static_cast<int>(k)].name; }

std::optional<RelationKind> parse_relation(std::string_view name) {
    for (const auto& k : kKinds)
        if (k.name == name) return k.kind;
    return std::nullopt;
}

bool relation_holds(RelationKind kind, Value y, const Value* t) noexcept {
    switch (kind) {
        case RelationKind::Eq: return t[0] == t[1];
        case RelationKind::Neq: return t[0] != t[1];
        case RelationKind::Gt: return t[0] > t[1];
        case RelationKind::Lt: return t[0] < t[1];
        case RelationKind::Geq: return t[0] >= t[1];
        case RelationKind::Leq: return t[0] <= t[1];
        case RelationKind::DiffEq1: return t[0] - t[1] == 1;
        case RelationKind::AbsDiffEq1: return absdiff(t[0], t[1]) == 1;
        case RelationKind::AbsDiffGtY: return absdiff(t[0], t[1]) > y;
        case RelationKind::AbsDiffEqY: return absdiff(t[0], t[1]) == y;
        case RelationKind::FloorDistGtY: return absdiff(floor_div3(t[0]), floor_div3(t[1])) > y;
        case RelationKind::AbsDiffPairEq: return absdiff(t[0], t[1]) == absdiff(t[2], t[3]);
        case RelationKind::AbsDiffPairNeq: return absdiff(t[0], t[1]) != absdiff(t[2], t[3]);
    }
    return false;
}

// ---------------------------------------------------------------- Constraint

Constraint::Constraint(RelationTemplate rel, std::span<const VarId> scope) : rel_(rel) {
    const std::size_t a = rel.arity();
    if (scope.size() != a)
        throw Error(ErrorCode::InvalidArgument,
                    std::string(relation_name(rel.kind)) + " expects " + std::to_string(a) + " variables");
    if (!takes_param(rel.kind)) rel_.param = 0;
    arity_ = static_cast<std::uint8_t>(a);
    std::copy(scope.begin(), scope.end(), scope_.begin());
    {
        auto s = scope_;
        std::sort(s.begin(), s.begin() + a);
        if (std::adjacent_find(s.begin(), s.begin() + a) != s.begin() + a)
            throw Error(ErrorCode::InvalidArgument, "constraint scope repeats a variable");
    }
    if (a == 4) {
        if (scope_[0] > scope_[1]) std::swap(scope_[0], scope_[1]);
        if (scope_[2] > scope_[3]) std::swap(scope_[2], scope_[3]);
        if (std::pair(scope_[2], scope_[3]) < std::pair(scope_[0], scope_[1])) {
            std::swap(scope_[0], scope_[2]);
            std::swap(scope_[1], scope_[3]);
        }
    } else if (scope_[0] > scope_[1]) {
        if (is_symmetric(rel_.kind)) {
            std::swap(scope_[0], scope_[1]);
        } else if (auto m = mirror(rel_.kind)) {
            rel_.kind = *m;
            std::swap(scope_[0], scope_[1]);
        }
    }
}

std::vector<VarId> Constraint::scope_set() const {
    std::vector<VarId> s(scope_.begin(), scope_.begin() + arity_);
    std::sort(s.begin(), s.end());
    return s;
}

VarId Constraint::min_var() const noexcept {
    return *std::min_element(scope_.begin(), scope_.begin() + arity_);
}

VarId Constraint::max_var() const noexcept {
    return *std::max_element(scope_.begin(), scope_.begin() + arity_);
}

std::string Constraint::to_string() const {
    auto x = [this](int i) { return "x" + std::to_string(scope_[i]); };
    const std::string y = std::to_string(rel_.param);
    switch (rel_.kind) {
        case RelationKind::Eq: return x(0) + " = " + x(1);
        case RelationKind::Neq: return x(0) + " != " + x(1);
        case RelationKind::Gt: return x(0) + " > " + x(1);
        case RelationKind::Lt: return x(0) + " < " + x(1);
        case RelationKind::Geq: return x(0) + " >= " + x(1);
        case RelationKind::Leq: return x(0) + " <= " + x(1);
        case RelationKind::DiffEq1: return x(0) + " - " + x(1) + " = 1";
        case RelationKind::AbsDiffEq1: return "|" + x(0) + " - " + x(1) + "| = 1";
        case RelationKind::AbsDiffGtY: return "|" + x(0) + " - " + x(1) + "| > " + y;
        case RelationKind::AbsDiffEqY: return "|" + x(0) + " - " + x(1) + "| = " + y;
        case RelationKind::FloorDistGtY: return "|" + x(0) + "/3 - " + x(1) + "/3| > " + y;
        case RelationKind::AbsDiffPairEq: return "|" + x(0) + " - " + x(1) + "| = |" + x(2) + " - " + x(3) + "|";
        case RelationKind::AbsDiffPairNeq: return "|" + x(0) + " - " + x(1) + "| != |" + x(2) + " - " + x(3) + "|";
    }
    return {};
}

bool operator<(const Constraint& a, const Constraint& b) noexcept {
    if (a.arity_ != b.arity_) return a.arity_ < b.arity_;
    if (a.scope_ != b.scope_) return a.scope_ < b.scope_;
    if (a.rel_.kind != b.rel_.kind) return a.rel_.kind < b.rel_.kind;
    return a.rel_.param < b.rel_.param;
}

std::size_t ConstraintHash::operator()(const Constraint& c) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(c.kind()) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(c.param()) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
    for (VarId v : c.scope()) h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
}

// ---------------------------------------------------------------- Assignment

Assignment Assignment::complete(std::vector<Value> values) {
    Assignment a;
    a.count_ = values.size();
    a.bound_.assign(values.size(), 1);
    a.values_ = std::move(values);
    return a;
}

std::optional<Value> Assignment::get(VarId x) const {
    if (x >= values_.size() || !bound_[x]) return std::nullopt;
    return values_[x];
}

void Assignment::set(VarId x, Value v) {
    if (x >= values_.size()) throw Error(ErrorCode::InvalidArgument, "variable out of range");
    if (!bound_[x]) {
        bound_[x] = 1;
        ++count_;
    }
    values_[x] = v;
}

void Assignment::unset(VarId x) {
    if (x < values_.size() && bound_[x]) {
        bound_[x] = 0;
        values_[x] = 0;
        --count_;
    }
}

std::vector<VarId> Assignment::assigned_vars() const {
    std::vector<VarId> out;
    out.reserve(count_);
    for (std::size_t i = 0; i < bound_.size(); ++i)
        if (bound_[i]) out.push_back(static_cast<VarId>(i));
    return out;
}

Assignment Assignment::project(std::span<const VarId> vars) const {
    Assignment out(values_.size());
    for (VarId x : vars) {
        if (x >= values_.size() || !bound_[x])
            throw Error(ErrorCode::InvalidArgument, "projection onto unassigned variable x" + std::to_string(x));
        out.set(x, values_[x]);
    }
    return out;
}

bool Assignment::valid_for(const Vocabulary& vocab) const {
    if (values_.size() != vocab.size()) return false;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (bound_[i] && !vocab.contains(static_cast<VarId>(i), values_[i])) return false;
    return true;
}

std::string Assignment::to_string() const {
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!bound_[i]) continue;
        if (!first) os << ", ";
        os << 'x' << i << ':' << values_[i];
        first = false;
    }
    os << '}';
    return os.str();
}

bool operator==(const Assignment& a, const Assignment& b) noexcept {
    if (a.values_.size() != b.values_.size() || a.count_ != b.count_) return false;
    for (std::size_t i = 0; i < a.values_.size(); ++i) {
        if (a.bound_[i] != b.bound_[i]) return false;
        if (a.bound_[i] && a.values_[i] != b.values_[i]) return false;
    }
    return true;
}

bool scope_within(const Constraint& c, const Assignment& e) noexcept {
    for (VarId x : c.scope())
        if (x >= e.num_vars() || !e.is_assigned(x)) return false;
    return true;
}

Eval evaluate(const Constraint& c, const Assignment& e) noexcept {
    Value t[4];
    std::size_t i = 0;
    for (VarId x : c.scope()) {
        if (x >= e.num_vars() || !e.is_assigned(x)) return Eval::Undecided;
        t[i++] = e.at(x);
    }
    return relation_holds(c.kind(), c.param(), t) ? Eval::Satisfied : Eval::Violated;
}

bool violates(const Constraint& c, const Assignment& e) noexcept {
    return evaluate(c, e) == Eval::Violated;
}

// ---------------------------------------------------------------- Bias

Bias::Bias(std::size_t num_vars) : by_var_(num_vars), dead_in_list_(num_vars, 0), degree_(num_vars, 0) {}

Bias::Bias(std::size_t num_vars, std::span<const Constraint> constraints) : Bias(num_vars) {
    pool_.reserve(constraints.size());
    for (const auto& c : constraints) add(c);
}

Bias::ScopeKey Bias::key_of(const Constraint& c) {
    ScopeKey k;
    k.n = static_cast<std::uint8_t>(c.arity());
    std::copy(c.scope().begin(), c.scope().end(), k.vars.begin());
    std::sort(k.vars.begin(), k.vars.begin() + k.n);
    return k;
}

Bias::ScopeKey Bias::key_of(std::span<const VarId> sorted) {
    ScopeKey k;
    k.n = static_cast<std::uint8_t>(std::min<std::size_t>(sorted.size(), 4));
    std::copy(sorted.begin(), sorted.begin() + k.n, k.vars.begin());
    return k;
}

std::size_t Bias::ScopeKeyHash::operator()(const ScopeKey& k) const noexcept {
    std::uint64_t h = k.n;
    for (int i = 0; i < k.n; ++i) h = h * 0x100000001B3ULL ^ k.vars[i];
    return static_cast<std::size_t>(h * 0x9E3779B97F4A7C15ULL);
}

bool Bias::add(const Constraint& c) {
    if (c.max_var() >= by_var_.size())
        throw Error(ErrorCode::InvalidArgument, "constraint " + c.to_string() + " outside vocabulary");
    if (lookup_.count(c)) return false;
    const auto id = static_cast<ConstraintId>(pool_.size());
    pool_.push_back(c);
    alive_.push_back(1);
    anchor_.push_back(c.min_var());
    lookup_.emplace(c, id);
    for (VarId x : c.scope()) {
        by_var_[x].push_back(id);
        ++degree_[x];
    }
    by_scope_[key_of(c)].push_back(id);
    ++live_;
    return true;
}

bool Bias::contains(const Constraint& c) const { return lookup_.count(c) != 0; }

void Bias::kill(ConstraintId id) {
    const Constraint& c = pool_[id];
    alive_[id] = 0;
    lookup_.erase(c);
    --live_;
    auto it = by_scope_.find(key_of(c));
    auto& ids = it->second;
    ids.erase(std::find(ids.begin(), ids.end(), id));
    if (ids.empty()) by_scope_.erase(it);
    for (VarId x : c.scope()) {
        --degree_[x];
        if (++dead_in_list_[x] > 16 && dead_in_list_[x] > degree_[x]) compact(x);
    }
}

void Bias::compact(VarId x) {
    auto& ids = by_var_[x];
    std::erase_if(ids, [this](ConstraintId id) { return !alive_[id]; });
    dead_in_list_[x] = 0;
}

bool Bias::remove(const Constraint& c) {
    auto it = lookup_.find(c);
    if (it == lookup_.end()) return false;
    kill(it->second);
    return true;
}

std::size_t Bias::remove_all(std::span<const Constraint> cs) {
    std::size_t n = 0;
    for (const auto& c : cs) n += remove(c) ? 1 : 0;
    return n;
}

std::vector<Constraint> Bias::constraints() const {
    std::vector<Constraint> out;
    out.reserve(live_);
    for_each([&](const Constraint& c) { out.push_back(c); });
    return out;
}

std::vector<Constraint> Bias::on_scope(std::span<const VarId> scope_set) const {
    std::vector<Constraint> out;
    if (scope_set.size() > 4) return out;
    std::vector<VarId> s(scope_set.begin(), scope_set.end());
    std::sort(s.begin(), s.end());
    auto it = by_scope_.find(key_of(s));
    if (it == by_scope_.end()) return out;
    for (ConstraintId id : it->second) out.push_back(pool_[id]);
    return out;
}

// Each constraint is visited once, from the list of its smallest variable.
template <class F>
void Bias::visit_kappa(const Assignment& e, F&& f) const {
    const std::size_t n = std::min(e.num_vars(), by_var_.size());
    for (std::size_t x = 0; x < n; ++x) {
        if (!e.is_assigned(static_cast<VarId>(x))) continue;
        for (ConstraintId id : by_var_[x]) {
            if (!alive_[id] || anchor_[id] != x) continue;
            if (evaluate(pool_[id], e) == Eval::Violated) f(id);
        }
    }
}

std::vector<Constraint> Bias::kappa(const Assignment& e) const {
    std::vector<Constraint> out;
    visit_kappa(e, [&](ConstraintId id) { out.push_back(pool_[id]); });
    return out;
}

std::size_t Bias::kappa_size(const Assignment& e) const {
    std::size_t n = 0;
    visit_kappa(e, [&](ConstraintId) { ++n; });
    return n;
}

std::size_t Bias::remove_violated(const Assignment& e) {
    std::vector<ConstraintId> ids;
    visit_kappa(e, [&](ConstraintId id) { ids.push_back(id); });
    for (ConstraintId id : ids) kill(id);
    return ids.size();
}

bool Bias::check_consistency() const {
    std::size_t live = 0;
    std::vector<std::size_t> deg(by_var_.size(), 0);
    for (std::size_t id = 0; id < pool_.size(); ++id) {
        if (!alive_[id]) continue;
        ++live;
        auto it = lookup_.find(pool_[id]);
        if (it == lookup_.end() || it->second != id) return false;
        for (VarId x : pool_[id].scope()) {
            ++deg[x];
            const auto& l = by_var_[x];
            if (std::find(l.begin(), l.end(), id) == l.end()) return false;
        }
        auto sit = by_scope_.find(key_of(pool_[id]));
        if (sit == by_scope_.end()) return false;
        if (std::find(sit->second.begin(), sit->second.end(), id) == sit->second.end()) return false;
    }
    if (live != live_ || lookup_.size() != live_) return false;
    if (deg != degree_) return false;
    std::size_t scoped = 0;
    for (const auto& [k, ids] : by_scope_) {
        for (ConstraintId id : ids)
            if (!alive_[id]) return false;
        scoped += ids.size();
    }
    return scoped == live_;
}

// ---------------------------------------------------------------- LearnedNetwork

bool LearnedNetwork::add(const Constraint& c) {
    if (!set_.insert(c).second) return false;
    list_.push_back(c);
    return true;
}

// ---------------------------------------------------------------- bias construction

std::vector<Constraint> default_bias(std::size_t n, std::span<const RelationTemplate> language) {
    std::vector<Constraint> out;
    std::unordered_set<Constraint, ConstraintHash> seen;
    auto push = [&](const RelationTemplate& r, std::initializer_list<VarId> s) {
        Constraint c(r, std::span<const VarId>(s.begin(), s.size()));
        if (seen.insert(c).second) out.push_back(c);
    };
    for (const auto& r : language) {
        if (r.arity() == 2) {
            for (VarId i = 0; i < n; ++i)
                for (VarId j = i + 1; j < n; ++j) {
                    push(r, {i, j});
                    if (r.kind == RelationKind::DiffEq1) push(r, {j, i});
                }
        } else {
            for (VarId a = 0; a < n; ++a)
                for (VarId b = a + 1; b < n; ++b)
                    for (VarId c = b + 1; c < n; ++c)
                        for (VarId d = c + 1; d < n; ++d) push(r, {a, b, c, d});
        }
    }
    return out;
}

Bias Instance::make_bias() const {
    if (bias) return Bias(vocab.size(), *bias);
    return Bias(vocab.size(), default_bias(vocab.size(), language));
}

void Instance::validate() const {
    const std::size_t n = vocab.size();
    auto check_scope = [&](const Constraint& c, const char* where) {
        if (c.max_var() >= n)
            throw Error(ErrorCode::InvalidInstance,
                        std::string(where) + " constraint " + c.to_string() + " has a variable out of range");
    };
    std::unordered_set<Constraint, ConstraintHash> seen;
    std::map<std::vector<VarId>, Constraint> by_scope;
    for (const auto& c : target) {
        check_scope(c, "target");
        if (!seen.insert(c).second)
            throw Error(ErrorCode::InvalidInstance, "duplicate target constraint " + c.to_string());
        auto [it, fresh] = by_scope.emplace(c.scope_set(), c);
        if (!fresh)
            throw Error(ErrorCode::InvalidInstance, "target not normalized: " + it->second.to_string() + " and " +
                                                        c.to_string() + " share a scope");
    }
    if (bias)
        for (const auto& c : *bias) check_scope(c, "bias");
    if (learned)
        for (const auto& c : *learned) check_scope(c, "learned");
    if (!var_names.empty() && var_names.size() != n)
        throw Error(ErrorCode::InvalidInstance, "var_names length differs from variable count");
}

}  // namespace acqlab
