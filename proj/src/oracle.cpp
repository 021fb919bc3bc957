#include "acqlab/oracle.hpp"

namespace acqlab {

SimulatedOracle::SimulatedOracle(std::size_t num_vars, std::span<const Constraint> target)
    : target_(target.begin(), target.end()), by_anchor_(num_vars) {
    for (std::size_t i = 0; i < target_.size(); ++i) {
        if (target_[i].max_var() >= num_vars)
            throw Error(ErrorCode::InvalidInstance, "target constraint outside vocabulary");
        by_anchor_[target_[i].min_var()].push_back(static_cast<std::uint32_t>(i));
    }
}

bool SimulatedOracle::classify(const Assignment& e) const {
    const std::size_t n = std::min(e.num_vars(), by_anchor_.size());
    for (VarId x = 0; x < n; ++x) {
        if (!e.is_assigned(x)) continue;
        for (std::uint32_t id : by_anchor_[x])
            if (evaluate(target_[id], e) == Eval::Violated) return false;
    }
    return true;
}

bool SimulatedOracle::ask(const Assignment& e) {
    ++queries_;
    ++histogram_[e.assigned_count()];
    return classify(e);
}

std::size_t QueryLog::complete_count() const noexcept {
    std::size_t n = 0;
    for (const auto& r : records_) n += r.complete ? 1 : 0;
    return n;
}

double QueryLog::mean_size() const noexcept {
    if (records_.empty()) return 0.0;
    double s = 0;
    for (const auto& r : records_) s += static_cast<double>(r.size);
    return s / static_cast<double>(records_.size());
}

std::string_view origin_name(QueryOrigin o) noexcept {
    switch (o) {
        case QueryOrigin::Main: return "main";
        case QueryOrigin::FindScope: return "findscope";
        case QueryOrigin::FindC: return "findc";
        case QueryOrigin::FindAllScopes: return "findallscopes";
        case QueryOrigin::FindAllCons: return "findallcons";
    }
    return "?";
}

}  // namespace acqlab
