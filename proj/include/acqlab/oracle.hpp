#pragma once

#include <chrono>
#include <map>
#include <span>
#include <vector>

#include "acqlab/model.hpp"

namespace acqlab {

class Oracle {
public:
    virtual ~Oracle() = default;
    virtual bool ask(const Assignment& e) = 0;
};

// Thrown by interactive oracles when the session is torn down mid-question.
class OracleAborted : public std::runtime_error {
public:
    OracleAborted() : std::runtime_error("oracle aborted") {}
};

// Answers from the target network: yes iff no target constraint inside the
// assigned set is violated.
class SimulatedOracle : public Oracle {
public:
    SimulatedOracle(std::size_t num_vars, std::span<const Constraint> target);

    bool ask(const Assignment& e) override;
    // Same answer, not counted.
    bool classify(const Assignment& e) const;

    std::size_t queries() const noexcept { return queries_; }
    const std::map<std::size_t, std::size_t>& size_histogram() const noexcept { return histogram_; }

private:
    std::vector<Constraint> target_;
    std::vector<std::vector<std::uint32_t>> by_anchor_;  // target ids keyed by smallest scope var
    std::size_t queries_ = 0;
    std::map<std::size_t, std::size_t> histogram_;
};

enum class QueryOrigin : std::uint8_t { Main, FindScope, FindC, FindAllScopes, FindAllCons };

struct QueryRecord {
    Assignment example;
    std::size_t size = 0;
    bool complete = false;
    bool answer = false;
    double timestamp = 0;   // seconds since run start, at posting
    double generation = 0;  // seconds the user waited since the previous answer
    double think = 0;       // seconds spent inside the oracle
    QueryOrigin origin = QueryOrigin::Main;
    std::size_t kappa = 0;  // |kappa_B(e)| when posted
    long rej = -1;          // FindScope-2 counter when posted, -1 outside FindScope-2
};

class QueryLog {
public:
    void append(QueryRecord r) { records_.push_back(std::move(r)); }
    std::span<const QueryRecord> records() const noexcept { return records_; }
    std::size_t total() const noexcept { return records_.size(); }
    std::size_t complete_count() const noexcept;
    double mean_size() const noexcept;

private:
    std::vector<QueryRecord> records_;
};

std::string_view origin_name(QueryOrigin o) noexcept;

}  // namespace acqlab
