#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "acqlab/acquisition.hpp"
#include "acqlab/benchmarks.hpp"
#include "acqlab/instance_io.hpp"

namespace acqlab {

struct ExperimentPlan {
    std::string benchmark;  // ignored when instance is set
    BenchmarkParams params;
    std::optional<Instance> instance;
    AcquisitionConfig config;  // search.seed is replaced per run
    std::size_t runs = 10;
    std::uint64_t master_seed = 1;
    bool curves = false;
    bool verify = false;  // mutual entailment of C_L and C_T after each run
    Seconds verify_budget{10.0};

    // Throws InvalidParams.
    void validate() const;
};

struct RunRecord {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    Outcome status = Outcome::Converged;
    Metrics metrics;
    std::size_t bias_remaining = 0;
    std::vector<CurvePoint> curve;
    std::optional<bool> equivalent;  // set when verify ran to completion
    bool verify_complete = true;
    std::vector<Constraint> learned;
};

struct Summary {
    double mean = 0;
    double stddev = 0;
};

struct ExperimentReport {
    std::string instance_name;
    std::size_t num_vars = 0;
    std::size_t target_size = 0;
    std::size_t bias_size = 0;
    std::string fingerprint;
    AcquisitionConfig config;
    std::vector<RunRecord> runs;

    bool any_collapse() const;
    // Columns: queries, q_bar, complete, learned, avg_wait, max_wait, t_queries, t_total, ...
    std::vector<std::pair<std::string, Summary>> aggregate() const;
};

std::uint64_t derive_seed(std::uint64_t master, std::size_t index) noexcept;

using RunHook = std::function<void(const RunRecord&)>;
ExperimentReport run_experiment(const ExperimentPlan& plan, const RunHook& on_run = {});

// Timing columns vary run to run; without them two reports for the same
// plan are byte-identical.
std::string report_csv(const ExperimentReport& r, bool include_timings = true);
json report_json(const ExperimentReport& r, bool include_timings = true);
std::string config_fingerprint(const AcquisitionConfig& c);

// Option parsing shared by the CLI and the session service. Throw InvalidParams.
Algorithm parse_algorithm(std::string_view s);
FindScopeVariant parse_findscope(std::string_view s);
QGenMode parse_qgen(std::string_view s);
VarHeuristic parse_var_heuristic(std::string_view s);
ValHeuristic parse_val_heuristic(std::string_view s);
std::string_view qgen_name(QGenMode m) noexcept;
std::string_view var_heuristic_name(VarHeuristic h) noexcept;
std::string_view val_heuristic_name(ValHeuristic h) noexcept;

// Reads algo/findscope/qgen/var/val/cutmin/cutmax/seed/fas_cutoff from a JSON object.
AcquisitionConfig config_from_json(const json& j, AcquisitionConfig base = {});
json config_to_json(const AcquisitionConfig& c);

json metrics_to_json(const Metrics& m, bool include_timings = true);
json run_to_json(const RunRecord& run, bool include_timings = true);

}  // namespace acqlab
