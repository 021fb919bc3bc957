#include <doctest.h>

#include <set>
#include <sstream>

#include "acqlab/harness.hpp"
#include "support.hpp"

using namespace acqlab;
using namespace acqlab::testing;

namespace {

ExperimentPlan small_plan(const char* bench, std::size_t runs) {
    ExperimentPlan p;
    p.benchmark = bench;
    p.runs = runs;
    p.master_seed = 42;
    p.config.search.cut_min = Seconds(0.1);
    p.config.search.cut_max = Seconds(0.5);
    return p;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("derived seeds are deterministic and distinct") {
    std::set<std::uint64_t> seen;
    for (std::size_t i = 0; i < 1000; ++i) seen.insert(derive_seed(7, i));
    CHECK(seen.size() == 1000);
    CHECK(derive_seed(7, 3) == derive_seed(7, 3));
    CHECK(derive_seed(7, 3) != derive_seed(8, 3));
}

// Only while no wall-clock cutoff fires: a fired cutoff keeps whatever the
// search had reached, which depends on machine speed.
TEST_CASE("reports without timings are byte-identical across reruns") {
    for (const char* bench : {"example1", "latin"}) {
        for (auto algo : {Algorithm::QuAcq, Algorithm::MultiAcq, Algorithm::MQuAcq}) {
            auto plan = small_plan(bench, 3);
            if (std::string(bench) == "latin") plan.params.size = 3;
            plan.config.algorithm = algo;
            const auto a = run_experiment(plan);
            const auto b = run_experiment(plan);
            for (const auto& r : a.runs) {
                REQUIRE(r.metrics.cut_min_hits == 0);
                REQUIRE(r.metrics.cut_max_hits == 0);
            }
            CHECK(report_csv(a, false) == report_csv(b, false));
            CHECK(report_json(a, false).dump() == report_json(b, false).dump());
        }
    }
}

TEST_CASE("aggregates are recomputable from the per-run rows") {
    auto plan = small_plan("purdey", 5);
    const auto rep = run_experiment(plan);
    const auto rows = parse_csv(report_csv(rep, true));
    REQUIRE(rows.size() == 6);
    const auto& head = rows[0];
    for (const auto& [name, s] : rep.aggregate()) {
        const auto col = std::find(head.begin(), head.end(), name) - head.begin();
        REQUIRE(col < static_cast<long>(head.size()));
        double sum = 0;
        std::vector<double> xs;
        for (std::size_t r = 1; r < rows.size(); ++r) xs.push_back(std::stod(rows[r][col]));
        for (double x : xs) sum += x;
        const double mean = sum / double(xs.size());
        double ss = 0, big = 1e-12;
        for (double x : xs) {
            ss += (x - mean) * (x - mean);
            big = std::max(big, std::abs(x));
        }
        INFO(name);
        // rows print 6 significant digits, so compare at the scale of the values
        CHECK(mean == doctest::Approx(s.mean).epsilon(1e-5).scale(big));
        CHECK(std::sqrt(ss / double(xs.size() - 1)) == doctest::Approx(s.stddev).epsilon(1e-5).scale(big));
    }
}

TEST_CASE("reported query counts match the oracle and the log") {
    const auto inst = build_benchmark("purdey");
    for (auto algo : {Algorithm::QuAcq, Algorithm::MultiAcq, Algorithm::MQuAcq}) {
        AcquisitionConfig cfg;
        cfg.algorithm = algo;
        cfg.search.cut_min = Seconds(0.1);
        cfg.search.cut_max = Seconds(0.5);
        SimulatedOracle oracle(inst.vocab.size(), inst.target);
        Acquisition acq(inst.vocab, inst.make_bias(), oracle, cfg);
        const auto res = acq.run();
        CHECK(res.metrics.total_queries == oracle.queries());
        CHECK(res.metrics.total_queries == res.log.total());
        std::size_t complete = 0, sizes = 0;
        for (const auto& r : res.log.records()) {
            complete += r.example.is_complete();
            sizes += r.example.assigned_count();
        }
        CHECK(res.metrics.complete_queries == complete);
        CHECK(res.metrics.avg_query_size == doctest::Approx(double(sizes) / double(res.log.total())));
        CHECK(res.metrics.max_wait >= res.metrics.avg_wait);
    }
}

TEST_CASE("curves and verification") {
    auto plan = small_plan("purdey", 2);
    plan.curves = true;
    plan.verify = true;
    const auto rep = run_experiment(plan);
    for (const auto& run : rep.runs) {
        REQUIRE(!run.curve.empty());
        for (std::size_t i = 1; i < run.curve.size(); ++i) {
            CHECK(run.curve[i].learned >= run.curve[i - 1].learned);
            CHECK(run.curve[i].queries >= run.curve[i - 1].queries);
        }
        CHECK(run.curve.back().learned == run.metrics.learned_size);
        REQUIRE(run.equivalent.has_value());
        CHECK(*run.equivalent);
    }
    const auto j = report_json(rep);
    CHECK(j["runs"][0].contains("curve"));
    CHECK(j["config"]["cutmin"].get<double>() == 0.1);
}

TEST_CASE("plan and config validation") {
    auto plan = small_plan("purdey", 0);
    CHECK_THROWS_AS(plan.validate(), Error);
    plan.runs = 1;
    plan.config.search.cut_min = Seconds(2);
    CHECK_THROWS_AS(plan.validate(), Error);
    plan = small_plan("", 1);
    CHECK_THROWS_AS(plan.validate(), Error);

    const auto c = config_from_json(json{{"algo", "quacq"}, {"findscope", 1}, {"val", "maxv"}, {"cutmin", 0.2}});
    CHECK(c.algorithm == Algorithm::QuAcq);
    CHECK(c.findscope == FindScopeVariant::V1);
    CHECK(c.search.val == ValHeuristic::MaxV);
    const auto back = config_from_json(config_to_json(c));
    CHECK(config_fingerprint(back) == config_fingerprint(c));
    CHECK_THROWS_AS(config_from_json(json{{"colour", "red"}}), Error);
    CHECK_THROWS_AS(config_from_json(json{{"algo", "fastacq"}}), Error);
    CHECK_THROWS_AS(config_from_json(json{{"cutmin", "soon"}}), Error);
    CHECK_THROWS_AS(parse_qgen("maxv"), Error);
}
