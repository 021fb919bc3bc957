#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "acqlab/model.hpp"

namespace acqlab {

struct BenchmarkParams {
    std::optional<std::size_t> size;  // n for latin, courses for examtt, vars for rlfap, marks for golomb
    std::uint64_t seed = 1;           // rlfap generator only
    std::optional<std::size_t> bias_level;  // extra relations from the sweep language
};

struct BenchmarkInfo {
    std::string name;
    std::string description;
};

const std::vector<BenchmarkInfo>& benchmark_catalog();

// Throws UnknownBenchmark / InvalidParams.
Instance build_benchmark(std::string_view name, const BenchmarkParams& params = {});

// Individual families.
Instance example1();
Instance latin(std::size_t n);
Instance sudoku(std::size_t box);  // box=3 gives the 9x9 grid, box=2 the 4x4 one
Instance gtsudoku();
Instance gtsudoku_from_json(std::string_view text);
Instance puzzle_from_json(std::string_view text);
Instance zebra();
Instance murder();
Instance purdey();
Instance allergy();
Instance golomb(std::size_t marks);
Instance exam_tt(std::size_t courses);
Instance rlfap(std::size_t vars, std::uint64_t seed);

// Known hidden solution for the puzzle benchmarks, when shipped.
std::optional<std::vector<Value>> puzzle_solution(std::string_view name);

// Ordered relation list used to grow a bias in the bias-size sweep.
std::vector<RelationTemplate> sweep_language();
// Adds the first `level` sweep relations that are missing from the language.
void widen_language(Instance& inst, std::size_t level);

// Optimal ruler length for m marks (m <= 16).
Value golomb_length(std::size_t marks);

}  // namespace acqlab
