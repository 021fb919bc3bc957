#include "acqlab/benchmarks.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "acqlab/instance_io.hpp"

namespace acqlab {

namespace detail {
std::string_view embedded_data(std::string_view name);
}

namespace {

using RK = RelationKind;

std::vector<RelationTemplate> basic_language() {
    return {{RK::Eq, 0}, {RK::Neq, 0}, {RK::Gt, 0}, {RK::Lt, 0}};
}

void clique(std::vector<Constraint>& out, const std::vector<VarId>& vars) {
    for (std::size_t i = 0; i < vars.size(); ++i)
        for (std::size_t j = i + 1; j < vars.size(); ++j) out.push_back(Constraint(RK::Neq, {vars[i], vars[j]}));
}

std::string_view data_or_throw(std::string_view name) {
    auto text = detail::embedded_data(name);
    if (text.empty()) throw Error(ErrorCode::Internal, "missing embedded data for " + std::string(name));
    return text;
}

std::vector<std::string> cell_names(std::size_t rows, std::size_t cols) {
    std::vector<std::string> names;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            names.push_back("r" + std::to_string(r + 1) + "c" + std::to_string(c + 1));
    return names;
}

std::size_t require_size(const BenchmarkParams& p, std::size_t def, std::size_t lo, std::size_t hi,
                         std::string_view what) {
    const std::size_t n = p.size.value_or(def);
    if (n < lo || n > hi)
        throw Error(ErrorCode::InvalidParams, std::string(what) + " size must be in [" + std::to_string(lo) + ", " +
                                                  std::to_string(hi) + "], got " + std::to_string(n));
    return n;
}

}  // namespace

const std::vector<BenchmarkInfo>& benchmark_catalog() {
    static const std::vector<BenchmarkInfo> cat = {
        {"example1", "8 variables, domain 1..8, three != constraints"},
        {"sudoku", "9x9 Sudoku, != on rows, columns and boxes"},
        {"sudoku4", "4x4 Sudoku with 2x2 boxes"},
        {"gtsudoku", "Sudoku with > / < on in-box neighbours"},
        {"latin", "Latin square of order n (default 10)"},
        {"zebra", "Zebra puzzle, 25 variables"},
        {"murder", "Murder mystery, 20 variables"},
        {"purdey", "Purdey's general store, 12 variables"},
        {"allergy", "Allergy puzzle, 12 variables"},
        {"golomb", "Golomb ruler with quaternary distance constraints (default 12 marks)"},
        {"examtt", "Exam timetabling (default 24 courses)"},
        {"rlfap", "Seeded frequency assignment instance (default 50 variables)"},
    };
    return cat;
}

Instance build_benchmark(std::string_view name, const BenchmarkParams& p) {
    Instance inst;
    if (name == "example1") inst = example1();
    else if (name == "sudoku") inst = sudoku(3);
    else if (name == "sudoku4") inst = sudoku(2);
    else if (name == "gtsudoku") inst = gtsudoku();
    else if (name == "latin") inst = latin(require_size(p, 10, 2, 30, "latin"));
    else if (name == "zebra") inst = zebra();
    else if (name == "murder") inst = murder();
    else if (name == "purdey") inst = purdey();
    else if (name == "allergy") inst = allergy();
    else if (name == "golomb") inst = golomb(require_size(p, 12, 4, 16, "golomb"));
    else if (name == "examtt") inst = exam_tt(require_size(p, 24, 3, 120, "examtt"));
    else if (name == "rlfap") inst = rlfap(require_size(p, 50, 4, 400, "rlfap"), p.seed);
    else throw Error(ErrorCode::UnknownBenchmark, "unknown benchmark '" + std::string(name) + "'");
    if (p.bias_level) widen_language(inst, *p.bias_level);
    return inst;
}

Instance example1() {
    Instance inst;
    inst.name = "example1";
    inst.vocab = Vocabulary::uniform(8, 1, 8);
    inst.language = {{RK::Neq, 0}};
    inst.target = {Constraint(RK::Neq, {0, 1}), Constraint(RK::Neq, {0, 2}), Constraint(RK::Neq, {2, 3})};
    for (int i = 1; i <= 8; ++i) inst.var_names.push_back("x" + std::to_string(i));
    return inst;
}

Instance latin(std::size_t n) {
    if (n < 2) throw Error(ErrorCode::InvalidParams, "latin square needs n >= 2");
    Instance inst;
    inst.name = "latin" + std::to_string(n);
    inst.vocab = Vocabulary::uniform(n * n, 1, static_cast<Value>(n));
    inst.language = basic_language();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<VarId> row, col;
        for (std::size_t j = 0; j < n; ++j) {
            row.push_back(static_cast<VarId>(i * n + j));
            col.push_back(static_cast<VarId>(j * n + i));
        }
        clique(inst.target, row);
        clique(inst.target, col);
    }
    inst.var_names = cell_names(n, n);
    return inst;
}

Instance sudoku(std::size_t box) {
    if (box < 2 || box > 5) throw Error(ErrorCode::InvalidParams, "sudoku box size must be in [2, 5]");
    const std::size_t n = box * box;
    Instance inst = latin(n);
    inst.name = box == 3 ? "sudoku" : "sudoku" + std::to_string(n);
    std::vector<Constraint> extra;
    for (std::size_t br = 0; br < box; ++br)
        for (std::size_t bc = 0; bc < box; ++bc) {
            std::vector<VarId> cells;
            for (std::size_t i = 0; i < box; ++i)
                for (std::size_t j = 0; j < box; ++j)
                    cells.push_back(static_cast<VarId>((br * box + i) * n + bc * box + j));
            clique(extra, cells);
        }
    std::sort(inst.target.begin(), inst.target.end());
    for (const auto& c : extra)
        if (!std::binary_search(inst.target.begin(), inst.target.end(), c)) inst.target.push_back(c);
    std::sort(inst.target.begin(), inst.target.end());
    inst.target.erase(std::unique(inst.target.begin(), inst.target.end()), inst.target.end());
    return inst;
}

Instance gtsudoku_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidInstance, std::string("gtsudoku data: ") + e.what());
    }
    Instance inst = sudoku(3);
    inst.name = "gtsudoku";
    std::map<std::pair<VarId, VarId>, Constraint> gt;
    try {
        for (const auto& e : j.at("greater")) {
            const auto a = e.at(0).get<VarId>(), b = e.at(1).get<VarId>();
            if (a >= 81 || b >= 81 || a == b) throw Error(ErrorCode::InvalidInstance, "gtsudoku edge out of range");
            gt.insert_or_assign({std::min(a, b), std::max(a, b)}, Constraint(RK::Gt, {a, b}));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidInstance, std::string("gtsudoku data: ") + e.what());
    }
    for (auto& c : inst.target) {
        auto it = gt.find({c.scope()[0], c.scope()[1]});
        if (it == gt.end()) continue;
        c = it->second;
        gt.erase(it);
    }
    if (!gt.empty()) throw Error(ErrorCode::InvalidInstance, "gtsudoku edge joins cells that share no unit");
    return inst;
}

Instance gtsudoku() { return gtsudoku_from_json(data_or_throw("gtsudoku")); }

// Puzzle format: named attribute groups (all-different within a group) plus
// binary clues between named variables.
Instance puzzle_from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        Instance inst;
        inst.name = j.at("name").get<std::string>();
        std::map<std::string, VarId> ids;
        std::vector<std::vector<VarId>> groups;
        for (const auto& g : j.at("groups")) {
            groups.emplace_back();
            for (const auto& v : g) {
                const auto name = v.get<std::string>();
                if (ids.count(name)) throw Error(ErrorCode::InvalidInstance, "duplicate puzzle variable " + name);
                ids[name] = static_cast<VarId>(inst.var_names.size());
                groups.back().push_back(ids[name]);
                inst.var_names.push_back(name);
            }
        }
        const auto& d = j.at("domain");
        inst.vocab = Vocabulary::uniform(inst.var_names.size(), d.at("min").get<Value>(), d.at("max").get<Value>());
        for (const auto& k : j.at("language")) {
            auto kind = parse_relation(k.get<std::string>());
            if (!kind) throw Error(ErrorCode::InvalidInstance, "unknown relation " + k.get<std::string>());
            inst.language.push_back({*kind, 0});
        }
        for (const auto& g : groups) clique(inst.target, g);
        auto var = [&](const json& v) {
            auto it = ids.find(v.get<std::string>());
            if (it == ids.end()) throw Error(ErrorCode::InvalidInstance, "unknown puzzle variable " + v.dump());
            return it->second;
        };
        for (const auto& c : j.at("clues")) {
            auto kind = parse_relation(c.at(0).get<std::string>());
            if (!kind) throw Error(ErrorCode::InvalidInstance, "unknown relation in clue " + c.dump());
            inst.target.push_back(Constraint(*kind, {var(c.at(1)), var(c.at(2))}));
        }
        inst.validate();
        return inst;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidInstance, std::string("puzzle data: ") + e.what());
    }
}

Instance zebra() { return puzzle_from_json(data_or_throw("zebra")); }
Instance murder() { return puzzle_from_json(data_or_throw("murder")); }
Instance purdey() { return puzzle_from_json(data_or_throw("purdey")); }
Instance allergy() { return puzzle_from_json(data_or_throw("allergy")); }

std::optional<std::vector<Value>> puzzle_solution(std::string_view name) {
    auto text = detail::embedded_data(name);
    if (text.empty()) return std::nullopt;
    const json j = json::parse(text);
    if (!j.contains("solution")) return std::nullopt;
    const auto& s = j["solution"];
    if (s.is_array()) return s.get<std::vector<Value>>();
    std::vector<Value> out;
    for (const auto& g : j.at("groups"))
        for (const auto& v : g) out.push_back(s.at(v.get<std::string>()).get<Value>());
    return out;
}

Value golomb_length(std::size_t marks) {
    static constexpr Value kOptimal[] = {0, 0, 1, 3, 6, 11, 17, 25, 34, 44, 55, 72, 85, 106, 127, 151, 177};
    if (marks < 2 || marks > 16) throw Error(ErrorCode::InvalidParams, "golomb marks must be in [2, 16]");
    return kOptimal[marks];
}

Instance golomb(std::size_t m) {
    Instance inst;
    inst.name = "golomb" + std::to_string(m);
    inst.vocab = Vocabulary::uniform(m, 0, golomb_length(m));
    inst.language = basic_language();
    inst.language.push_back({RK::AbsDiffPairEq, 0});
    inst.language.push_back({RK::AbsDiffPairNeq, 0});
    for (VarId a = 0; a < m; ++a)
        for (VarId b = a + 1; b < m; ++b)
            for (VarId c = b + 1; c < m; ++c)
                for (VarId d = c + 1; d < m; ++d) inst.target.push_back(Constraint(RK::AbsDiffPairNeq, {a, b, c, d}));
    for (std::size_t i = 0; i < m; ++i) inst.var_names.push_back("mark" + std::to_string(i + 1));
    return inst;
}

// Courses in consecutive triples form a semester; three slots per day.
Instance exam_tt(std::size_t courses) {
    if (courses < 3) throw Error(ErrorCode::InvalidParams, "examtt needs at least 3 courses");
    const std::size_t days = std::max<std::size_t>(10, (courses + 2) / 3);
    Instance inst;
    inst.name = "examtt" + std::to_string(courses);
    inst.vocab = Vocabulary::uniform(courses, 0, static_cast<Value>(3 * days - 1));
    inst.language = basic_language();
    for (Value y = 0; y < 5; ++y) inst.language.push_back({RK::FloorDistGtY, y});
    for (VarId i = 0; i < courses; ++i)
        for (VarId j = i + 1; j < courses; ++j) {
            if (i / 3 == j / 3)
                inst.target.push_back(Constraint(RK::FloorDistGtY, {i, j}, 0));
            else
                inst.target.push_back(Constraint(RK::Neq, {i, j}));
        }
    for (std::size_t i = 0; i < courses; ++i)
        inst.var_names.push_back("s" + std::to_string(i / 3 + 1) + "_c" + std::to_string(i % 3 + 1));
    return inst;
}

// Random pairs with distance constraints satisfied by a hidden assignment.
Instance rlfap(std::size_t n, std::uint64_t seed) {
    if (n < 4) throw Error(ErrorCode::InvalidParams, "rlfap needs at least 4 variables");
    static constexpr Value kY[] = {1, 2, 4, 8, 16};
    Instance inst;
    inst.name = "rlfap" + std::to_string(n);
    inst.vocab = Vocabulary::uniform(n, 0, 39);
    for (Value y : kY) inst.language.push_back({RK::AbsDiffGtY, y});
    for (Value y : kY) inst.language.push_back({RK::AbsDiffEqY, y});

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Value> val(0, 39);
    std::vector<Value> hidden(n);
    for (auto& v : hidden) v = val(rng);

    std::vector<std::pair<VarId, VarId>> pairs;
    for (VarId i = 0; i < n; ++i)
        for (VarId j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    const std::size_t want = std::min(pairs.size(), n * 5 / 2);
    for (const auto& [i, j] : pairs) {
        if (inst.target.size() == want) break;
        const Value t[2] = {hidden[i], hidden[j]};
        std::vector<RelationTemplate> fits;
        for (const auto& r : inst.language)
            if (relation_holds(r.kind, r.param, t)) fits.push_back(r);
        if (fits.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick(0, fits.size() - 1);
        const auto r = fits[pick(rng)];
        inst.target.push_back(Constraint(r.kind, {i, j}, r.param));
    }
    for (std::size_t i = 0; i < n; ++i) inst.var_names.push_back("f" + std::to_string(i));
    return inst;
}

std::vector<RelationTemplate> sweep_language() {
    std::vector<RelationTemplate> out = {{RK::Eq, 0},  {RK::Neq, 0},     {RK::Gt, 0},         {RK::Lt, 0},
                                         {RK::Leq, 0}, {RK::Geq, 0},     {RK::DiffEq1, 0},    {RK::AbsDiffEq1, 0}};
    for (Value y = 1; y <= 5; ++y) out.push_back({RK::AbsDiffGtY, y});
    for (Value y = 2; y <= 6; ++y) out.push_back({RK::AbsDiffEqY, y});
    for (Value y = 0; y < 5; ++y) out.push_back({RK::FloorDistGtY, y});
    return out;
}

void widen_language(Instance& inst, std::size_t level) {
    std::size_t added = 0;
    for (const auto& r : sweep_language()) {
        if (added == level) break;
        if (std::find(inst.language.begin(), inst.language.end(), r) != inst.language.end()) continue;
        inst.language.push_back(r);
        ++added;
    }
    inst.bias.reset();
}

}  // namespace acqlab
