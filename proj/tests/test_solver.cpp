#include <doctest.h>

#include "acqlab/benchmarks.hpp"
#include "acqlab/solver.hpp"
#include "properties.hpp"

using namespace acqlab;
using namespace acqlab::testing;
using RK = RelationKind;

namespace {

SearchConfig cfg(std::uint64_t seed = 1, QGenMode mode = QGenMode::MaxComplete) {
    SearchConfig c;
    c.seed = seed;
    c.mode = mode;
    c.cut_min = Seconds(5);
    c.cut_max = Seconds(10);
    return c;
}

}  // namespace

TEST_CASE("config validation") {
    SearchConfig c;
    c.cut_min = Seconds(2);
    c.cut_max = Seconds(1);
    CHECK_THROWS_AS(c.validate(), Error);
    c.cut_min = Seconds(0);
    CHECK_THROWS_AS(c.validate(), Error);
    c.cut_min = Seconds(0.5);
    c.cut_max = Seconds(0.5);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("solve") {
    const auto v2 = Vocabulary::uniform(2, 1, 2);
    Solver s(v2, cfg());
    auto r = s.solve({});
    CHECK(r.status == SolveStatus::Sat);
    REQUIRE(r.solution);
    CHECK(r.solution->is_complete());
    const std::vector<Constraint> contra = {Constraint(RK::Eq, {0, 1}), Constraint(RK::Neq, {0, 1})};
    CHECK(s.solve(contra).status == SolveStatus::Unsat);

    const auto lat = latin(4);
    Solver ls(lat.vocab, cfg());
    auto lr = ls.solve(lat.target);
    REQUIRE(lr.status == SolveStatus::Sat);
    CHECK(satisfies_all(lat.target, *lr.solution));

    const auto gol = golomb(5);
    Solver gs(gol.vocab, cfg());
    auto gr = gs.solve(gol.target);
    REQUIRE(gr.status == SolveStatus::Sat);
    CHECK(satisfies_all(gol.target, *gr.solution));
}

TEST_CASE("qgen basics") {
    const auto v2 = Vocabulary::uniform(2, 1, 2);
    Solver s(v2, cfg());
    Bias empty(2);
    auto r = s.qgen({}, empty);
    CHECK_FALSE(r.example);
    CHECK(r.proven_none);

    Bias one(2, std::vector<Constraint>{Constraint(RK::Neq, {0, 1})});
    auto q = s.qgen({}, one);
    REQUIRE(q.example);
    CHECK(q.example->at(0) == q.example->at(1));
    CHECK(q.violated_count == 1);

    // Running example: never an all-different assignment.
    const auto ex = example1();
    Solver es(ex.vocab, cfg());
    auto eq = es.qgen({}, ex.make_bias());
    REQUIRE(eq.example);
    CHECK(ex.make_bias().kappa_size(*eq.example) >= 1);
}

TEST_CASE("qgen reaches the brute-force optimum on tiny instances") {
    const auto t = qgen_optimality(41, 120);
    INFO(t.summary());
    CHECK(t.checked == 360);
    CHECK(t.ok());
}

TEST_CASE("qgen_partial finds a violable bias member exactly when one exists") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 120; ++trial) {
        std::uniform_int_distribution<std::size_t> nd(2, 4);
        std::uniform_int_distribution<Value> dd(2, 4);
        const std::size_t n = nd(rng);
        const auto vocab = Vocabulary::uniform(n, 1, dd(rng));
        auto all = default_bias(n, rich_language());
        std::shuffle(all.begin(), all.end(), rng);
        const std::size_t nh = rng() % 3, nb = 1 + rng() % (all.size() - nh);
        std::vector<Constraint> hard(all.begin(), all.begin() + static_cast<long>(nh));
        std::vector<Constraint> soft(all.begin() + static_cast<long>(nh), all.begin() + static_cast<long>(nh + nb));
        Bias b(n, soft);

        // max_B: a candidate exists iff some bias member can be violated
        // on its own scope without breaking a hard constraint inside it.
        bool violable = false;
        for (const auto& c : soft) {
            const auto sc = c.scope_set();
            std::vector<Constraint> local;
            for (const auto& h : hard) {
                const auto hs = h.scope_set();
                if (std::includes(sc.begin(), sc.end(), hs.begin(), hs.end())) local.push_back(h);
            }
            for_each_complete(vocab, [&](const Assignment& full) {
                const auto p = full.project(sc);
                if (violates(c, p) && satisfies_all(local, p)) violable = true;
            });
        }
        auto pc = cfg(trial, QGenMode::MaxBPartial);
        pc.var = VarHeuristic::Bdeg;
        Solver sp(vocab, pc);
        const auto rp = sp.qgen_partial(hard, b);
        CHECK(rp.example.has_value() == violable);
        CHECK(rp.proven_none == !violable);
        if (rp.example) {
            CHECK(rp.violated_count == b.kappa_size(*rp.example));
            CHECK(rp.violated_count >= 1);
            CHECK(satisfies_all(hard, *rp.example));
        }
    }
}

TEST_CASE("proven_none is sound") {
    // Hard network implies every bias member.
    const auto vocab = Vocabulary::uniform(3, 1, 3);
    const std::vector<Constraint> hard = {Constraint(RK::Lt, {0, 1}), Constraint(RK::Lt, {1, 2})};
    Bias b(3, std::vector<Constraint>{Constraint(RK::Lt, {0, 2}), Constraint(RK::Neq, {0, 2})});
    Solver s(vocab, cfg());
    const auto r = s.qgen(hard, b);
    CHECK_FALSE(r.example);
    CHECK(r.proven_none);
    bool any = false;
    for_each_complete(vocab, [&](const Assignment& e) {
        if (satisfies_all(hard, e) && b.kappa_size(e) > 0) any = true;
    });
    CHECK_FALSE(any);

    // max_B can still violate implied constraints on partial assignments.
    auto pc = cfg(1, QGenMode::MaxBPartial);
    pc.var = VarHeuristic::Bdeg;
    Solver sp(vocab, pc);
    const auto rp = sp.qgen_partial(hard, b);
    REQUIRE(rp.example);
    CHECK_FALSE(rp.example->is_complete());
    CHECK(rp.violated_count >= 1);
    CHECK(satisfies_all(hard, *rp.example));
}

TEST_CASE("qgen_partial on a three-variable bias") {
    const auto vocab = Vocabulary::uniform(3, 1, 3);
    Bias b(3, std::vector<Constraint>{Constraint(RK::Neq, {0, 1})});
    Solver s(vocab, cfg(1, QGenMode::MaxBPartial));
    const auto r = s.qgen_partial({}, b);
    REQUIRE(r.example);
    CHECK(r.violated_count == 1);
    CHECK(r.example->at(0) == r.example->at(1));
    Bias none(3);
    const auto rn = s.qgen_partial({}, none);
    CHECK_FALSE(rn.example);
    CHECK(rn.proven_none);
}

TEST_CASE("qgen is deterministic for a seed") {
    const auto inst = zebra();
    const auto b = inst.make_bias();
    for (auto val : {ValHeuristic::Random, ValHeuristic::MaxV}) {
        auto c = cfg(77);
        c.val = val;
        c.cut_min = Seconds(0.3);
        c.cut_max = Seconds(0.6);
        Solver a(inst.vocab, c), bsol(inst.vocab, c);
        // Small hard network so both runs finish far below the cutoffs.
        const std::vector<Constraint> hard(inst.target.begin(), inst.target.begin() + 5);
        Bias small(inst.vocab.size(), std::vector<Constraint>(inst.target.begin() + 5, inst.target.begin() + 9));
        const auto r1 = a.qgen(hard, small);
        const auto r2 = bsol.qgen(hard, small);
        REQUIRE(r1.example);
        REQUIRE(r2.example);
        CHECK(*r1.example == *r2.example);
    }
    (void)b;
}

TEST_CASE("variable heuristics") {
    const auto vocab = Vocabulary::uniform(4, 1, 3);
    const std::vector<VarId> vars = {0, 1, 2, 3};
    SearchState st(vocab, vars);
    ConstraintGraph hard(4);
    ConstraintGraph soft(4);
    soft.add(Constraint(RK::Neq, {1, 0}));
    soft.add(Constraint(RK::Lt, {1, 2}));
    soft.add(Constraint(RK::Eq, {1, 3}));
    soft.add(Constraint(RK::Neq, {2, 3}));
    std::vector<std::uint32_t> w;
    HeuristicContext ctx{&hard, w, &soft};
    CHECK(pick_variable(st, VarHeuristic::Bdeg, ctx) == 1);
    CHECK(pick_variable(st, VarHeuristic::Lex, ctx) == 0);
    CHECK(pick_variable(st, VarHeuristic::Dom, ctx) == 0);
    CHECK(pick_variable(st, VarHeuristic::DomWdeg, ctx) == 0);
    ConstraintGraph even(4);
    HeuristicContext ctx2{&hard, w, &even};
    CHECK(pick_variable(st, VarHeuristic::Bdeg, ctx2) == 0);
    st.remove_value(2, 0);
    CHECK(pick_variable(st, VarHeuristic::Dom, ctx) == 2);
}

TEST_CASE("max_v value ordering") {
    const auto inst = example1();
    const auto all = default_bias(8, inst.language);
    ConstraintGraph soft(8);
    for (const auto& c : all) soft.add(c);
    ConstraintGraph hard(8);
    std::vector<std::uint32_t> w;
    HeuristicContext ctx{&hard, w, &soft};
    std::mt19937_64 rng(1);
    SearchState st(inst.vocab, all_vars(8));
    // Nothing assigned: ties, ascending order.
    auto order = order_values(st, 0, ValHeuristic::MaxV, ctx, rng);
    CHECK(order.front() == 0);
    st.assign(0, 0);
    for (VarId x = 1; x < 8; ++x) {
        auto o = order_values(st, x, ValHeuristic::MaxV, ctx, rng);
        st.assign(x, o.front());
    }
    CHECK(st.to_assignment() == assignment_of({1, 1, 1, 1, 1, 1, 1, 1}));
    // Empty bias: same as lex.
    ConstraintGraph none(8);
    HeuristicContext ctx0{&hard, w, &none};
    SearchState s2(inst.vocab, all_vars(8));
    s2.assign(0, 4);
    auto lexish = order_values(s2, 1, ValHeuristic::MaxV, ctx0, rng);
    auto lex = order_values(s2, 1, ValHeuristic::Lex, ctx0, rng);
    CHECK(lexish == lex);
}

TEST_CASE("is_implied") {
    const auto v = Vocabulary::uniform(3, 1, 4);
    Solver s(v, cfg());
    const std::vector<Constraint> eqs = {Constraint(RK::Eq, {0, 1}), Constraint(RK::Eq, {1, 2})};
    CHECK(s.is_implied(eqs, Constraint(RK::Eq, {0, 2}), Seconds(1)) == Implication::Implied);
    Assignment w;
    CHECK(s.is_implied({}, Constraint(RK::Neq, {0, 1}), Seconds(1), &w) == Implication::NotImplied);
    CHECK(w.is_complete());
    CHECK(w.at(0) == w.at(1));
    const auto v10 = Vocabulary::uniform(2, 0, 9);
    Solver s10(v10, cfg());
    const std::vector<Constraint> gt3 = {Constraint(RK::AbsDiffGtY, {0, 1}, 3)};
    CHECK(s10.is_implied(gt3, Constraint(RK::AbsDiffGtY, {0, 1}, 1), Seconds(1)) == Implication::Implied);
    CHECK(s10.is_implied(gt3, Constraint(RK::AbsDiffGtY, {0, 1}, 5), Seconds(1)) == Implication::NotImplied);
    // Brute-force reference on random pairs.
    std::mt19937_64 rng(8);
    const auto lang = rich_language();
    const auto pool = default_bias(3, lang);
    for (int i = 0; i < 100; ++i) {
        std::vector<Constraint> c = {pool[rng() % pool.size()], pool[rng() % pool.size()]};
        const auto t = pool[rng() % pool.size()];
        const bool ref = brute_entails(v, c, std::vector<Constraint>{t});
        const auto got = s.is_implied(c, t, Seconds(1));
        CHECK(got == (ref ? Implication::Implied : Implication::NotImplied));
    }
}

TEST_CASE("gen_discriminating") {
    const auto v = Vocabulary::uniform(2, 1, 2);
    Solver s(v, cfg());
    const std::vector<VarId> scope = {0, 1};
    const std::vector<Constraint> single = {Constraint(RK::Neq, {0, 1})};
    CHECK_FALSE(s.gen_discriminating({}, single, scope, Seconds(1)));
    const std::vector<Constraint> two = {Constraint(RK::Neq, {0, 1}), Constraint(RK::Lt, {0, 1})};
    auto e = s.gen_discriminating({}, two, scope, Seconds(1));
    REQUIRE(e);
    CHECK(*e == assignment_of({2, 1}));
    const std::vector<Constraint> opp = {Constraint(RK::Eq, {0, 1}), Constraint(RK::Neq, {0, 1})};
    auto e2 = s.gen_discriminating({}, opp, scope, Seconds(1));
    REQUIRE(e2);
    CHECK(e2->assigned_vars() == scope);
    // Equivalent candidates cannot be separated.
    const std::vector<Constraint> same = {Constraint(RK::Neq, {0, 1}), Constraint(RK::AbsDiffGtY, {0, 1}, 0)};
    CHECK_FALSE(s.gen_discriminating({}, same, scope, Seconds(1)));
}

TEST_CASE("equivalence check") {
    const auto v = Vocabulary::uniform(3, 1, 3);
    const std::vector<Constraint> a = {Constraint(RK::Lt, {0, 1}), Constraint(RK::Lt, {1, 2})};
    const std::vector<Constraint> b = {Constraint(RK::Lt, {0, 1}), Constraint(RK::Lt, {1, 2}), Constraint(RK::Lt, {0, 2})};
    const std::vector<Constraint> c = {Constraint(RK::Lt, {0, 1})};
    auto r = check_equivalence(v, a, b, Seconds(1));
    CHECK(r.equivalent);
    CHECK(r.complete);
    auto r2 = check_equivalence(v, a, c, Seconds(1));
    CHECK_FALSE(r2.equivalent);
    CHECK(r2.not_entailed_by_second.size() == 1);
    CHECK(r2.not_entailed_by_first.empty());
}
