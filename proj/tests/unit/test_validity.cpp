#include "doctest.h"
#include "helpers.hpp"

#include "wfps/error.hpp"

#include <random>

using namespace wfps;
using testing::load_program;

namespace {

HoareTriple triple(const Program& p, const std::string& pre, const std::string& word, const std::string& post) {
    return {parse_assertion(pre), parse_word(p, word), parse_assertion(post)};
}

} // namespace

TEST_CASE("validity of basis-style triples with a prover") {
    Program p = load_program("decrement.wp");
    auto cfg = testing::prover_config();
    REQUIRE_MESSAGE(cfg.prover, "a solver is needed for this test");
    ValidityOracle oracle(cfg);
    CHECK(check_hoare_validity(p, triple(p, "true", "d=pos()@1", "d(1) > 0"), oracle).verdict == Validity::Valid);
    CHECK(check_hoare_validity(p, triple(p, "d(1) > 0; old(x) = x", "x=x-d@1", "old(x) > x"), oracle).verdict ==
          Validity::Valid);
    auto bad = check_hoare_validity(p, triple(p, "true", "x=pos()@1", "x < 0"), oracle);
    CHECK(bad.verdict == Validity::Invalid);
    CHECK(bad.after.at(Var::global("x")) == 1);
    CHECK(oracle.prover_calls() > 0);
}

TEST_CASE("bounded fallback refutes but never claims validity") {
    Program p = load_program("decrement.wp");
    ValidityOracle oracle(OracleConfig{});
    auto bad = check_hoare_validity(p, triple(p, "true", "x=pos()@1", "x < 0"), oracle);
    CHECK(bad.verdict == Validity::Invalid);
    CHECK(bad.after.at(Var::global("x")) == 1);
    auto good = check_hoare_validity(p, triple(p, "true", "d=pos()@1", "d(1) > 0"), oracle);
    CHECK(good.verdict == Validity::Unknown);
}

TEST_CASE("a broken prover command degrades to the bounded layer") {
    Program p = load_program("decrement.wp");
    OracleConfig cfg;
    cfg.prover = "/nonexistent/solver";
    ValidityOracle oracle(cfg);
    auto r = check_hoare_validity(p, triple(p, "true", "d=pos()@1", "d(1) > 0"), oracle);
    CHECK(r.verdict == Validity::Unknown);
    CHECK(check_hoare_validity(p, triple(p, "true", "x=pos()@1", "x < 0"), oracle).verdict == Validity::Invalid);
}

TEST_CASE("prover and enumeration never disagree") {
    Program p = load_program("decrement.wp");
    auto cfg = testing::prover_config();
    REQUIRE(cfg.prover);
    ValidityOracle prover(cfg);
    ValidityOracle bounded(OracleConfig{});
    std::vector<std::string> pres = {"true", "x > 0", "d(1) > 0", "old(x) = x", "d(1) > 0; old(x) = x", "x >= 2"};
    std::vector<std::string> words = {"x=pos()@1", "d=pos()@1", "[x>0]@1", "x=x-d@1", "x=x-d@2",
                                      "[x>0]@1 x=x-d@1"};
    std::vector<std::string> posts = {"x > 0", "d(1) > 0", "old(x) > x", "old(x) >= 0", "x >= 0", "d(2) > 0"};
    std::mt19937 rng(5);
    for (int round = 0; round < 60; ++round) {
        auto t = triple(p, pres[rng() % pres.size()], words[rng() % words.size()], posts[rng() % posts.size()]);
        auto a = prover.check(p, t);
        auto b = bounded.check(p, t);
        if (a.verdict == Validity::Valid) CHECK(b.verdict != Validity::Invalid);
        if (b.verdict == Validity::Invalid) CHECK(a.verdict == Validity::Invalid);
    }
}

TEST_CASE("assertion evaluation on states") {
    Program p = load_program("decrement.wp");
    ProgramState s = initial_state(p, 1, {{Var::global("x"), 1}, {Var::local("d", 1), 2}});
    CHECK(eval_assertion(s, nullptr, parse_assertion("d(1) > 0")));
    ProgramState old = initial_state(p, 1, {{Var::global("x"), 5}});
    ProgramState now = initial_state(p, 1, {{Var::global("x"), 3}});
    CHECK(eval_assertion(now, &old, parse_assertion("old(x) > x; old(x) >= 0")));
    CHECK_THROWS_AS(eval_assertion(s, nullptr, parse_assertion("d(2) > 0")), Error);
    CHECK_THROWS_AS(eval_assertion(s, nullptr, parse_assertion("old(x) > 0")), Error);
}

TEST_CASE("ranking relation on states") {
    Program p = load_program("decrement.wp");
    RankingFormula w{parse_term("x"), 0};
    auto st = [&](int64_t x) { return initial_state(p, 1, {{Var::global("x"), x}}); };
    CHECK(eval_ranking_relation(st(2), st(1), w));
    CHECK_FALSE(eval_ranking_relation(st(2), st(2), w));
    CHECK_FALSE(eval_ranking_relation(st(-1), st(-2), w));
}

TEST_CASE("s-expression models") {
    auto xs = parse_sexprs("(\n (define-fun |x| () Int (- 5))\n (define-fun y () Int 3))");
    REQUIRE(xs.size() == 1);
    CHECK(xs[0].items.size() == 2);
    CHECK(xs[0].items[0].items[1].atom == "x");
}
