#include "doctest.h"
#include "helpers.hpp"

#include "wfps/engine.hpp"
#include "wfps/lp.hpp"

using namespace wfps;
using testing::load_program;
using testing::prover_config;
using testing::slurp;

namespace {

// Brute-force check that every execution of the loop body from small states
// satisfying `support` decreases t and starts at or above the bound.
bool ranking_holds_on_samples(const Program& p, const Word& loop, const Assertion& support, const RankingFormula& r) {
    std::set<Var> vars;
    for (const auto& ic : loop) {
        for (const auto& v : p.command(ic.cmd).reads()) vars.insert(bind_thread(v, ic.thread));
        for (const auto& v : p.command(ic.cmd).writes()) vars.insert(bind_thread(v, ic.thread));
    }
    std::vector<Var> vs(vars.begin(), vars.end());
    std::vector<int64_t> vals(vs.size(), -4);
    for (;;) {
        Valuation start;
        for (size_t i = 0; i < vs.size(); ++i) start[vs[i]] = vals[i];
        auto look = [&](const Valuation& v) { return [&v](const Var& x) { auto it = v.find(x); return it == v.end() ? int64_t{0} : it->second; }; };
        if (support.holds(look(start))) {
            std::vector<Valuation> frontier{start};
            for (const auto& ic : loop) {
                std::vector<Valuation> next;
                for (const auto& s : frontier)
                    for (auto& t : execute(p, p.command(ic.cmd), ic.thread, s, HavocRange{-4, 4})) next.push_back(t);
                frontier = std::move(next);
            }
            for (const auto& end : frontier)
                if (!r.relates(look(start), look(end))) return false;
        }
        size_t i = 0;
        while (i < vals.size() && vals[i] == 4) vals[i++] = -4;
        if (i == vals.size()) break;
        ++vals[i];
    }
    return true;
}

bool contains_up_to_pre(const Basis& b, const HoareTriple& t) {
    return std::any_of(b.triples.begin(), b.triples.end(), [&](const HoareTriple& u) {
        return u.word == t.word && u.post == t.post && comb_entails(t.pre, u.pre);
    });
}

} // namespace

TEST_CASE("exact linear programs") {
    LinearProgram lp;
    int x = lp.add_var(true), y = lp.add_var(true);
    lp.add_constraint({{x, 1}, {y, 1}}, LinearProgram::Rel::Ge, 2);
    lp.add_constraint({{x, 1}, {y, -1}}, LinearProgram::Rel::Eq, Rational(1, 2));
    lp.minimize({{x, 1}, {y, 2}});
    auto sol = lp.solve();
    REQUIRE(sol);
    CHECK((*sol)[0] == Rational(5, 4));
    CHECK((*sol)[1] == Rational(3, 4));

    LinearProgram bad;
    int z = bad.add_var(false);
    bad.add_constraint({{z, 1}}, LinearProgram::Rel::Le, 0);
    bad.add_constraint({{z, 1}}, LinearProgram::Rel::Ge, 1);
    CHECK_FALSE(bad.solve());
}

TEST_CASE("projection and strongest post") {
    Assertion phi = parse_assertion("y >= 1; x - y >= 2; z = 2 * y");
    Assertion q = project_out(phi, {Var::global("y")});
    CHECK(comb_entails(q, parse_assertion("2 * x - z >= 4")));
    CHECK(comb_entails(q, parse_assertion("z >= 2")));

    Program p = load_program("decrement.wp");
    Assertion sp = stem_strongest_post(p, parse_word(p, "x=pos()@1 d=pos()@1"));
    CHECK(comb_entails(sp, parse_assertion("d(1) > 0")));
    CHECK(comb_entails(sp, parse_assertion("x > 0")));
    CHECK(stem_strongest_post(p, {}).is_true());

    Program q2 = parse_program("global int x; while (x > 0) { x = x - 1; }");
    Assertion sp2 = stem_strongest_post(q2, parse_word(q2, "[x>0]@1 x=x-1@1"));
    CHECK(comb_entails(sp2, parse_assertion("x >= 0")));
}

TEST_CASE("linear ranking synthesis") {
    Program p = load_program("decrement.wp");
    Word loop = parse_word(p, "[x>0]@1 x=x-d@1");
    auto r = synthesize_linear_ranking(p, loop, parse_assertion("d(1) > 0"));
    REQUIRE(r);
    CHECK(r->term == LinTerm::var(Var::global("x")));
    CHECK(r->bound == 0);
    CHECK(ranking_holds_on_samples(p, loop, parse_assertion("d(1) > 0"), *r));
    CHECK_FALSE(synthesize_linear_ranking(p, loop, Assertion{}));

    Program up = parse_program("global int x; while (true) { x = x + 1; }");
    CHECK_FALSE(synthesize_linear_ranking(up, parse_word(up, "x=x+1@1"), Assertion{}));

    Program down = parse_program("global int x; while (x > 0) { x = x - 1; }");
    Word dl = parse_word(down, "[x>0]@1 x=x-1@1");
    auto rd = synthesize_linear_ranking(down, dl, Assertion{});
    REQUIRE(rd);
    CHECK(rd->term == LinTerm::var(Var::global("x")));
    CHECK(rd->bound == 0);
    CHECK(ranking_holds_on_samples(down, dl, Assertion{}, *rd));

    Program two = parse_program("global int x, y; while (x > y) { x = x - 1; y = y + 1; }");
    Word tl = parse_word(two, "[x>y]@1 x=x-1@1 y=y+1@1");
    auto rt = synthesize_linear_ranking(two, tl, Assertion{});
    REQUIRE(rt);
    CHECK(ranking_holds_on_samples(two, tl, Assertion{}, *rt));
}

TEST_CASE("lasso feasibility") {
    Program p = parse_program("global int x; x = 1; while (x > 0) { skip; }");
    Lasso l = parse_lasso(p, "x=1@1 $ [x>0]@1");
    auto r = check_lasso_feasibility(p, l);
    REQUIRE(std::holds_alternative<FeasibleWitness>(r));
    const auto& w = std::get<FeasibleWitness>(r);
    CHECK(w.second - w.first == l.loop.size());
    CHECK(replay_witness(p, l, w, HavocRange{}));

    Program d = load_program("decrement.wp");
    CHECK(std::holds_alternative<NoWitnessFound>(
        check_lasso_feasibility(d, parse_lasso(d, "x=pos()@1 d=pos()@1 $ [x>0]@1 x=x-d@1"))));

    Program blocked = parse_program("global int x; x = 0; while (x > 0) { skip; }");
    CHECK(std::holds_alternative<NoWitnessFound>(
        check_lasso_feasibility(blocked, parse_lasso(blocked, "x=0@1 $ [x>0]@1"))));
}

TEST_CASE("termination proof and basis of the decrement lasso") {
    Program p = load_program("decrement.wp");
    Lasso l = parse_lasso(p, "x=pos()@1 d=pos()@1 $ [x>0]@1 x=x-d@1");
    ValidityOracle oracle(prover_config());
    ProofOutcome out = find_infeasibility_proof(p, l, oracle);
    REQUIRE(std::holds_alternative<LassoProof>(out));
    const auto& proof = std::get<LassoProof>(out);
    CHECK(proof.ranking == RankingFormula{LinTerm::var(Var::global("x")), 0});
    REQUIRE(proof.invariance.size() == 5);
    CHECK(proof.invariance[2] == parse_assertion("d(1) > 0"));
    CHECK(proof.invariance[0].is_true());
    Word whole = parse_word(p, "x=pos()@1 d=pos()@1 [x>0]@1 x=x-d@1");
    for (size_t k = 0; k < whole.size(); ++k)
        CHECK(oracle.check(p, {proof.invariance[k], Word{whole[k]}, proof.invariance[k + 1]}).verdict == Validity::Valid);
    for (size_t k = 0; k < l.loop.size(); ++k)
        CHECK(oracle.check(p, {proof.variance[k], Word{l.loop[k]}, proof.variance[k + 1]}).verdict == Validity::Valid);
    CHECK(comb_entails(proof.variance.back(), proof.ranking.as_assertion()));

    Basis b = extract_basis(p, proof, l, oracle);
    Basis base = parse_basis(p, slurp("decrement_base.basis"));
    for (const auto& t : base.triples) CHECK_MESSAGE(contains_up_to_pre(b, t), triple_str(p, t));
    for (const auto& t : b.triples) CHECK(check_basic(p, t, oracle).ok());
    CHECK(lasso_in_proof_language(b, l));

    Basis stab = generate_stability_triples(b, p, oracle);
    for (const char* text : {"{d(1) > 0} x=pos() @ 2 {d(1) > 0}", "{d(1) > 0} d=pos() @ 2 {d(1) > 0}",
                             "{d(1) > 0} [x>0] @ 2 {d(1) > 0}", "{d(1) > 0} x=x-d @ 2 {d(1) > 0}",
                             "{old(x) >= 0} [x>0] @ 1 {old(x) >= 0}"}) {
        Basis want = parse_basis(p, std::string("triple ") + text);
        CHECK_MESSAGE(contains_up_to_pre(stab, want.triples[0]), text);
    }
    CHECK(generate_stability_triples(Basis{}, p, oracle).triples.empty());
}

TEST_CASE("infeasibility proofs of other lassos") {
    Program p = load_program("decrement.wp");
    ValidityOracle oracle(prover_config());
    Lasso rotated = parse_lasso(p, "x=pos()@1 d=pos()@1 [x>0]@1 $ x=x-d@1 [x>0]@1");
    auto out = find_infeasibility_proof(p, rotated, oracle);
    REQUIRE(std::holds_alternative<LassoProof>(out));
    Basis b = extract_basis(p, std::get<LassoProof>(out), rotated, oracle);
    CHECK(lasso_in_proof_language(b, rotated));
    Basis want = parse_basis(p, "triple {old(x) > x} [x>0] @ 1 {old(x) >= 0}");
    CHECK(contains_up_to_pre(b, want.triples[0]));

    Program q = parse_program("global int x; x = 1; while (x > 0) { skip; }");
    CHECK(std::holds_alternative<FeasibleWitness>(
        find_infeasibility_proof(q, parse_lasso(q, "x=1@1 $ [x>0]@1"), oracle)));

    Program up = parse_program("global int x; x = 1; while (x > 0) { x = x + 1; }");
    CHECK(std::holds_alternative<ProofUnknown>(
        find_infeasibility_proof(up, parse_lasso(up, "x=1@1 $ [x>0]@1 x=x+1@1"), oracle)));
}

TEST_CASE("algorithm 1") {
    EngineOptions opts;
    opts.oracle = prover_config();

    Program p = load_program("decrement.wp");
    Verdict v = run_algorithm1(p, nullptr, opts);
    REQUIRE(v.kind == Verdict::Kind::Yes);
    CHECK(v.emptiness.kind == EmptinessResult::Kind::EmptyUpTo);
    Basis base = parse_basis(p, slurp("decrement_base.basis"));
    for (const auto& t : base.triples) CHECK_MESSAGE(contains_up_to_pre(v.basis, t), triple_str(p, t));
    CHECK(std::count(v.basis.rankings.begin(), v.basis.rankings.end(), RankingFormula{LinTerm::var(Var::global("x")), 0}) == 1);
    for (const auto& s : v.samples) CHECK(lasso_in_proof_language(v.basis, s));

    Program q = parse_program("global int x; x = 1; while (x > 0) { skip; }");
    Verdict n = run_algorithm1(q, nullptr, opts);
    REQUIRE(n.kind == Verdict::Kind::No);
    REQUIRE(n.witness);
    CHECK(replay_witness(q, *n.lasso, *n.witness, opts.feasibility.range));

    Program flat = parse_program("global int x; x = 1; x = 2;");
    Verdict f = run_algorithm1(flat, nullptr, opts);
    CHECK(f.kind == Verdict::Kind::Yes);
    CHECK(f.iterations == 1);
}
