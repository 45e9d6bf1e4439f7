#include "doctest.h"
#include "helpers.hpp"

#include "wfps/program_qpa.hpp"
#include "wfps/proof_space.hpp"

using namespace wfps;
using testing::load_program;
using testing::slurp;

namespace {

HoareTriple triple(const Program& p, const std::string& pre, const std::string& word, const std::string& post) {
    return {parse_assertion(pre), parse_word(p, word), parse_assertion(post)};
}

void all_words(int n_cmds, int n_threads, int len, const std::function<void(const Word&)>& visit) {
    Word w;
    std::function<void()> rec = [&]() {
        visit(w);
        if (static_cast<int>(w.size()) == len) return;
        for (int c = 0; c < n_cmds; ++c)
            for (int t = 1; t <= n_threads; ++t) {
                w.push_back({c, t});
                rec();
                w.pop_back();
            }
    };
    rec();
}

} // namespace

TEST_CASE("well-formed and basic triples") {
    Program p = parse_program("global int x; local int d; x = 0;");
    CHECK_FALSE(check_well_formed(triple(p, "true", "x=0@1", "d(2) >= 0")));
    CHECK(check_well_formed(triple(p, "d(2) >= 0", "x=0@1", "d(2) >= 0")));
    CHECK(check_well_formed(triple(p, "true", "x=0@1", "x >= 0")));
    CHECK(check_well_formed(triple(p, "true", "x=0@1", "d(1) >= 0")));

    Program dec = load_program("decrement.wp");
    ValidityOracle oracle(testing::prover_config());
    CHECK(check_basic(dec, triple(dec, "true", "d=pos()@1", "d(1) > 0"), oracle).ok());
    CHECK(check_basic(dec, triple(dec, "true", "d=pos()@1 [x>0]@1", "d(1) > 0"), oracle).kind ==
          BasicVerdict::Kind::NotBasic);
    CHECK(check_basic(dec, triple(dec, "true", "d=pos()@1", "d(1) > 0; d(1) > -1"), oracle).kind ==
          BasicVerdict::Kind::NotBasic);
    CHECK(check_basic(dec, triple(dec, "true", "x=pos()@1", "x < 0"), oracle).kind == BasicVerdict::Kind::NotBasic);
    ValidityOracle bounded{OracleConfig{}};
    CHECK(check_basic(dec, triple(dec, "true", "d=pos()@1", "d(1) > 0"), bounded).kind == BasicVerdict::Kind::Unknown);
}

TEST_CASE("basis file round trip") {
    Program p = load_program("decrement.wp");
    Basis b = parse_basis(p, slurp("decrement_combined.basis"));
    CHECK(b.triples.size() == 15);
    REQUIRE(b.rankings.size() == 1);
    CHECK(b.rankings[0].term == LinTerm::var(Var::global("x")));
    Basis again = parse_basis(p, basis_str(p, b));
    CHECK(again.triples == b.triples);
    CHECK(again.rankings == b.rankings);
    CHECK_THROWS_AS(parse_basis(p, "triple {true} nope @ 1 {x > 0}"), ParseError);
    CHECK_THROWS_AS(parse_basis(p, "rank x >= "), ParseError);
    CHECK_THROWS_AS(parse_basis(p, "lemma"), ParseError);
}

TEST_CASE("derivable atoms") {
    Program p = load_program("decrement.wp");
    Basis base = parse_basis(p, slurp("decrement_base.basis"));
    auto d = parse_atom("d(1) > 0");
    CHECK(derivable_atoms(base, {}, parse_word(p, "x=pos()@1 d=pos()@1")).count(d));
    CHECK(derivable_atoms(base, parse_assertion("x > 0"), {}) == std::set<Atom>{parse_atom("x > 0")});
    CHECK(derivable_atoms(base, {}, parse_word(p, "x=pos()@2 d=pos()@2")).count(parse_atom("d(2) > 0")));
    // The base basis alone cannot carry d(1) > 0 across a thread-2 command.
    CHECK_FALSE(derivable_atoms(base, {}, parse_word(p, "d=pos()@1 x=pos()@2")).count(d));
    Basis combined = parse_basis(p, slurp("decrement_combined.basis"));
    CHECK(derivable_atoms(combined, {}, parse_word(p, "d=pos()@1 x=pos()@2")).count(d));
}

TEST_CASE("lasso membership") {
    Program p = load_program("decrement.wp");
    Basis base = parse_basis(p, slurp("decrement_base.basis"));
    Basis combined = parse_basis(p, slurp("decrement_combined.basis"));
    Lasso base_lasso = parse_lasso(p, "x=pos()@1 d=pos()@1 $ [x>0]@1 x=x-d@1");
    CHECK(lasso_in_proof_language(base, base_lasso));
    CHECK(lasso_in_proof_language(combined, base_lasso));
    CHECK_FALSE(lasso_in_proof_language(Basis{}, base_lasso));
    Lasso interference = parse_lasso(p, "x=pos()@1 d=pos()@1 x=pos()@2 $ [x>0]@1 x=x-d@1");
    CHECK_FALSE(lasso_in_proof_language(base, interference));
    CHECK(lasso_in_proof_language(combined, interference));

    // The basis proves only the first loop iteration decreases x, yet the
    // lasso is accepted although its infinite trace is feasible.
    Program q = parse_program(
        "global int x, y; x = pos(); y = 1; while (x > 0) { x = x - y; y = -1; }");
    Basis b = parse_basis(q, R"(
triple {true} y=1 @ 1 {y > 0}
triple {y > 0} [x>0] @ 1 {y > 0}
triple {old(x) = x} [x>0] @ 1 {old(x) = x}
triple {old(x) = x} [x>0] @ 1 {old(x) >= 0}
triple {y > 0; old(x) = x} x=x-y @ 1 {old(x) > x}
triple {old(x) >= 0} x=x-y @ 1 {old(x) >= 0}
triple {old(x) > x} y=-1 @ 1 {old(x) > x}
triple {old(x) >= 0} y=-1 @ 1 {old(x) >= 0}
rank x >= 0
)");
    CHECK(lasso_in_proof_language(b, parse_lasso(q, "x=pos()@1 y=1@1 $ [x>0]@1 x=x-y@1 y=-1@1")));
}

TEST_CASE("derivation trees") {
    Program p = load_program("decrement.wp");
    Basis base = parse_basis(p, slurp("decrement_base.basis"));
    auto seq = closure_witness(base, triple(p, "true", "d=pos()@1 [x>0]@1", "d(1) > 0"));
    REQUIRE(seq);
    CHECK((*seq)->rule == Derivation::Rule::Sequencing);
    REQUIRE((*seq)->kids.size() == 2);
    CHECK((*seq)->kids[0]->rule == Derivation::Rule::Basis);
    CHECK((*seq)->kids[1]->rule == Derivation::Rule::Basis);

    auto conj = closure_witness(base, triple(p, "d(1) > 0; old(x) = x", "[x>0]@1", "d(1) > 0; old(x) >= 0"));
    REQUIRE(conj);
    CHECK((*conj)->rule == Derivation::Rule::Conjunction);
    CHECK((*conj)->kids.size() == 2);
    CHECK((*conj)->conclusion.pre == parse_assertion("d(1) > 0; old(x) = x"));

    auto sym = closure_witness(base, triple(p, "true", "d=pos()@3", "d(3) > 0"));
    REQUIRE(sym);
    CHECK((*sym)->rule == Derivation::Rule::Symmetry);
    CHECK(derivation_str(p, **sym).find("1->3") != std::string::npos);

    CHECK_FALSE(closure_witness(base, triple(p, "true", "x=pos()@1", "x > 0")));
}

TEST_CASE("proof-space QPA") {
    Program p = load_program("decrement.wp");
    Basis base = parse_basis(p, slurp("decrement_base.basis"));
    Qpa a = proof_space_qpa(p, base);
    CHECK(a.pred_index("[d(1) > 0]"));
    Lasso base_lasso = parse_lasso(p, "x=pos()@1 d=pos()@1 $ [x>0]@1 x=x-d@1");
    CHECK(accepts(a, encode_lasso(p, base_lasso)));
    CHECK(proof_space_qpa(p, Basis{}).start->kind == Formula::Kind::False);

    Basis combined = parse_basis(p, slurp("decrement_combined.basis"));
    for (const Basis* b : {&base, &combined}) {
        Qpa ab = proof_space_qpa(p, *b);
        ProofSpace ps(*b);
        size_t positive = 0;
        all_words(4, 2, 3, [&](const Word& stem) {
            all_words(4, 2, 2, [&](const Word& loop) {
                if (loop.empty()) return;
                Lasso l{stem, loop};
                bool expect = ps.lasso_member(l);
                positive += expect;
                CHECK_MESSAGE(accepts(ab, encode_lasso(p, l)) == expect, lasso_str(p, l));
            });
        });
        CHECK(positive > 0);
    }
}
