#include "doctest.h"
#include "helpers.hpp"

#include "wfps/program_qpa.hpp"
#include "wfps/qltl.hpp"

#include <random>

using namespace wfps;
using testing::slurp;

namespace {

const std::vector<std::string> kAb{"a", "b", "$"};

QWord encode(const Lasso& l, int dollar) {
    QWord w;
    for (const auto& ic : l.stem) w.push_back({ic.cmd, ic.thread});
    w.push_back({dollar, l.loop.front().thread});
    for (const auto& ic : l.loop) w.push_back({ic.cmd, ic.thread});
    return w;
}

void all_words(int n_cmds, int n_threads, int min_len, int max_len, const std::function<void(const Word&)>& visit) {
    Word w;
    std::function<void()> rec = [&]() {
        if (static_cast<int>(w.size()) >= min_len) visit(w);
        if (static_cast<int>(w.size()) == max_len) return;
        for (int c = 0; c < n_cmds; ++c)
            for (int t = 1; t <= n_threads; ++t) {
                w.push_back({c, t});
                rec();
                w.pop_back();
            }
    };
    rec();
}

void all_lassos(int n_cmds, int n_threads, int stem_max, int loop_max, const std::function<void(const Lasso&)>& visit) {
    all_words(n_cmds, n_threads, 0, stem_max, [&](const Word& s) {
        all_words(n_cmds, n_threads, 1, loop_max, [&](const Word& l) { visit(Lasso{s, l}); });
    });
}

std::vector<int> universe(int n) {
    std::vector<int> u;
    for (int t = 1; t <= n; ++t) u.push_back(t);
    return u;
}

// Letters of a single-class matrix: sigma * 2 + (class - 1).
std::vector<int> letters_of(const Word& w) {
    std::vector<int> out;
    for (const auto& ic : w) out.push_back(ic.cmd * 2 + (ic.thread == 1 ? 0 : 1));
    return out;
}

} // namespace

TEST_CASE("property parsing") {
    auto f = parse_qltl("forall i. G F exec[a](i)", kAb);
    CHECK(f->kind == Qltl::Kind::Forall);
    CHECK(parse_qltl("exists i. GF exec[*](i)", kAb)->kids[0]->kind == Qltl::Kind::Not);
    CHECK(parse_qltl("forall i. forall j. i = j | i != j", kAb)->kind == Qltl::Kind::Forall);
    auto t = parse_qltl(slurp("ticket.prop"), program_alphabet(testing::load_program("ticket.wp")));
    CHECK(t->kind == Qltl::Kind::Or);
    CHECK_THROWS_AS(parse_qltl("G forall i. exec[a](i)", kAb), ParseError);
    CHECK_THROWS_AS(parse_qltl("(forall i. exec[a](i)) U true", kAb), ParseError);
    CHECK_THROWS_AS(parse_qltl("F exec[a](i)", kAb), ParseError);
    CHECK_THROWS_AS(parse_qltl("forall i. exec[c](i)", kAb), ParseError);
    CHECK_THROWS_AS(parse_qltl("forall i. exec[a](i) &", kAb), ParseError);
    auto round = parse_qltl(qltl_str(f, kAb), kAb);
    CHECK(qltl_str(round, kAb) == qltl_str(f, kAb));
}

TEST_CASE("lasso semantics") {
    Program ticket = testing::load_program("ticket.wp");
    auto alphabet = program_alphabet(ticket);
    auto neg = ql::neg(parse_qltl(slurp("ticket.prop"), alphabet));
    Lasso starve = parse_lasso(ticket, "m=t++@1 m=t++@2 $ [m>s]@1 s++@2");
    CHECK(lasso_satisfies(starve, neg, 2));
    CHECK_FALSE(lasso_satisfies(starve, neg, 3)); // thread 3 never runs, so fairness fails

    auto gf = parse_qltl("exists i. i = i & G F exec[a](i)", kAb);
    auto gfa1 = ql::always(ql::eventually(ql::exec(0, "i")));
    all_lassos(2, 1, 2, 2, [&](const Lasso& l) {
        bool in_loop = std::any_of(l.loop.begin(), l.loop.end(), [](const IndexedCommand& ic) { return ic.cmd == 0; });
        CHECK(lasso_satisfies(l, gf, 1) == in_loop);
        CHECK(lasso_satisfies(l, ql::forall("i", gfa1), 1) == lasso_satisfies(l, ql::exists("i", gfa1), 1));
    });
    Lasso two{{{0, 1}}, {{1, 2}}};
    CHECK(lasso_satisfies(two, parse_qltl("exists i. X G exec[b](i)", kAb), 2));
    CHECK_FALSE(lasso_satisfies(two, parse_qltl("forall i. F exec[b](i)", kAb), 2));
    CHECK(lasso_satisfies(two, parse_qltl("exists i. exec[a](i) U exec[b](i)", kAb), 2) == false);
    CHECK(lasso_satisfies(two, parse_qltl("exists i. exists j. exec[a](i) & X exec[b](j) & i != j", kAb), 2));
    CHECK_THROWS_AS(lasso_satisfies(two, gf, 1), PreconditionError);
    CHECK_THROWS_AS(lasso_satisfies(two, ql::exec(0, "i"), 2), PreconditionError);
}

TEST_CASE("prenex disjuncts") {
    auto f = parse_qltl("exists i. exists j. exec[a](i) & exec[b](j)", kAb);
    auto ds = normalize_to_prenex_disjuncts(f);
    REQUIRE(ds.size() == 2);
    CHECK(ds[0].kind == QuantTree::Kind::Exists);
    CHECK(ds[0].kids[0].kind == QuantTree::Kind::Leaf);
    CHECK(ds[1].kids[0].kind == QuantTree::Kind::Exists);

    auto single = normalize_to_prenex_disjuncts(parse_qltl("exists i. F exec[a](i)", kAb));
    REQUIRE(single.size() == 1);
    CHECK(single[0].kids[0].reps == std::vector<int>{1});

    Program ticket = testing::load_program("ticket.wp");
    auto neg = normalize_to_prenex_disjuncts(ql::neg(parse_qltl(slurp("ticket.prop"), program_alphabet(ticket))));
    REQUIRE(neg.size() == 1);
    REQUIRE(neg[0].kind == QuantTree::Kind::And);
    CHECK(neg[0].kids[0].kind == QuantTree::Kind::Forall);
    CHECK(neg[0].kids[1].kind == QuantTree::Kind::Exists);

    std::vector<std::string> props{
        "exists i. exists j. exec[a](i) & exec[b](j)",
        "forall i. forall j. i = j | X (exec[a](i) U exec[b](j))",
        "forall i. exists j. i != j & G F exec[a](j) | F exec[b](i)",
        "!(exists i. forall j. F exec[a](j) -> exec[b](i))",
        "(forall i. G F exec[*](i)) -> exists j. G exec[a](j)",
    };
    for (const auto& text : props) {
        auto g = parse_qltl(text, kAb);
        auto parts = normalize_to_prenex_disjuncts(g);
        all_lassos(2, 3, 2, 2, [&](const Lasso& l) {
            for (int n = std::max(1, l.threads().empty() ? 1 : *l.threads().rbegin()); n <= 3; ++n) {
                bool any = std::any_of(parts.begin(), parts.end(), [&](const QuantTree& t) { return tree_satisfies(l, t, n); });
                CHECK_MESSAGE(any == lasso_satisfies(l, g, n), text);
            }
        });
    }
}

TEST_CASE("matrix to Buchi") {
    auto a1 = std::make_shared<const Ltl>(Ltl{Ltl::Kind::Atom, 0, 1, {}});
    auto f = std::make_shared<const Ltl>(Ltl{Ltl::Kind::Until, -1, 0, {std::make_shared<const Ltl>(), a1}});
    auto x = std::make_shared<const Ltl>(Ltl{Ltl::Kind::Next, -1, 0, {a1}});
    auto gf = parse_qltl("forall i. G F exec[a](i)", kAb);
    auto gf_leaf = normalize_to_prenex_disjuncts(gf)[0];
    REQUIRE(gf_leaf.kind == QuantTree::Kind::Forall);
    LtlPtr gfm = gf_leaf.kids[0].matrix;

    auto fb = matrix_to_buchi(f, 2, 1), xb = matrix_to_buchi(x, 2, 1), gfb = matrix_to_buchi(gfm, 2, 1);
    all_lassos(2, 2, 3, 3, [&](const Lasso& l) {
        auto u = letters_of(l.stem), v = letters_of(l.loop);
        auto has_a1 = [](const Word& w) {
            return std::any_of(w.begin(), w.end(), [](const IndexedCommand& ic) { return ic.cmd == 0 && ic.thread == 1; });
        };
        CHECK(buchi_accepts_lasso(fb, u, v) == (has_a1(l.stem) || has_a1(l.loop)));
        Word both = l.stem;
        both.insert(both.end(), l.loop.begin(), l.loop.end());
        both.insert(both.end(), l.loop.begin(), l.loop.end());
        CHECK(buchi_accepts_lasso(xb, u, v) == (both[1].cmd == 0 && both[1].thread == 1));
        CHECK(buchi_accepts_lasso(gfb, u, v) == has_a1(l.loop));
    });
}

TEST_CASE("lasso DFA") {
    BuchiAutomaton all;
    all.n_letters = 2;
    all.n_states = 1;
    all.initial = {0};
    all.accepting = {true};
    all.delta = {{{0}, {0}}};
    LassoDfa d = buchi_lasso_dfa(all);
    CHECK(d.accepts({0, 2, 1}));
    CHECK(d.accepts({2, 0}));
    CHECK_FALSE(d.accepts({0, 2}));
    CHECK_FALSE(d.accepts({0, 1}));
    CHECK_FALSE(d.accepts({2, 0, 2, 0}));

    // (a+b)* a^omega
    BuchiAutomaton ev;
    ev.n_letters = 2;
    ev.n_states = 2;
    ev.initial = {0};
    ev.accepting = {false, true};
    ev.delta = {{{0, 1}, {0}}, {{1}, {}}};
    LassoDfa e = buchi_lasso_dfa(ev);
    for (int ul = 0; ul <= 3; ++ul)
        for (int vl = 1; vl <= 3; ++vl)
            for (int mu = 0; mu < (1 << ul); ++mu)
                for (int mv = 0; mv < (1 << vl); ++mv) {
                    std::vector<int> u, v, w;
                    for (int k = 0; k < ul; ++k) u.push_back(mu >> k & 1);
                    for (int k = 0; k < vl; ++k) v.push_back(mv >> k & 1);
                    w = u;
                    w.push_back(2);
                    w.insert(w.end(), v.begin(), v.end());
                    CHECK(e.accepts(w) == (mv == 0));
                    CHECK(buchi_accepts_lasso(ev, u, v) == (mv == 0));
                }

    BuchiAutomaton none = ev;
    none.accepting = {false, false};
    LassoDfa n = buchi_lasso_dfa(none);
    CHECK(n.n_states == 1);
    CHECK_FALSE(n.accepting[0]);
}

TEST_CASE("lift and property QPA") {
    int dollar = 2;
    Qpa t = property_qpa(parse_qltl("true", kAb), kAb);
    CHECK(accepts_in(t, {{0, 1}, {dollar, 1}, {1, 1}}, {1}));
    CHECK_FALSE(accepts_in(t, {{0, 1}, {dollar, 1}}, {1}));
    CHECK_FALSE(accepts_in(t, {{0, 1}}, {1}));
    CHECK_FALSE(accepts_in(t, {{dollar, 1}, {0, 1}, {dollar, 1}, {0, 1}}, {1}));

    // Closed matrix: nullary predicates only.
    auto leaf = normalize_to_prenex_disjuncts(parse_qltl("exists i. G F exec[a](i)", kAb))[0].kids[0];
    LassoDfa d = buchi_lasso_dfa(matrix_to_buchi(leaf.matrix, 2, 1));
    Qpa closed = lift_dfa_to_qpa(d, {Quantifier::Exists}, kAb);
    CHECK(closed.arity[0] == 1);

    auto all_gf = parse_qltl("forall i. G F exec[a](i)", kAb);
    Qpa q = property_qpa(all_gf, kAb);
    CHECK(accepts_in(q, {{dollar, 1}, {0, 1}, {0, 2}}, {1, 2}));
    CHECK_FALSE(accepts_in(q, {{dollar, 1}, {0, 1}, {1, 2}}, {1, 2}));
    CHECK(accepts_in(q, {{dollar, 1}, {0, 1}, {1, 2}}, {1}) == false); // thread 2 outside the universe
    Qpa lifted = lift_dfa_to_qpa(d, {Quantifier::Forall}, kAb);

    std::vector<std::string> props{
        "true",
        "forall i. G F exec[a](i)",
        "exists i. exists j. exec[a](i) & X exec[b](j)",
        "forall i. exists j. i != j & G F exec[a](j) | F exec[b](i)",
        "(forall i. G F exec[*](i)) -> exists j. F G exec[a](j)",
    };
    for (const auto& text : props) {
        auto g = parse_qltl(text, kAb);
        Qpa pq = property_qpa(g, kAb);
        Qpa nq = property_qpa(ql::neg(g), kAb);
        all_lassos(2, 2, 2, 2, [&](const Lasso& l) {
            int n = *l.threads().rbegin();
            for (; n <= 2; ++n) {
                bool sat = lasso_satisfies(l, g, n);
                QWord w = encode(l, dollar);
                CHECK_MESSAGE(accepts_in(pq, w, universe(n)) == sat, text);
                CHECK_MESSAGE(accepts_in(nq, w, universe(n)) == !sat, text);
            }
        });
    }
    all_lassos(2, 2, 2, 2, [&](const Lasso& l) {
        int n = *l.threads().rbegin();
        if (n != 1) return;
        CHECK(accepts_in(lifted, encode(l, dollar), {1}) == lasso_satisfies(l, all_gf, 1));
    });
}

TEST_CASE("ticket QPA against the hand-built one") {
    Program ticket = testing::load_program("ticket.wp");
    auto alphabet = program_alphabet(ticket);
    Qpa hand = parse_qpa(slurp("ticket_hand.qpa"));
    REQUIRE(hand.letters == alphabet);
    Qpa gen = property_qpa(ql::neg(parse_qltl(slurp("ticket.prop"), alphabet)), alphabet);
    Lasso starve = parse_lasso(ticket, "m=t++@1 m=t++@2 $ [m>s]@1 s++@2");
    CHECK(accepts_in(hand, encode_lasso(ticket, starve), {1, 2}));
    CHECK(accepts_in(gen, encode_lasso(ticket, starve), {1, 2}));
    all_lassos(4, 2, 1, 2, [&](const Lasso& l) {
        for (auto u : {std::vector<int>{1, 2}, std::vector<int>{1}}) {
            if (*l.threads().rbegin() > u.back()) continue;
            QWord w = encode_lasso(ticket, l);
            CHECK(accepts_in(gen, w, u) == accepts_in(hand, w, u));
        }
    });
}
