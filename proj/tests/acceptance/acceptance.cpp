#include "oracles.hpp"

#include "wfps/engine.hpp"
#include "wfps/program_qpa.hpp"
#include "wfps/proof_space.hpp"
#include "wfps/qltl.hpp"
#include "wfps/smt.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace wfps;

namespace {

std::string slurp(const std::string& name) {
    std::ifstream in(std::string(WFPS_DATA_DIR) + "/" + name);
    if (!in) throw std::runtime_error("missing data file " + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

OracleConfig prover_config() {
    OracleConfig cfg;
    cfg.prover = default_prover();
    return cfg;
}

std::vector<IndexedCommand> letters_of(const Program& p, int n_threads) {
    std::vector<IndexedCommand> out;
    for (int c = 0; c < static_cast<int>(p.commands.size()); ++c)
        for (int t = 1; t <= n_threads; ++t) out.push_back({c, t});
    return out;
}

std::vector<int> thread_ids(const Lasso& l) {
    std::set<int> ids = l.threads();
    return {ids.begin(), ids.end()};
}

// Universes used by `accepts`: the lasso's threads, and those plus one fresh id.
const std::vector<std::vector<int>> kLassoUniverses{{1}, {1, 2}, {2}, {2, 3}, {1, 2, 3}};

bool lasso_accepted(const oracle::LassoAcceptance& r, size_t a) {
    std::vector<int> ids = thread_ids(r.lasso);
    std::vector<int> plus = ids;
    plus.push_back(ids.back() + 1);
    bool acc = false;
    for (size_t u = 0; u < kLassoUniverses.size(); ++u)
        if (kLassoUniverses[u] == ids || kLassoUniverses[u] == plus) acc = acc || r.accepted[a][u];
    return acc;
}

// ------------------------------------------------------------------ 1

Outcome criterion1() {
    Program p = parse_program(slurp("decrement.wp"));
    Basis base = parse_basis(p, slurp("decrement_base.basis"));
    Basis combined = parse_basis(p, slurp("decrement_combined.basis"));
    ValidityOracle oracle(prover_config());
    size_t basic = 0;
    std::string bad;
    for (const auto& t : combined.triples) {
        if (check_basic(p, t, oracle).ok()) ++basic;
        else bad += " " + triple_str(p, t);
    }
    bool base_in = std::all_of(base.triples.begin(), base.triples.end(),
                               [&](const HoareTriple& t) { return combined.contains(t); });
    Lasso base_lasso = parse_lasso(p, "x=pos()@1 d=pos()@1 $ [x>0]@1 x=x-d@1");
    bool member = lasso_in_proof_language(combined, base_lasso);
    std::ostringstream os;
    os << basic << "/" << combined.triples.size() << " triples basic, base basis included " << base_in
       << ", decrement lasso member " << member << (oracle.has_prover() ? "" : " (no prover)") << bad;
    return {base.triples.size() == 8 && combined.triples.size() == 15 && basic == combined.triples.size() && base_in &&
                member && oracle.has_prover(),
            os.str()};
}

// ------------------------------------------------------------------ 2

EmptinessResult inclusion(const Program& p, const Basis& b) {
    EmptinessOptions eo;
    eo.n_max = 2;
    eo.len_max = 8;
    return bounded_emptiness(intersect(program_lasso_qpa(p), complement(proof_space_qpa(p, b))), eo);
}

std::string describe(const Program& p, const EmptinessResult& r) {
    switch (r.kind) {
    case EmptinessResult::Kind::EmptyUpTo:
        return "EmptyUpTo(" + std::to_string(r.n_max) + "," + std::to_string(r.len_max) + ")";
    case EmptinessResult::Kind::Counterexample: {
        auto l = decode_lasso(p, r.word);
        return "Counterexample " + (l ? lasso_str(p, *l) : std::string("?"));
    }
    case EmptinessResult::Kind::ResourceLimit: return "ResourceLimit " + r.note;
    }
    return "?";
}

Outcome criterion2(bool full) {
    Program p = parse_program(slurp("decrement.wp"));
    if (full) {
        EmptinessResult r = inclusion(p, parse_basis(p, slurp("decrement_full.basis")));
        return {r.kind == EmptinessResult::Kind::EmptyUpTo && r.n_max == 2 && r.len_max == 8,
                "full basis: " + describe(p, r)};
    }
    EmptinessResult r4 = inclusion(p, parse_basis(p, slurp("decrement_base.basis")));
    bool interference = false;
    if (r4.kind == EmptinessResult::Kind::Counterexample)
        if (auto l = decode_lasso(p, r4.word))
            interference = std::all_of(l->loop.begin(), l->loop.end(), [](const IndexedCommand& ic) { return ic.thread == 1; }) &&
                           std::any_of(l->stem.begin(), l->stem.end(), [](const IndexedCommand& ic) { return ic.thread == 2; });
    EmptinessResult rc = inclusion(p, parse_basis(p, slurp("decrement_combined.basis")));
    bool empty = rc.kind == EmptinessResult::Kind::EmptyUpTo && rc.n_max == 2 && rc.len_max == 8;
    return {interference && empty, "base basis: " + describe(p, r4) + "; combined: " + describe(p, rc)};
}

// ------------------------------------------------------------------ 3

Outcome criterion3() {
    Program p = parse_program(slurp("decrement.wp"));
    EngineOptions opts;
    opts.oracle = prover_config();
    Verdict v = run_algorithm1(p, nullptr, opts);
    bool ranked = std::any_of(v.basis.rankings.begin(), v.basis.rankings.end(), [](const RankingFormula& r) {
        return r.bound == 0 && r.term.coeffs.size() == 1 && r.term.coeffs[0].first == Var::global("x") &&
               r.term.coeffs[0].second > 0 && r.term.constant == 0;
    });
    std::ostringstream os;
    os << verdict_name(v.kind) << " after " << v.iterations << " iterations, " << v.basis.triples.size()
       << " triples, rankings:";
    for (const auto& r : v.basis.rankings) os << " [" << r.as_assertion().str() << "]";
    return {v.kind == Verdict::Kind::Yes && ranked, os.str()};
}

// ------------------------------------------------------------------ 4

std::vector<QWord> all_words(int n_letters, const std::vector<int>& tids, int len) {
    std::vector<QWord> out{{}};
    for (size_t i = 0; i < out.size(); ++i) {
        if (static_cast<int>(out[i].size()) == len) continue;
        for (int a = 0; a < n_letters; ++a)
            for (int t : tids) {
                QWord w = out[i];
                w.push_back({a, t});
                out.push_back(w);
            }
    }
    return out;
}

Outcome criterion4() {
    std::mt19937 rng(20240601);
    std::vector<Qpa> qpas;
    std::vector<std::vector<int>> universes{{1}, {1, 2}};
    while (qpas.size() < 3) {
        Qpa a = oracle::random_qpa(rng, 3, 2);
        // Keep automata whose language is neither empty nor universal on the grid.
        size_t acc = 0, total = 0;
        for (const auto& u : universes)
            for (const auto& w : all_words(2, u, 4)) {
                acc += accepts_in(a, w, u);
                ++total;
            }
        if (acc > 0 && acc < total) qpas.push_back(a);
    }
    size_t checks = 0, violations = 0;
    for (size_t i = 0; i < qpas.size(); ++i) {
        const Qpa& a = qpas[i];
        const Qpa& b = qpas[(i + 1) % qpas.size()];
        Qpa inter = intersect(a, b), uni = unite(a, b), comp = complement(a);
        for (const auto& u : universes)
            for (const auto& w : all_words(2, u, 4)) {
                bool ia = accepts_in(a, w, u), ib = accepts_in(b, w, u);
                violations += accepts_in(inter, w, u) != (ia && ib);
                violations += accepts_in(uni, w, u) != (ia || ib);
                violations += accepts_in(comp, w, u) == ia;
                checks += 3;
            }
    }
    return {violations == 0, std::to_string(checks) + " checks, " + std::to_string(violations) + " violations"};
}

// ------------------------------------------------------------------ 5 and 6

Outcome criterion5() {
    size_t lassos = 0, violations = 0;
    for (const char* name : {"decrement.wp", "ticket.wp"}) {
        Program p = parse_program(slurp(name));
        Qpa a = program_lasso_qpa(p);
        oracle::for_each_lasso_run({&a}, static_cast<int>(p.commands.size()), letters_of(p, 2), kLassoUniverses, 4, 3,
                                   [&](const oracle::LassoAcceptance& r) {
                                       ++lassos;
                                       bool want = is_program_lasso(p, r.lasso);
                                       violations += lasso_accepted(r, 0) != want;
                                       violations += oracle::product_lasso(p, r.lasso, 2) != want;
                                   });
    }
    return {violations == 0, std::to_string(lassos) + " lassos, " + std::to_string(violations) + " violations"};
}

Outcome criterion6() {
    Program p = parse_program(slurp("decrement.wp"));
    std::vector<Qpa> qpas;
    std::vector<ProofSpace> spaces;
    for (const char* name : {"decrement_base.basis", "decrement_combined.basis", "decrement_full.basis"}) {
        Basis b = parse_basis(p, slurp(name));
        qpas.push_back(proof_space_qpa(p, b));
        spaces.emplace_back(b);
    }
    std::vector<const Qpa*> ptrs;
    for (const auto& q : qpas) ptrs.push_back(&q);
    size_t lassos = 0, violations = 0, members = 0;
    oracle::for_each_lasso_run(ptrs, static_cast<int>(p.commands.size()), letters_of(p, 2), kLassoUniverses, 4, 3,
                               [&](const oracle::LassoAcceptance& r) {
                                   ++lassos;
                                   for (size_t k = 0; k < spaces.size(); ++k) {
                                       bool want = spaces[k].lasso_member(r.lasso);
                                       members += want;
                                       violations += lasso_accepted(r, k) != want;
                                   }
                               });
    return {violations == 0, std::to_string(lassos) + " lassos x 3 bases, " + std::to_string(members) + " members, " +
                                 std::to_string(violations) + " violations"};
}

// ------------------------------------------------------------------ 7

Outcome criterion7() {
    std::mt19937 rng(77);
    size_t checks = 0, violations = 0, automata = 0;
    std::vector<std::vector<int>> shorts;
    for (int len = 0; len <= 3; ++len) {
        std::vector<std::vector<int>> layer{{}};
        for (int k = 0; k < len; ++k) {
            std::vector<std::vector<int>> next;
            for (const auto& w : layer)
                for (int a = 0; a < 2; ++a) {
                    auto x = w;
                    x.push_back(a);
                    next.push_back(x);
                }
            layer = next;
        }
        shorts.insert(shorts.end(), layer.begin(), layer.end());
    }
    while (automata < 5) {
        BuchiAutomaton b = oracle::random_buchi(rng, 4, 2);
        LassoDfa d = buchi_lasso_dfa(b);
        LassoDfa m = minimize_dfa(d);
        size_t acc = 0, total = 0;
        size_t local_violations = 0, local_checks = 0;
        for (const auto& u : shorts)
            for (const auto& v : shorts) {
                if (v.empty()) continue;
                bool want = oracle::buchi_lasso(b, u, v);
                std::vector<int> word = u;
                word.push_back(d.dollar());
                word.insert(word.end(), v.begin(), v.end());
                local_violations += d.accepts(word) != want;
                local_violations += m.accepts(word) != want;
                local_violations += buchi_accepts_lasso(b, u, v) != want;
                local_checks += 3;
                acc += want;
                ++total;
            }
        if (acc == 0 || acc == total) continue; // trivial language, draw again
        ++automata;
        checks += local_checks;
        violations += local_violations;
    }
    return {violations == 0, std::to_string(checks) + " checks, " + std::to_string(violations) + " violations"};
}

// ------------------------------------------------------------------ 8

Outcome criterion8() {
    Program p = parse_program(slurp("ticket.wp"));
    std::vector<std::string> alphabet = program_alphabet(p);
    QltlPtr phi = parse_qltl(slurp("ticket.prop"), alphabet);
    QltlPtr neg = ql::neg(phi);
    Qpa generated = property_qpa(neg, alphabet);
    Qpa hand = parse_qpa(slurp("ticket_hand.qpa"));
    if (hand.letters != generated.letters) return {false, "alphabet mismatch"};
    std::vector<std::vector<int>> universes{{1}, {1, 2}};
    size_t checks = 0, violations = 0, accepted = 0;
    oracle::for_each_lasso_run({&generated, &hand}, static_cast<int>(p.commands.size()), letters_of(p, 2), universes, 3, 3,
                               [&](const oracle::LassoAcceptance& r) {
                                   int top = *r.lasso.threads().rbegin();
                                   for (size_t u = 0; u < universes.size(); ++u) {
                                       if (top > static_cast<int>(universes[u].size())) continue;
                                       bool sem = lasso_satisfies(r.lasso, neg, static_cast<int>(universes[u].size()));
                                       violations += r.accepted[0][u] != r.accepted[1][u];
                                       violations += r.accepted[0][u] != sem;
                                       accepted += sem;
                                       ++checks;
                                   }
                               });
    return {violations == 0, std::to_string(checks) + " (lasso, universe) pairs, " + std::to_string(accepted) +
                                 " violate the property, " + std::to_string(violations) + " disagreements"};
}

// ------------------------------------------------------------------ 9

Outcome criterion9() {
    Program p = parse_program(slurp("ticket.wp"));
    std::vector<std::string> alphabet = program_alphabet(p);
    std::vector<QltlPtr> formulas{
        parse_qltl(slurp("ticket.prop"), alphabet),
        parse_qltl("exists i. G F exec[[m<=s]](i)", alphabet),
        parse_qltl("forall i. (F exec[*](i) -> G F exec[s++](i))", alphabet),
        parse_qltl("exists i. exists j. i != j & G F (exec[[m>s]](i) & X exec[[m>s]](j))", alphabet),
        parse_qltl("forall i. (!exec[s++](i) U exec[m=t++](i)) | G !exec[*](i)", alphabet),
    };
    std::mt19937 rng(9);
    auto word = [&](int lo, int hi) {
        Word w;
        int n = std::uniform_int_distribution<int>(lo, hi)(rng);
        for (int k = 0; k < n; ++k)
            w.push_back({std::uniform_int_distribution<int>(0, static_cast<int>(p.commands.size()) - 1)(rng),
                         std::uniform_int_distribution<int>(1, 2)(rng)});
        return w;
    };
    size_t checks = 0, violations = 0, sat = 0;
    for (int k = 0; k < 200; ++k) {
        Lasso l{word(0, 4), word(1, 3)};
        Lasso shifted = l, doubled = l;
        shifted.stem.insert(shifted.stem.end(), l.loop.begin(), l.loop.end());
        doubled.stem = shifted.stem;
        doubled.loop.insert(doubled.loop.end(), l.loop.begin(), l.loop.end());
        for (const auto& f : formulas) {
            bool a = lasso_satisfies(l, f, 3);
            violations += lasso_satisfies(shifted, f, 3) != a;
            violations += lasso_satisfies(doubled, f, 3) != a;
            checks += 2;
            sat += a;
        }
    }
    return {violations == 0, std::to_string(checks) + " checks (" + std::to_string(sat) + " satisfied), " +
                                 std::to_string(violations) + " violations"};
}

// ------------------------------------------------------------------ 10

Outcome criterion10() {
    CertificateOptions co;
    co.prover = default_prover();
    auto run = [&](const char* qpa, const char* cert) {
        Qpa a = parse_qpa(slurp(qpa));
        return check_emptiness_certificate(a, parse_qpa_formula(a, slurp(cert)), co);
    };
    std::ostringstream os;
    bool ok = true;
    CertificateResult toy = run("cert/toy.qpa", "cert/toy.cert");
    ok = ok && toy.kind == CertificateResult::Kind::Accepted;
    os << "toy " << (toy.kind == CertificateResult::Kind::Accepted ? "Accepted" : "not accepted");
    CertificateResult swap = run("cert/swap.qpa", "cert/swap.cert");
    ok = ok && swap.kind == CertificateResult::Kind::Accepted;
    os << ", swap " << (swap.kind == CertificateResult::Kind::Accepted ? "Accepted" : "not accepted");
    for (const auto& [file, cond] : std::vector<std::pair<const char*, const char*>>{
             {"cert/swap_bad_init.cert", "Initialization"},
             {"cert/swap_bad_consecution.cert", "Consecution"},
             {"cert/swap_bad_rejection.cert", "Rejection"}}) {
        CertificateResult r = run("cert/swap.qpa", file);
        bool good = r.kind == CertificateResult::Kind::Rejected && r.condition == cond && r.witness;
        ok = ok && good;
        os << ", " << cond << (good ? " rejected" : " NOT rejected as expected");
    }
    if (!co.prover) os << " (no prover)";
    return {ok, os.str()};
}

// ------------------------------------------------------------------ 11

Outcome criterion11() {
    Program p = parse_program("global int x; x = 1; while (x > 0) { skip; }");
    EngineOptions opts;
    opts.oracle = prover_config();
    Verdict v = run_algorithm1(p, nullptr, opts);
    bool replay = v.kind == Verdict::Kind::No && v.lasso && v.witness &&
                  replay_witness(p, *v.lasso, *v.witness, opts.feasibility.range);
    std::string detail = std::string(verdict_name(v.kind));
    if (v.lasso) detail += " on " + lasso_str(p, *v.lasso);
    if (v.witness) detail += ", states " + std::to_string(v.witness->first) + " and " + std::to_string(v.witness->second) + " coincide";
    return {replay, detail + (replay ? ", witness replays" : "")};
}

} // namespace

int main() {
    struct Entry {
        std::string id;
        std::function<Outcome()> run;
        double limit_s;
    };
    std::vector<Entry> entries{
        {"1", criterion1, 5},
        {"2", [] { return criterion2(false); }, 60},
        {"2 (full basis, informational)", [] { return criterion2(true); }, 60},
        {"3", criterion3, 120},
        {"4", criterion4, 0},
        {"5", criterion5, 0},
        {"6", criterion6, 0},
        {"7", criterion7, 0},
        {"8", criterion8, 0},
        {"9", criterion9, 0},
        {"10", criterion10, 5},
        {"11", criterion11, 5},
    };
    int failures = 0;
    for (const auto& e : entries) {
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = e.run();
        } catch (const std::exception& ex) {
            o = {false, std::string("exception: ") + ex.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool in_time = e.limit_s == 0 || secs < e.limit_s;
        bool pass = o.pass && in_time;
        bool counted = e.id.find("informational") == std::string::npos;
        if (!pass && counted) ++failures;
        std::printf("criterion %s: %s (%.2fs%s) %s\n", e.id.c_str(), pass ? "PASS" : "FAIL", secs,
                    in_time ? "" : ", over time limit", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
