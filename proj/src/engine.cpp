#include "wfps/engine.hpp"

#include "wfps/error.hpp"
#include "wfps/lp.hpp"
#include "wfps/program_qpa.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <numeric>
#include <sstream>

namespace wfps {

// ---------------------------------------------------------------- feasibility

namespace {

const IndexedCommand& unrolled_letter(const Lasso& l, size_t j) {
    if (j < l.stem.size()) return l.stem[j];
    return l.loop[(j - l.stem.size()) % l.loop.size()];
}

bool at_loop_boundary(const Lasso& l, size_t j) {
    return j >= l.stem.size() && (j - l.stem.size()) % l.loop.size() == 0;
}

int lasso_threads(const Lasso& l) {
    int n = 1;
    for (const auto& ic : l.stem) n = std::max(n, ic.thread);
    for (const auto& ic : l.loop) n = std::max(n, ic.thread);
    return n;
}

} // namespace

std::variant<FeasibleWitness, NoWitnessFound> check_lasso_feasibility(const Program& p, const Lasso& l,
                                                                        const FeasibilityOptions& opts) {
    if (l.loop.empty()) return NoWitnessFound{};
    size_t limit = l.stem.size() + l.loop.size() * static_cast<size_t>(std::max(1, opts.unroll_bound));
    std::vector<ProgramState> path{initial_state(p, lasso_threads(l))};
    size_t nodes = 0;
    std::optional<FeasibleWitness> found;

    std::function<void()> dfs = [&]() {
        if (found || nodes++ > opts.node_limit) return;
        size_t j = path.size() - 1;
        if (at_loop_boundary(l, j)) {
            for (size_t i = l.stem.size(); i < j; i += l.loop.size())
                if (path[i] == path[j]) {
                    found = FeasibleWitness{path, i, j};
                    return;
                }
        }
        if (j >= limit) return;
        for (auto& next : cfg_step(p, path.back(), unrolled_letter(l, j), opts.range)) {
            path.push_back(std::move(next));
            dfs();
            path.pop_back();
            if (found) return;
        }
    };
    dfs();
    if (found) return *found;
    return NoWitnessFound{};
}

bool replay_witness(const Program& p, const Lasso& l, const FeasibleWitness& w, const HavocRange& range) {
    if (l.loop.empty() || w.states.empty() || w.first >= w.second || w.second >= w.states.size()) return false;
    if (!at_loop_boundary(l, w.first) || !at_loop_boundary(l, w.second)) return false;
    if (w.states[0] != initial_state(p, lasso_threads(l))) return false;
    for (size_t j = 0; j + 1 < w.states.size(); ++j) {
        auto succ = cfg_step(p, w.states[j], unrolled_letter(l, j), range);
        if (std::find(succ.begin(), succ.end(), w.states[j + 1]) == succ.end()) return false;
    }
    return w.states[w.first] == w.states[w.second];
}

std::string witness_str(const Program& p, const Lasso& l, const FeasibleWitness& w) {
    auto state_str = [&](const ProgramState& s) {
        std::string out = "{";
        bool first = true;
        for (const auto& [v, val] : s.vals) {
            out += (first ? "" : ", ") + v.str() + "=" + std::to_string(val);
            first = false;
        }
        out += "} at";
        for (int loc : s.locs) out += " " + p.locations.at(static_cast<size_t>(loc));
        return out;
    };
    std::ostringstream os;
    for (size_t j = 0; j < w.states.size(); ++j) {
        os << "  " << j << ": " << state_str(w.states[j]);
        if (j == w.first || j == w.second) os << "  <- recurs";
        os << "\n";
        if (j + 1 < w.states.size()) {
            const IndexedCommand& ic = unrolled_letter(l, j);
            os << "     " << p.command(ic.cmd).name << "@" << ic.thread << "\n";
        }
    }
    return os.str();
}

// ---------------------------------------------------------------- projection

namespace {

Atom le_zero(const LinTerm& t) { return Atom::make(t, Cmp::Le, LinTerm(0)); }

Atom with_term(Atom::Rel rel, const LinTerm& t) {
    switch (rel) {
    case Atom::Rel::Le: return Atom::make(t, Cmp::Le, LinTerm(0));
    case Atom::Rel::Eq: return Atom::make(t, Cmp::Eq, LinTerm(0));
    case Atom::Rel::Ne: return Atom::make(t, Cmp::Ne, LinTerm(0));
    }
    return Atom::truth();
}

bool eliminate(std::vector<Atom>& atoms, const Var& y, size_t cap) {
    std::vector<Atom> keep, with;
    for (auto& a : atoms) (a.term.coeff(y) == 0 ? keep : with).push_back(a);
    if (with.empty()) return true;

    // Prefer an equality with the smallest coefficient.
    const Atom* eq = nullptr;
    for (const auto& a : with)
        if (a.rel == Atom::Rel::Eq && (!eq || std::llabs(a.term.coeff(y)) < std::llabs(eq->term.coeff(y)))) eq = &a;
    if (eq) {
        int64_t a = eq->term.coeff(y);
        int64_t sa = a > 0 ? 1 : -1;
        for (const auto& t : with) {
            if (&t == eq) continue;
            try {
                int64_t b = t.term.coeff(y);
                keep.push_back(with_term(t.rel, t.term * std::llabs(a) - eq->term * (sa * b)));
            } catch (const Error&) {
            }
        }
        atoms = std::move(keep);
        return true;
    }

    std::vector<const Atom*> pos, neg;
    for (const auto& a : with) {
        if (a.rel != Atom::Rel::Le) continue; // disequalities are dropped
        (a.term.coeff(y) > 0 ? pos : neg).push_back(&a);
    }
    if (pos.size() * neg.size() > cap) {
        atoms = std::move(keep);
        return false;
    }
    for (const Atom* u : pos)
        for (const Atom* l : neg) {
            try {
                int64_t a = u->term.coeff(y), b = -l->term.coeff(y);
                keep.push_back(le_zero(u->term * b + l->term * a));
            } catch (const Error&) {
            }
        }
    atoms = std::move(keep);
    return true;
}

} // namespace

Assertion project_out(const Assertion& phi, const std::set<Var>& vars, size_t atom_cap) {
    if (phi.is_false()) return phi;
    std::vector<Atom> atoms(phi.atoms.begin(), phi.atoms.end());
    std::set<Var> todo = vars;
    while (!todo.empty()) {
        // Equalities first, then the variable with the fewest combinations.
        std::optional<Var> best;
        size_t best_cost = SIZE_MAX;
        for (const auto& v : todo) {
            size_t pos = 0, neg = 0;
            bool has_eq = false;
            for (const auto& a : atoms) {
                int64_t c = a.term.coeff(v);
                if (c == 0) continue;
                if (a.rel == Atom::Rel::Eq) has_eq = true;
                else if (a.rel == Atom::Rel::Le) (c > 0 ? pos : neg)++;
            }
            size_t cost = has_eq ? 0 : pos * neg + 1;
            if (cost < best_cost) {
                best_cost = cost;
                best = v;
            }
        }
        eliminate(atoms, *best, atom_cap);
        todo.erase(*best);
        Assertion tidy;
        for (const auto& a : atoms) tidy.add(a);
        if (tidy.is_false()) return tidy;
        atoms.assign(tidy.atoms.begin(), tidy.atoms.end());
        if (atoms.size() > atom_cap) atoms.resize(atom_cap);
    }
    return Assertion(atoms);
}

namespace {

bool is_internal(const Var& v) { return !v.name.empty() && v.name[0] == '#'; }

Var initial_symbol(const Var& v) { return v.is_old() ? v : Var{v.kind, "#i" + v.name, v.index}; }

std::set<Var> word_vars(const Program& p, const Word& w) {
    std::set<Var> out;
    for (const auto& ic : w) {
        const Command& c = p.command(ic.cmd);
        for (const auto& v : c.reads()) out.insert(bind_thread(v, ic.thread));
        for (const auto& v : c.writes()) out.insert(bind_thread(v, ic.thread));
    }
    return out;
}

std::set<Var> command_vars(const Program& p, const IndexedCommand& ic) { return word_vars(p, Word{ic}); }

} // namespace

Assertion strongest_post(const Program& p, const Assertion& pre, const Word& w) {
    SymbolicRun run = symbolic_execute(p, w);
    auto rename = [](const Var& v) { return is_internal(v) ? v : initial_symbol(v); };
    Assertion conj;
    for (const auto& a : pre.atoms) conj.add(a.map_vars(rename));
    for (const auto& a : run.constraints.atoms) conj.add(a.map_vars(rename));

    std::set<Var> current;
    for (const auto& v : pre.vars())
        if (!v.is_old()) current.insert(v);
    for (const auto& v : word_vars(p, w)) current.insert(v);
    for (const auto& v : current) {
        LinTerm val = symbolic_value(run, v).map_vars(rename);
        conj.add(Atom::make(LinTerm::var(v), Cmp::Eq, val));
    }
    std::set<Var> hidden;
    for (const auto& v : conj.vars())
        if (is_internal(v)) hidden.insert(v);
    return project_out(conj, hidden);
}

Assertion stem_strongest_post(const Program& p, const Word& stem) { return strongest_post(p, Assertion{}, stem); }

// ---------------------------------------------------------------- ranking

namespace {

Rational to_rat(int64_t v) { return Rational(v); }

std::optional<RankingFormula> solve_ranking(const std::vector<std::pair<std::map<Var, int64_t>, int64_t>>& rows,
                                            const std::vector<Var>& vars, const std::map<Var, LinTerm>& next,
                                            const std::set<Var>& zs, bool bound_zero) {
    LinearProgram lp;
    std::map<Var, std::pair<int, int>> lam;
    for (const auto& v : vars) lam[v] = {lp.add_var(true), lp.add_var(true)};
    std::vector<int> mu, mu2;
    for (size_t r = 0; r < rows.size(); ++r) {
        mu.push_back(lp.add_var(true));
        mu2.push_back(lp.add_var(true));
    }
    std::optional<int> b;
    if (!bound_zero) b = lp.add_var(false);

    auto add_lambda = [&](std::map<int, Rational>& row, const Var& v, const Rational& k) {
        row[lam[v].first] += k;
        row[lam[v].second] -= k;
    };

    for (const auto& w : zs) {
        // Decrease: sum_r mu_r A_rw + [w in V] lambda_w - sum_v lambda_v n_vw = 0.
        std::map<int, Rational> dec, bnd;
        for (size_t r = 0; r < rows.size(); ++r) {
            auto it = rows[r].first.find(w);
            if (it == rows[r].first.end()) continue;
            dec[mu[r]] += to_rat(it->second);
            bnd[mu2[r]] += to_rat(it->second);
        }
        if (lam.count(w)) {
            add_lambda(dec, w, 1);
            add_lambda(bnd, w, 1);
        }
        for (const auto& v : vars) {
            int64_t n = next.at(v).coeff(w);
            if (n != 0) add_lambda(dec, v, -to_rat(n));
        }
        lp.add_constraint(dec, LinearProgram::Rel::Eq, 0);
        lp.add_constraint(bnd, LinearProgram::Rel::Eq, 0);
    }
    {
        // sum_r mu_r c_r + sum_v lambda_v n_v0 <= -1.
        std::map<int, Rational> dec, bnd;
        for (size_t r = 0; r < rows.size(); ++r) {
            dec[mu[r]] += to_rat(rows[r].second);
            bnd[mu2[r]] += to_rat(rows[r].second);
        }
        for (const auto& v : vars) add_lambda(dec, v, to_rat(next.at(v).constant));
        lp.add_constraint(dec, LinearProgram::Rel::Le, -1);
        // sum_r mu'_r c_r <= -b.
        if (b) bnd[*b] += 1;
        lp.add_constraint(bnd, LinearProgram::Rel::Le, 0);
    }
    std::map<int, Rational> obj;
    for (const auto& [v, pm] : lam) {
        obj[pm.first] = 1;
        obj[pm.second] = 1;
    }
    lp.minimize(obj);
    auto sol = lp.solve();
    if (!sol) return std::nullopt;

    using boost::multiprecision::cpp_int;
    cpp_int den = 1;
    for (const auto& [v, pm] : lam) {
        Rational x = (*sol)[static_cast<size_t>(pm.first)] - (*sol)[static_cast<size_t>(pm.second)];
        den = boost::multiprecision::lcm(den, boost::multiprecision::denominator(x));
    }
    cpp_int g = 0;
    std::map<Var, cpp_int> ints;
    for (const auto& [v, pm] : lam) {
        Rational x = ((*sol)[static_cast<size_t>(pm.first)] - (*sol)[static_cast<size_t>(pm.second)]) * Rational(den);
        ints[v] = boost::multiprecision::numerator(x);
        g = boost::multiprecision::gcd(g, ints[v]);
    }
    if (g == 0) g = 1;
    RankingFormula out;
    for (const auto& [v, k] : ints) {
        cpp_int c = k / g;
        if (c != 0) out.term = out.term + LinTerm::var(v, static_cast<int64_t>(c));
    }
    if (b) {
        Rational scaled = (*sol)[static_cast<size_t>(*b)] * Rational(den) / Rational(g);
        cpp_int num = boost::multiprecision::numerator(scaled), dd = boost::multiprecision::denominator(scaled);
        cpp_int q = num / dd;
        if (q * dd < num) q += 1; // ceiling
        out.bound = static_cast<int64_t>(q);
    }
    return out;
}

} // namespace

std::optional<RankingFormula> synthesize_linear_ranking(const Program& p, const Word& loop, const Assertion& support) {
    if (loop.empty()) return std::nullopt;
    SymbolicRun run = symbolic_execute(p, loop);
    Assertion hyp;
    for (const auto& a : support.atoms)
        if (!a.mentions_old()) hyp.add(a);
    hyp.add_all(run.constraints);

    std::vector<std::pair<std::map<Var, int64_t>, int64_t>> rows;
    std::set<Var> zs;
    auto add_row = [&](const LinTerm& t) {
        std::map<Var, int64_t> r;
        for (const auto& [v, c] : t.coeffs) {
            r[v] = c;
            zs.insert(v);
        }
        rows.push_back({r, -t.constant});
    };
    for (const auto& a : hyp.atoms) {
        if (a.rel == Atom::Rel::Le) add_row(a.term);
        else if (a.rel == Atom::Rel::Eq) {
            add_row(a.term);
            add_row(-a.term);
        }
    }

    std::vector<Var> vars;
    for (const auto& v : word_vars(p, loop))
        if (!v.is_old()) vars.push_back(v);
    std::map<Var, LinTerm> next;
    for (const auto& v : vars) {
        next[v] = symbolic_value(run, v);
        zs.insert(v);
        for (const auto& w : next[v].vars()) zs.insert(w);
    }
    if (auto r = solve_ranking(rows, vars, next, zs, true)) return r;
    return solve_ranking(rows, vars, next, zs, false);
}

// ---------------------------------------------------------------- proofs

namespace {

bool valid(ValidityOracle& oracle, const Program& p, const Assertion& pre, const Word& w, const Assertion& post) {
    return oracle.check(p, HoareTriple{pre, w, post}).verdict == Validity::Valid;
}

bool shares(const std::set<Var>& a, const std::set<Var>& b) {
    return std::any_of(a.begin(), a.end(), [&](const Var& v) { return b.count(v) > 0; });
}

Assertion restrict_related(const Assertion& phi, const std::set<Var>& focus) {
    Assertion out;
    for (const auto& a : phi.atoms)
        if (shares(a.vars(), focus)) out.add(a);
    return out;
}

} // namespace

ProofOutcome find_infeasibility_proof(const Program& p, const Lasso& l, ValidityOracle& oracle,
                                      const FeasibilityOptions& fopts) {
    if (l.loop.empty()) return ProofUnknown{"empty loop"};
    auto feas = check_lasso_feasibility(p, l, fopts);
    if (auto* w = std::get_if<FeasibleWitness>(&feas)) return *w;

    Assertion sp = stem_strongest_post(p, l.stem);
    std::set<Var> loop_vars = word_vars(p, l.loop);

    // Houdini: the largest subset of stem facts preserved by every loop step.
    Assertion inv;
    for (const auto& a : sp.atoms) {
        auto vs = a.vars();
        if (a.is_false() || (!vs.empty() && std::all_of(vs.begin(), vs.end(), [&](const Var& v) { return loop_vars.count(v); })))
            inv.add(a);
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& ic : l.loop) {
            Assertion kept;
            for (const auto& a : inv.atoms)
                if (valid(oracle, p, inv, Word{ic}, Assertion{a})) kept.add(a);
            if (kept != inv) {
                inv = kept;
                changed = true;
            }
        }
    }

    auto ranking = synthesize_linear_ranking(p, l.loop, inv);
    if (!ranking) return ProofUnknown{"no linear ranking function"};

    LassoProof proof;
    proof.ranking = *ranking;

    // Invariance: stem annotations computed backwards from the invariant.
    size_t s = l.stem.size();
    std::vector<Assertion> stem_ann(s + 1);
    stem_ann[s] = inv;
    for (size_t k = s; k-- > 0;) {
        Word prefix(l.stem.begin(), l.stem.begin() + static_cast<long>(k));
        Assertion full = stem_strongest_post(p, prefix);
        std::set<Var> focus = stem_ann[k + 1].vars();
        for (const auto& v : command_vars(p, l.stem[k])) focus.insert(v);
        Assertion cand = stem_ann[k + 1].is_true() ? Assertion{} : restrict_related(full, focus);
        if (!valid(oracle, p, cand, Word{l.stem[k]}, stem_ann[k + 1])) cand = full;
        if (!valid(oracle, p, cand, Word{l.stem[k]}, stem_ann[k + 1])) return ProofUnknown{"stem annotation failed"};
        stem_ann[k] = cand;
    }
    proof.invariance = stem_ann;
    for (size_t k = 0; k < l.loop.size(); ++k) proof.invariance.push_back(inv);

    // Variance: forward over the loop from inv && old(v) = v.
    Assertion v0 = inv;
    for (const auto& v : ranking->term.vars()) v0.add(Atom::make(LinTerm::var(v.old()), Cmp::Eq, LinTerm::var(v)));
    Assertion goal = ranking->as_assertion();
    Assertion pool = v0;
    pool.add_all(goal);
    proof.variance.push_back(v0);
    for (size_t k = 0; k < l.loop.size(); ++k) {
        Word prefix(l.loop.begin(), l.loop.begin() + static_cast<long>(k + 1));
        Assertion cands = pool;
        cands.add_all(strongest_post(p, v0, prefix));
        Assertion next;
        for (const auto& a : cands.atoms)
            if (valid(oracle, p, proof.variance.back(), Word{l.loop[k]}, Assertion{a})) next.add(a);
        proof.variance.push_back(next);
    }
    if (!comb_entails(proof.variance.back(), goal)) return ProofUnknown{"variance annotation does not reach the ranking"};
    return proof;
}

namespace {

// {pre} step {alpha} with pre drawn from `before`: related atoms first, then
// greedily shrunk while the triple stays valid and well-formed.
HoareTriple minimized_triple(const Program& p, ValidityOracle& oracle, const Assertion& before,
                             const IndexedCommand& ic, const Atom& alpha) {
    Word step{ic};
    Assertion post{alpha};
    std::set<Var> focus = alpha.vars();
    for (const auto& v : command_vars(p, ic)) focus.insert(v);
    Assertion pre = restrict_related(before, focus);
    if (!check_well_formed({pre, step, post}) || !valid(oracle, p, pre, step, post)) pre = before;
    if (!valid(oracle, p, pre, step, post)) throw Error("unsound annotation at " + triple_str(p, {before, step, post}));
    for (const auto& beta : std::vector<Atom>(pre.atoms.begin(), pre.atoms.end())) {
        Assertion smaller = pre;
        smaller.atoms.erase(beta);
        if (check_well_formed({smaller, step, post}) && valid(oracle, p, smaller, step, post)) pre = smaller;
    }
    return {pre, step, post};
}

// Emits triples for positions [from, to) of `w` backwards from the atoms
// needed at `to`; returns the atoms needed at `from`.
std::set<Atom> emit_backwards(const Program& p, ValidityOracle& oracle, const std::vector<Assertion>& ann,
                              const Word& w, size_t from, size_t to, std::set<Atom> needed, Basis& out) {
    for (size_t k = to; k-- > from;) {
        std::set<Atom> before;
        if (needed.empty()) out.merge(Basis{{HoareTriple{Assertion{}, Word{w[k]}, Assertion{}}}, {}});
        for (const auto& alpha : needed) {
            HoareTriple t = minimized_triple(p, oracle, ann[k], w[k], alpha);
            before.insert(t.pre.atoms.begin(), t.pre.atoms.end());
            out.merge(Basis{{t}, {}});
        }
        needed = std::move(before);
    }
    return needed;
}

} // namespace

Basis extract_basis(const Program& p, const LassoProof& proof, const Lasso& l, ValidityOracle& oracle) {
    Basis out;
    size_t s = l.stem.size(), n = s + l.loop.size();
    Assertion goal = proof.ranking.as_assertion();
    std::set<Atom> at_end;
    for (const auto& a : proof.variance.back().atoms)
        if (goal.atoms.count(a)) at_end.insert(a);
    std::set<Atom> at_entry = emit_backwards(p, oracle, proof.variance, l.loop, 0, l.loop.size(), at_end, out);

    // Invariant atoms needed at the loop head, closed under the back edge.
    Word whole = l.stem;
    whole.insert(whole.end(), l.loop.begin(), l.loop.end());
    std::set<Atom> head;
    for (const auto& a : at_entry)
        if (proof.invariance[s].atoms.count(a)) head.insert(a);
    Basis loop_part;
    for (;;) {
        loop_part = Basis{};
        std::set<Atom> need = emit_backwards(p, oracle, proof.invariance, whole, s, n, head, loop_part);
        if (std::includes(head.begin(), head.end(), need.begin(), need.end())) break;
        head.insert(need.begin(), need.end());
    }
    out.merge(loop_part);
    emit_backwards(p, oracle, proof.invariance, whole, 0, s, head, out);
    out.rankings.push_back(proof.ranking);
    return out;
}

Basis generate_stability_triples(const Basis& b, const Program& p, ValidityOracle& oracle) {
    std::set<Atom> pool;
    for (const auto& t : b.triples) {
        for (const auto& a : t.pre.atoms) pool.insert(a);
        for (const auto& a : t.post.atoms) pool.insert(a);
    }
    Basis out;
    if (pool.empty()) return out;
    std::set<int> ids;
    for (const auto& a : pool)
        for (int i : a.indices()) ids.insert(i);
    std::set<int> threads = ids;
    threads.insert(ids.empty() ? 1 : *ids.rbegin() + 1);

    for (int c = 0; c < static_cast<int>(p.commands.size()); ++c)
        for (int t : threads) {
            Word step{IndexedCommand{c, t}};
            std::set<Var> cvars = command_vars(p, step[0]);
            for (const auto& gamma : pool) {
                Assertion post{gamma};
                std::set<Var> focus = gamma.vars();
                focus.insert(cvars.begin(), cvars.end());
                std::vector<Atom> related;
                for (const auto& a : pool)
                    if (shares(a.vars(), focus)) related.push_back(a);
                auto try_pre = [&](const Assertion& pre) {
                    HoareTriple tr{pre, step, post};
                    if (!check_well_formed(tr) || oracle.satisfiable(pre) == Validity::Invalid ||
                        !valid(oracle, p, pre, step, post))
                        return false;
                    if (!b.contains(tr)) out.merge(Basis{{tr}, {}});
                    return true;
                };
                if (try_pre(Assertion{})) continue;
                std::vector<Atom> singles;
                for (const auto& a : related)
                    if (try_pre(Assertion{a})) singles.push_back(a);
                if (!singles.empty() || related.size() > 10) continue;
                for (size_t i = 0; i < related.size(); ++i)
                    for (size_t j = i + 1; j < related.size(); ++j) try_pre(Assertion{related[i], related[j]});
            }
        }
    return out;
}

// ---------------------------------------------------------------- Algorithm 1

std::string_view verdict_name(Verdict::Kind k) {
    switch (k) {
    case Verdict::Kind::Yes: return "Yes";
    case Verdict::Kind::No: return "No";
    case Verdict::Kind::Unknown: return "Unknown";
    case Verdict::Kind::BoundExhausted: return "BoundExhausted";
    }
    return "?";
}

Qpa inclusion_qpa(const Program& p, const QltlPtr& property, const Basis& b) {
    Qpa a = program_lasso_qpa(p);
    if (property) a = intersect(a, property_qpa(ql::neg(property), program_alphabet(p)));
    return intersect(a, complement(proof_space_qpa(p, b)));
}

Verdict run_algorithm1(const Program& p, const QltlPtr& property, const EngineOptions& opts) {
    Verdict v;
    v.basis = opts.seed;
    ValidityOracle oracle(opts.oracle);
    Qpa base = program_lasso_qpa(p);
    if (property) base = intersect(base, property_qpa(ql::neg(property), program_alphabet(p)));
    auto start = std::chrono::steady_clock::now();

    std::set<Lasso> proved;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        v.iterations = it;
        Qpa a = intersect(base, complement(proof_space_qpa(p, v.basis)));
        EmptinessOptions eo;
        eo.n_max = opts.n_max;
        eo.len_max = opts.len_max;
        eo.node_limit = opts.node_limit;
        if (opts.time_limit_s > 0) {
            double used = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            eo.time_limit_s = std::max(0.001, opts.time_limit_s - used);
        }
        v.emptiness = bounded_emptiness(a, eo);
        if (v.emptiness.kind == EmptinessResult::Kind::EmptyUpTo) {
            v.kind = Verdict::Kind::Yes;
            if (opts.certificate) {
                CertificateOptions co;
                co.prover = opts.oracle.prover;
                v.certificate = check_emptiness_certificate(a, parse_qpa_formula(a, *opts.certificate), co);
            }
            return v;
        }
        if (v.emptiness.kind == EmptinessResult::Kind::ResourceLimit) {
            v.kind = Verdict::Kind::BoundExhausted;
            v.note = v.emptiness.note;
            return v;
        }
        auto lasso = decode_lasso(p, v.emptiness.word);
        if (!lasso) {
            v.kind = Verdict::Kind::Unknown;
            v.note = "counterexample word is not a lasso";
            return v;
        }
        v.lasso = lasso;
        v.samples.push_back(*lasso);
        if (proved.count(*lasso)) {
            v.kind = Verdict::Kind::Unknown;
            v.note = "proof of a sampled lasso did not generalize to itself";
            return v;
        }
        ProofOutcome outcome = find_infeasibility_proof(p, *lasso, oracle, opts.feasibility);
        if (auto* w = std::get_if<FeasibleWitness>(&outcome)) {
            v.kind = Verdict::Kind::No;
            v.witness = *w;
            return v;
        }
        if (auto* u = std::get_if<ProofUnknown>(&outcome)) {
            v.kind = Verdict::Kind::Unknown;
            v.note = u->reason;
            return v;
        }
        proved.insert(*lasso);
        v.basis.merge(extract_basis(p, std::get<LassoProof>(outcome), *lasso, oracle));
        if (opts.stability) v.basis.merge(generate_stability_triples(v.basis, p, oracle));
    }
    v.kind = Verdict::Kind::BoundExhausted;
    v.note = "iteration limit reached";
    return v;
}

} // namespace wfps
