#include "wfps/proof_space.hpp"

#include "wfps/lexer.hpp"
#include "wfps/program_qpa.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace wfps {

size_t Basis::merge(const Basis& other) {
    size_t added = 0;
    for (const auto& t : other.triples) {
        if (contains(t)) continue;
        triples.push_back(t);
        ++added;
    }
    for (const auto& w : other.rankings) {
        if (std::find(rankings.begin(), rankings.end(), w) != rankings.end()) continue;
        rankings.push_back(w);
        ++added;
    }
    return added;
}

bool Basis::contains(const HoareTriple& t) const { return std::find(triples.begin(), triples.end(), t) != triples.end(); }

bool check_well_formed(const HoareTriple& t) {
    std::set<int> covered = t.pre.indices();
    for (const auto& ic : t.word) covered.insert(ic.thread);
    for (int i : t.post.indices())
        if (!covered.count(i)) return false;
    return true;
}

BasicVerdict check_basic_shape(const HoareTriple& t) {
    if (t.word.size() != 1) return {BasicVerdict::Kind::NotBasic, "the word must be a single indexed command"};
    if (t.post.size() > 1) return {BasicVerdict::Kind::NotBasic, "the post-condition must be a single atom"};
    if (!check_well_formed(t)) return {BasicVerdict::Kind::NotBasic, "a post-condition index appears spontaneously"};
    return {BasicVerdict::Kind::Basic, ""};
}

BasicVerdict check_basic(const Program& p, const HoareTriple& t, ValidityOracle& oracle) {
    BasicVerdict shape = check_basic_shape(t);
    if (!shape.ok()) return shape;
    auto v = oracle.check(p, t);
    if (v.verdict == Validity::Invalid) return {BasicVerdict::Kind::NotBasic, "the triple is not valid"};
    if (v.verdict == Validity::Unknown) return {BasicVerdict::Kind::Unknown, v.note};
    return shape;
}

// ---------------------------------------------------------------- basis I/O

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string strip_spaces(std::string_view s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    return out;
}

} // namespace

Basis parse_basis(const Program& p, std::string_view text) {
    Basis b;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t.starts_with("//")) continue;
        try {
            if (t.starts_with("triple")) {
                auto open1 = t.find('{');
                auto close1 = t.find('}', open1);
                auto open2 = t.rfind('{');
                auto close2 = t.rfind('}');
                if (open1 == std::string::npos || close1 == std::string::npos || open2 <= close1 ||
                    close2 < open2 || trim(t.substr(close2 + 1)) != "")
                    throw ParseError("expected 'triple {pre} cmd @ i {post}'", lineno, 1);
                std::string middle = t.substr(close1 + 1, open2 - close1 - 1);
                auto at = middle.rfind('@');
                if (at == std::string::npos) throw ParseError("expected '@ <index>' after the command", lineno, 1);
                std::string name = strip_spaces(middle.substr(0, at));
                auto idx = p.command_index(name);
                if (!idx) throw ParseError("unknown command '" + name + "'", lineno, 1);
                int tid = 0;
                try {
                    tid = std::stoi(trim(middle.substr(at + 1)));
                } catch (const std::exception&) {
                    throw ParseError("bad thread index", lineno, 1);
                }
                if (tid < 1) throw ParseError("thread index must be positive", lineno, 1);
                HoareTriple h;
                h.pre = parse_assertion(t.substr(open1 + 1, close1 - open1 - 1));
                h.word = {IndexedCommand{*idx, tid}};
                h.post = parse_assertion(t.substr(open2 + 1, close2 - open2 - 1));
                if (!b.contains(h)) b.triples.push_back(std::move(h));
            } else if (t.starts_with("rank")) {
                TokenStream ts(t.substr(4));
                RankingFormula w;
                w.term = parse_term(ts);
                if (!w.term.vars().empty())
                    for (const auto& v : w.term.vars())
                        if (v.is_old()) ts.fail("ranking terms range over current-state variables");
                ts.expect(">=");
                bool neg = ts.accept("-");
                w.bound = ts.expect_int() * (neg ? -1 : 1);
                if (!ts.at_end()) ts.fail("unexpected trailing input");
                if (std::find(b.rankings.begin(), b.rankings.end(), w) == b.rankings.end()) b.rankings.push_back(w);
            } else {
                throw ParseError("expected 'triple' or 'rank'", lineno, 1);
            }
        } catch (const ParseError& e) {
            if (e.line() == lineno) throw;
            throw ParseError(e.what(), lineno, e.column());
        }
    }
    return b;
}

std::string basis_str(const Program& p, const Basis& b) {
    std::ostringstream os;
    for (const auto& t : b.triples) {
        const auto& ic = t.word.at(0);
        os << "triple {" << t.pre.str() << "} " << p.command(ic.cmd).name << " @ " << ic.thread << " {"
           << t.post.str() << "}\n";
    }
    for (const auto& w : b.rankings) os << "rank " << w.term.str() << " >= " << w.bound << '\n';
    return os.str();
}

// ---------------------------------------------------------------- forward closure

namespace {

// Calls `visit` with every injective map of `from` into `into`.
void injections(const std::vector<int>& from, const std::vector<int>& into,
                const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> img(from.size());
    std::vector<bool> used(into.size(), false);
    std::function<void(size_t)> rec = [&](size_t k) {
        if (k == from.size()) {
            visit(img);
            return;
        }
        for (size_t u = 0; u < into.size(); ++u) {
            if (used[u]) continue;
            used[u] = true;
            img[k] = into[u];
            rec(k + 1);
            used[u] = false;
        }
    };
    rec(0);
}

} // namespace

ProofSpace::ProofSpace(Basis b) : basis_(std::move(b)) {
    for (const auto& t : basis_.triples) {
        BasicVerdict v = check_basic_shape(t);
        if (!v.ok()) throw PreconditionError("basis triple is not basic: " + v.reason);
        Prepared pr;
        pr.cmd = t.word[0].cmd;
        pr.exec = t.word[0].thread;
        std::set<int> idx = t.pre.indices();
        for (int i : t.post.indices()) idx.insert(i);
        idx.erase(pr.exec);
        pr.others.assign(idx.begin(), idx.end());
        prepared_.push_back(std::move(pr));
    }
    auto note = [&](const Assertion& a) {
        for (const auto& v : a.vars()) {
            Var c = v.current();
            (c.is_local() ? old_locals_ : old_globals_).insert(c.name);
        }
    };
    for (const auto& t : basis_.triples) {
        note(t.pre);
        note(t.post);
    }
    for (const auto& w : basis_.rankings) note(w.as_assertion());
}

ProofSpace::AtomSet ProofSpace::step(const AtomSet& s, const IndexedCommand& ic, const std::vector<int>& universe,
                                     std::map<Atom, Justification>* why) {
    AtomSet out;
    std::vector<int> rest;
    for (int u : universe)
        if (u != ic.thread) rest.push_back(u);
    for (size_t k = 0; k < prepared_.size(); ++k) {
        const Prepared& pr = prepared_[k];
        const HoareTriple& t = basis_.triples[k];
        if (pr.cmd != ic.cmd || t.post.is_true()) continue;
        injections(pr.others, rest, [&](const std::vector<int>& img) {
            Permutation pi{{pr.exec, ic.thread}};
            for (size_t j = 0; j < img.size(); ++j) pi[pr.others[j]] = img[j];
            for (const auto& a : t.pre.atoms)
                if (!s.count(apply_permutation(a, pi))) return;
            Atom post = apply_permutation(*t.post.atoms.begin(), pi);
            if (out.insert(post).second && why) (*why)[post] = Justification{k, pi};
        });
    }
    return out;
}

ProofSpace::AtomSet ProofSpace::derivable(const Assertion& pre, const Word& w, const std::vector<int>& universe) {
    AtomSet s(pre.atoms.begin(), pre.atoms.end());
    for (const auto& ic : w) s = step(s, ic, universe);
    return s;
}

bool ProofSpace::ranking_derived(const AtomSet& s, const std::vector<int>& universe) {
    for (const auto& w : basis_.rankings) {
        Assertion a = w.as_assertion();
        std::set<int> idx = a.indices();
        std::vector<int> from(idx.begin(), idx.end());
        bool found = false;
        injections(from, universe, [&](const std::vector<int>& img) {
            if (found) return;
            Permutation pi;
            for (size_t j = 0; j < img.size(); ++j) pi[from[j]] = img[j];
            for (const auto& atom : a.atoms)
                if (!s.count(apply_permutation(atom, pi))) return;
            found = true;
        });
        if (found) return true;
    }
    return false;
}

Assertion ProofSpace::old_equalities(const std::vector<int>& universe) const {
    Assertion out;
    for (const auto& g : old_globals_) {
        Var v = Var::global(g);
        out.add(Atom::make(LinTerm::var(v.old()), Cmp::Eq, LinTerm::var(v)));
    }
    for (const auto& l : old_locals_) {
        for (int i : universe) {
            Var v = Var::local(l, i);
            out.add(Atom::make(LinTerm::var(v.old()), Cmp::Eq, LinTerm::var(v)));
        }
    }
    return out;
}

int ProofSpace::intern(const AtomSet& s) {
    auto [it, fresh] = ids_.emplace(s, static_cast<int>(sets_.size()));
    if (fresh) sets_.push_back(&it->first);
    return it->second;
}

bool ProofSpace::lasso_member(const Lasso& l) {
    std::vector<int> u = lasso_universe(l);
    auto run = [&](int id, const Word& w) {
        for (const auto& ic : w) {
            auto key = std::make_tuple(id, ic.cmd, ic.thread, u);
            auto it = step_cache_.find(key);
            if (it == step_cache_.end()) it = step_cache_.emplace(key, intern(step(*sets_[static_cast<size_t>(id)], ic, u))).first;
            id = it->second;
        }
        return id;
    };
    int stem = run(intern({}), l.stem);
    AtomSet pre = *sets_[static_cast<size_t>(stem)];
    for (const auto& a : old_equalities(u).atoms) pre.insert(a);
    int end = run(intern(pre), l.loop);
    auto key = std::make_pair(end, u);
    if (auto it = rank_cache_.find(key); it != rank_cache_.end()) return it->second;
    bool r = ranking_derived(*sets_[static_cast<size_t>(end)], u);
    rank_cache_[key] = r;
    return r;
}

std::vector<int> lasso_universe(const Lasso& l, int fresh) {
    std::set<int> ids = l.threads();
    std::vector<int> u(ids.begin(), ids.end());
    int top = u.empty() ? 0 : u.back();
    for (int k = 1; k <= fresh; ++k) u.push_back(top + k);
    return u;
}

namespace {

std::vector<int> word_universe(const Assertion& pre, const Word& w, int fresh) {
    std::set<int> ids = pre.indices();
    for (const auto& ic : w) ids.insert(ic.thread);
    std::vector<int> u(ids.begin(), ids.end());
    int top = u.empty() ? 0 : u.back();
    for (int k = 1; k <= fresh; ++k) u.push_back(top + k);
    return u;
}

} // namespace

std::set<Atom> derivable_atoms(const Basis& b, const Assertion& pre, const Word& w, int fresh) {
    ProofSpace ps(b);
    return ps.derivable(pre, w, word_universe(pre, w, fresh));
}

bool lasso_in_proof_language(const Basis& b, const Lasso& l) {
    if (l.loop.empty()) return false;
    ProofSpace ps(b);
    return ps.lasso_member(l);
}

// ---------------------------------------------------------------- derivations

std::optional<std::shared_ptr<Derivation>> closure_witness(const Basis& b, const HoareTriple& t, int fresh) {
    if (t.word.empty()) throw PreconditionError("derivations need a nonempty word");
    ProofSpace ps(b);
    std::vector<int> u = word_universe(t.pre, t.word, fresh);
    std::vector<ProofSpace::AtomSet> sets{ProofSpace::AtomSet(t.pre.atoms.begin(), t.pre.atoms.end())};
    std::vector<std::map<Atom, ProofSpace::Justification>> why(t.word.size());
    for (size_t k = 0; k < t.word.size(); ++k) sets.push_back(ps.step(sets[k], t.word[k], u, &why[k]));
    for (const auto& a : t.post.atoms)
        if (!sets.back().count(a)) return std::nullopt;

    using Ptr = std::shared_ptr<Derivation>;
    std::function<Ptr(size_t, const Atom&)> atom_at;
    auto conj_at = [&](size_t n, const Assertion& atoms) -> Ptr {
        if (atoms.size() == 1) return atom_at(n, *atoms.atoms.begin());
        auto node = std::make_shared<Derivation>();
        node->rule = Derivation::Rule::Conjunction;
        node->conclusion.word.assign(t.word.begin(), t.word.begin() + static_cast<long>(n));
        node->conclusion.post = atoms;
        for (const auto& a : atoms.atoms) {
            Ptr kid = atom_at(n, a);
            node->conclusion.pre.add_all(kid->conclusion.pre);
            node->kids.push_back(kid);
        }
        return node;
    };
    atom_at = [&](size_t n, const Atom& a) -> Ptr {
        const auto& j = why[n - 1].at(a);
        const HoareTriple& base = b.triples[j.triple];
        auto leaf = std::make_shared<Derivation>();
        leaf->rule = Derivation::Rule::Basis;
        leaf->conclusion = base;
        Ptr inst = leaf;
        bool identity = std::all_of(j.pi.begin(), j.pi.end(), [](const auto& kv) { return kv.first == kv.second; });
        if (!identity) {
            inst = std::make_shared<Derivation>();
            inst->rule = Derivation::Rule::Symmetry;
            inst->pi = j.pi;
            inst->conclusion = {apply_permutation(base.pre, j.pi), {t.word[n - 1]}, Assertion{a}};
            inst->kids.push_back(leaf);
        }
        if (n == 1) return inst;
        auto seq = std::make_shared<Derivation>();
        seq->rule = Derivation::Rule::Sequencing;
        seq->conclusion.word.assign(t.word.begin(), t.word.begin() + static_cast<long>(n));
        seq->conclusion.post = Assertion{a};
        Ptr left = conj_at(n - 1, inst->conclusion.pre);
        seq->conclusion.pre = left->conclusion.pre;
        seq->kids = {left, inst};
        return seq;
    };
    Ptr root = conj_at(t.word.size(), t.post);
    return root;
}

std::string derivation_str(const Program& p, const Derivation& d) {
    std::ostringstream os;
    std::function<void(const Derivation&, int)> rec = [&](const Derivation& n, int depth) {
        static const char* names[] = {"Basis", "Symmetry", "Sequencing", "Conjunction"};
        os << std::string(static_cast<size_t>(depth) * 2, ' ') << names[static_cast<int>(n.rule)];
        if (n.rule == Derivation::Rule::Symmetry) {
            os << " [";
            bool first = true;
            for (const auto& [from, to] : n.pi) {
                if (from == to) continue;
                os << (first ? "" : ", ") << from << "->" << to;
                first = false;
            }
            os << "]";
        }
        os << ": {" << n.conclusion.pre.str() << "} " << (n.conclusion.word.empty() ? "" : word_str(p, n.conclusion.word))
           << " {" << n.conclusion.post.str() << "}\n";
        for (const auto& k : n.kids) rec(*k, depth + 1);
    };
    rec(d, 0);
    return os.str();
}

// ---------------------------------------------------------------- A(H,W)

bool is_old_equality(const Atom& a) {
    if (a.rel != Atom::Rel::Eq || a.term.constant != 0 || a.term.coeffs.size() != 2) return false;
    const auto& [v1, c1] = a.term.coeffs[0];
    const auto& [v2, c2] = a.term.coeffs[1];
    if (c1 != -c2 || (c1 != 1 && c1 != -1)) return false;
    return v1.is_old() != v2.is_old() && v1.current() == v2.current();
}

std::string canonical_pred_name(const Atom& a) { return "[" + canonicalize(Assertion{a}).first.name.str() + "]"; }

Qpa proof_space_qpa(const Program& p, const Basis& b) {
    for (const auto& t : b.triples) {
        BasicVerdict v = check_basic_shape(t);
        if (!v.ok()) throw PreconditionError("basis triple is not basic: " + v.reason);
    }
    Qpa a(program_alphabet(p));
    std::map<CanonicalAssertion, int> preds;
    std::vector<bool> old_eq;
    auto pred_of = [&](const Atom& atom) -> std::pair<int, std::vector<int>> {
        auto [c, tuple] = canonicalize(Assertion{atom});
        auto it = preds.find(c);
        if (it == preds.end()) {
            if (c.arity > kMaxArity) throw PreconditionError("assertion mentions too many thread indices");
            int q = a.add_pred("[" + c.name.str() + "]", c.arity);
            old_eq.push_back(is_old_equality(*c.name.atoms.begin()));
            it = preds.emplace(c, q).first;
        }
        return {it->second, tuple};
    };
    for (const auto& t : b.triples) {
        if (t.post.is_true()) continue;
        for (const auto& x : t.pre.atoms) pred_of(x);
        pred_of(*t.post.atoms.begin());
    }
    for (const auto& w : b.rankings)
        for (const auto& x : w.as_assertion().atoms) pred_of(x);

    auto all_distinct = [](const std::vector<int>& vs) {
        std::vector<FormulaPtr> parts;
        for (size_t x = 0; x < vs.size(); ++x)
            for (size_t y = x + 1; y < vs.size(); ++y) parts.push_back(fm::ne(vs[x], vs[y]));
        return parts;
    };

    for (const auto& t : b.triples) {
        if (t.post.is_true()) continue; // vacuous
        const Atom& post = *t.post.atoms.begin();
        const int exec = t.word[0].thread;
        const int letter = t.word[0].cmd;
        auto [q, unused] = pred_of(post);
        (void)unused;
        for (const auto& tuple : canonical_tuples(Assertion{post})) {
            std::map<int, int> var_of; // thread index -> formula variable
            std::vector<FormulaPtr> parts;
            std::vector<int> named;
            for (size_t j = 0; j < tuple.size(); ++j) {
                var_of[tuple[j]] = static_cast<int>(j) + 1;
                named.push_back(static_cast<int>(j) + 1);
            }
            if (auto it = var_of.find(exec); it != var_of.end()) {
                parts.push_back(fm::eq(0, it->second));
            } else {
                var_of[exec] = 0;
                for (int v : named) parts.push_back(fm::ne(0, v));
                named.push_back(0);
            }
            std::vector<int> extras;
            for (int i : t.pre.indices()) {
                if (var_of.count(i)) continue;
                int v = fresh_var();
                var_of[i] = v;
                extras.push_back(v);
            }
            std::vector<int> everyone = named;
            everyone.insert(everyone.end(), extras.begin(), extras.end());
            for (auto& d : all_distinct(everyone))
                if (std::find(extras.begin(), extras.end(), d->args[0]) != extras.end() ||
                    std::find(extras.begin(), extras.end(), d->args[1]) != extras.end())
                    parts.push_back(d);
            for (const auto& x : t.pre.atoms) {
                auto [pq, ptuple] = pred_of(x);
                std::vector<int> args;
                for (int i : ptuple) args.push_back(var_of.at(i));
                parts.push_back(fm::pred(pq, args));
            }
            a.or_delta(q, letter, fm::exists(extras, fm::conj(std::move(parts))));
        }
    }
    const int dollar = a.dollar();
    for (size_t q = 0; q < a.n_preds(); ++q) {
        std::vector<int> args;
        for (int k = 1; k <= a.arity[q]; ++k) args.push_back(k);
        a.set_delta(static_cast<int>(q), dollar, old_eq[q] ? fm::tt() : fm::pred(static_cast<int>(q), args));
    }
    std::vector<FormulaPtr> starts;
    for (const auto& w : b.rankings) {
        Assertion wa = w.as_assertion();
        std::map<int, int> var_of;
        std::vector<int> vs;
        for (int i : wa.indices()) {
            var_of[i] = fresh_var();
            vs.push_back(var_of[i]);
        }
        std::vector<FormulaPtr> parts = all_distinct(vs);
        for (const auto& x : wa.atoms) {
            auto [pq, ptuple] = pred_of(x);
            std::vector<int> args;
            for (int i : ptuple) args.push_back(var_of.at(i));
            parts.push_back(fm::pred(pq, args));
        }
        starts.push_back(fm::exists(vs, fm::conj(std::move(parts))));
    }
    a.start = fm::disj(std::move(starts));
    return a;
}

} // namespace wfps
