#include "wfps/validity.hpp"

#include "wfps/error.hpp"

#include <sstream>

namespace wfps {

std::string_view validity_name(Validity v) {
    switch (v) {
    case Validity::Valid: return "Valid";
    case Validity::Invalid: return "Invalid";
    case Validity::Unknown: return "Unknown";
    }
    return "?";
}

std::string triple_str(const Program& p, const HoareTriple& t) {
    return "{" + t.pre.str() + "} " + word_str(p, t.word) + " {" + t.post.str() + "}";
}

SymbolicRun symbolic_execute(const Program& p, const Word& w) {
    SymbolicRun run;
    for (const auto& ic : w) {
        const Command& c = p.command(ic.cmd);
        switch (c.kind) {
        case Command::Kind::Skip: break;
        case Command::Kind::Assume:
            for (const auto& a : c.guard.atoms) run.constraints.add(symbolic_atom(run, bind_thread(a, ic.thread)));
            break;
        case Command::Kind::Assign: {
            std::vector<std::pair<Var, LinTerm>> next;
            for (const auto& [v, t] : c.assigns)
                next.push_back({bind_thread(v, ic.thread), bind_thread(t, ic.thread).substitute(run.state)});
            for (auto& [v, t] : next) run.state[v] = std::move(t);
            break;
        }
        case Command::Kind::Havoc: {
            Var h = Var::global("#h" + std::to_string(run.havocs.size()));
            run.havocs.push_back(h);
            run.state[bind_thread(c.havoc_var, ic.thread)] = LinTerm::var(h);
            if (c.lower) run.constraints.add(Atom::make(LinTerm::var(h), Cmp::Ge, LinTerm(*c.lower)));
            break;
        }
        }
    }
    return run;
}

LinTerm symbolic_value(const SymbolicRun& run, const Var& v) {
    auto it = run.state.find(v);
    return it == run.state.end() ? LinTerm::var(v) : it->second;
}

Atom symbolic_atom(const SymbolicRun& run, const Atom& a) {
    Atom out;
    out.rel = a.rel;
    LinTerm t = a.term.substitute(run.state);
    switch (a.rel) {
    case Atom::Rel::Le: return Atom::make(t, Cmp::Le, LinTerm(0));
    case Atom::Rel::Eq: return Atom::make(t, Cmp::Eq, LinTerm(0));
    case Atom::Rel::Ne: return Atom::make(t, Cmp::Ne, LinTerm(0));
    }
    return out;
}

std::string smt_term(const LinTerm& t) {
    auto num = [](int64_t c) { return c < 0 ? "(- " + std::to_string(-c) + ")" : std::to_string(c); };
    std::vector<std::string> parts;
    for (const auto& [v, c] : t.coeffs) {
        std::string sym = smt_symbol(v.str());
        parts.push_back(c == 1 ? sym : "(* " + num(c) + " " + sym + ")");
    }
    if (t.constant != 0 || parts.empty()) parts.push_back(num(t.constant));
    if (parts.size() == 1) return parts[0];
    std::string out = "(+";
    for (const auto& s : parts) out += " " + s;
    return out + ")";
}

std::string smt_atom(const Atom& a) {
    std::string t = smt_term(a.term);
    switch (a.rel) {
    case Atom::Rel::Le: return "(<= " + t + " 0)";
    case Atom::Rel::Eq: return "(= " + t + " 0)";
    case Atom::Rel::Ne: return "(not (= " + t + " 0))";
    }
    return "true";
}

namespace {

struct SatQuery {
    std::vector<Atom> atoms;
    std::map<Var, std::pair<int64_t, int64_t>> ranges; // per-variable overrides
    std::pair<int64_t, int64_t> fallback{-4, 4};
};

std::string smt_script(const std::vector<Atom>& atoms) {
    std::set<Var> vars;
    for (const auto& a : atoms)
        for (const auto& v : a.vars()) vars.insert(v);
    std::ostringstream os;
    for (const auto& v : vars) os << "(declare-const " << smt_symbol(v.str()) << " Int)\n";
    for (const auto& a : atoms) os << "(assert " << smt_atom(a) << ")\n";
    return os.str();
}

// Exhaustive search inside the ranges. Returns a model or nullopt; sets
// `complete` when the whole box was covered.
std::optional<Valuation> enumerate_model(const SatQuery& q, uint64_t budget, bool& complete) {
    std::set<Var> vars;
    for (const auto& a : q.atoms)
        for (const auto& v : a.vars()) vars.insert(v);
    std::vector<Var> order(vars.begin(), vars.end());
    std::vector<std::pair<int64_t, int64_t>> box;
    for (const auto& v : order) {
        auto it = q.ranges.find(v);
        box.push_back(it == q.ranges.end() ? q.fallback : it->second);
    }
    Valuation val;
    for (size_t k = 0; k < order.size(); ++k) val[order[k]] = box[k].first;
    uint64_t visited = 0;
    complete = true;
    for (const auto& [lo, hi] : box)
        if (hi < lo) return std::nullopt;
    for (;;) {
        if (++visited > budget) {
            complete = false;
            return std::nullopt;
        }
        auto lookup = [&](const Var& v) { return val.at(v); };
        bool ok = true;
        for (const auto& a : q.atoms) {
            if (!a.holds(lookup)) {
                ok = false;
                break;
            }
        }
        if (ok) return val;
        size_t k = 0;
        for (; k < order.size(); ++k) {
            auto& x = val[order[k]];
            if (x < box[k].second) {
                ++x;
                break;
            }
            x = box[k].first;
        }
        if (k == order.size()) return std::nullopt;
    }
}

} // namespace

ValidityOracle::ValidityOracle(OracleConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.prover) {
        try {
            client_ = std::make_unique<SmtClient>(*cfg_.prover, "QF_LIA");
        } catch (const Error& e) {
            prover_error_ = e.what();
        }
    }
}

ValidityOracle::~ValidityOracle() = default;

Validity ValidityOracle::satisfiable(const Assertion& phi) {
    if (phi.is_false()) return Validity::Invalid;
    std::vector<Atom> atoms(phi.atoms.begin(), phi.atoms.end());
    if (client_) {
        try {
            ++prover_calls_;
            auto ans = client_->check(smt_script(atoms), false);
            if (ans.result == SatResult::Sat) return Validity::Valid;
            if (ans.result == SatResult::Unsat) return Validity::Invalid;
        } catch (const Error& e) {
            prover_error_ = e.what();
            client_.reset();
        }
    }
    SatQuery q{atoms, {}, {cfg_.enum_lo, cfg_.enum_hi}};
    bool complete = false;
    return enumerate_model(q, cfg_.enum_budget, complete) ? Validity::Valid : Validity::Unknown;
}

ValidityResult ValidityOracle::check(const Program& p, const HoareTriple& t) {
    std::ostringstream key;
    for (const auto& ic : t.word) key << ic.cmd << '@' << ic.thread << ' ';
    auto mkey = std::make_pair(t.pre.str() + "|" + key.str(), t.post.str());
    if (auto it = memo_.find(mkey); it != memo_.end()) return it->second;

    SymbolicRun run = symbolic_execute(p, t.word);
    std::vector<Atom> base(run.constraints.atoms.begin(), run.constraints.atoms.end());
    base.insert(base.end(), t.pre.atoms.begin(), t.pre.atoms.end());

    std::map<Var, std::pair<int64_t, int64_t>> ranges;
    for (size_t k = 0; k < run.havocs.size(); ++k) ranges[run.havocs[k]] = {cfg_.enum_lo, cfg_.enum_hi};
    {
        // Havoc ranges start at the command's lower bound when there is one.
        size_t k = 0;
        for (const auto& ic : t.word) {
            const Command& c = p.command(ic.cmd);
            if (c.kind != Command::Kind::Havoc) continue;
            if (c.lower) ranges[run.havocs[k]] = {*c.lower, *c.lower + cfg_.havoc_span - 1};
            ++k;
        }
    }

    ValidityResult result;
    result.verdict = Validity::Valid;
    auto witness = [&](const Valuation& model) {
        ValidityResult r;
        r.verdict = Validity::Invalid;
        std::set<Var> vars = t.pre.vars();
        for (const auto& v : t.post.vars()) vars.insert(v);
        for (const auto& ic : t.word) {
            const Command& c = p.command(ic.cmd);
            for (const auto& v : c.reads()) vars.insert(bind_thread(v, ic.thread));
            for (const auto& v : c.writes()) vars.insert(bind_thread(v, ic.thread));
        }
        auto lookup = [&](const Var& v) {
            auto it = model.find(v);
            return it == model.end() ? int64_t{0} : it->second;
        };
        for (const auto& v : vars) {
            r.before[v] = lookup(v);
            if (!v.is_old()) r.after[v] = symbolic_value(run, v).eval(lookup);
        }
        return r;
    };

    bool any_unknown = false;
    for (const auto& goal : t.post.atoms) {
        for (const auto& neg : goal.negation()) {
            Atom target = symbolic_atom(run, neg);
            std::vector<Atom> atoms = base;
            atoms.push_back(target);
            bool decided = false;
            if (client_) {
                try {
                    ++prover_calls_;
                    auto ans = client_->check(smt_script(atoms), true);
                    if (ans.result == SatResult::Unsat) {
                        decided = true;
                    } else if (ans.result == SatResult::Sat) {
                        Valuation model;
                        std::set<Var> vars;
                        for (const auto& a : atoms)
                            for (const auto& v : a.vars()) vars.insert(v);
                        for (const auto& v : vars) {
                            auto it = ans.model.find(v.str());
                            model[v] = it == ans.model.end() ? 0 : it->second;
                        }
                        // Prefer a small witness from the box when one exists.
                        SatQuery q{atoms, ranges, {cfg_.enum_lo, cfg_.enum_hi}};
                        bool complete = false;
                        if (auto small = enumerate_model(q, 200'000, complete)) model = *small;
                        result = witness(model);
                        memo_[mkey] = result;
                        return result;
                    }
                } catch (const Error& e) {
                    prover_error_ = e.what();
                    client_.reset();
                }
            }
            if (decided) continue;
            SatQuery q{atoms, ranges, {cfg_.enum_lo, cfg_.enum_hi}};
            bool complete = false;
            if (auto model = enumerate_model(q, cfg_.enum_budget, complete)) {
                result = witness(*model);
                memo_[mkey] = result;
                return result;
            }
            any_unknown = true;
        }
    }
    if (any_unknown) {
        result.verdict = Validity::Unknown;
        result.note = prover_error_.empty() ? "no counterexample within the enumeration bounds"
                                            : "prover unavailable (" + prover_error_ + "); bounded search only";
    }
    memo_[mkey] = result;
    return result;
}

ValidityResult ValidityOracle::entails(const Program& p, const Assertion& phi, const Assertion& psi) {
    return check(p, HoareTriple{phi, {}, psi});
}

ValidityResult check_hoare_validity(const Program& p, const HoareTriple& t, ValidityOracle& oracle) {
    return oracle.check(p, t);
}

namespace {

int64_t state_lookup(const ProgramState& s, const ProgramState* s_old, const Var& v) {
    const ProgramState* src = &s;
    if (v.is_old()) {
        if (!s_old) throw Error("old-copy " + v.str() + " needs an old state");
        src = s_old;
    }
    Var cur = v.current();
    if (cur.is_local() && (cur.index < 1 || cur.index > src->n_threads))
        throw Error("thread index " + std::to_string(cur.index) + " is unbound in a " +
                    std::to_string(src->n_threads) + "-thread state");
    return src->get(cur);
}

} // namespace

bool eval_assertion(const ProgramState& s, const ProgramState* s_old, const Assertion& phi) {
    return phi.holds([&](const Var& v) { return state_lookup(s, s_old, v); });
}

bool eval_ranking_relation(const ProgramState& s_old, const ProgramState& s, const RankingFormula& w) {
    if (s_old.n_threads != s.n_threads) throw PreconditionError("states differ in thread count");
    return w.relates([&](const Var& v) { return state_lookup(s_old, nullptr, v); },
                     [&](const Var& v) { return state_lookup(s, nullptr, v); });
}

} // namespace wfps
