#include "wfps/qpa.hpp"

#include <algorithm>
#include <sstream>

namespace wfps {

Fact make_fact(int pred, const std::vector<int>& args) {
    if (pred < 0 || pred > 0xffff) throw PreconditionError("predicate id out of range");
    if (args.size() > static_cast<size_t>(kMaxArity)) throw PreconditionError("arity exceeds limit");
    Fact f = static_cast<Fact>(pred) << 48;
    for (size_t k = 0; k < args.size(); ++k) {
        if (args[k] < 0 || args[k] > kMaxThreadId) throw PreconditionError("thread id out of range");
        f |= static_cast<Fact>(args[k]) << (36 - 12 * k);
    }
    return f;
}

int fact_pred(Fact f) { return static_cast<int>(f >> 48); }

std::vector<int> fact_args(Fact f, int arity) {
    std::vector<int> out;
    for (int k = 0; k < arity; ++k) out.push_back(static_cast<int>((f >> (36 - 12 * k)) & 0xfff));
    return out;
}

std::string config_str(const Qpa& a, const Configuration& c) {
    std::ostringstream os;
    os << "universe {";
    for (size_t k = 0; k < c.universe.size(); ++k) os << (k ? "," : "") << c.universe[k];
    os << "} facts {";
    for (size_t k = 0; k < c.facts.size(); ++k) {
        int q = fact_pred(c.facts[k]);
        os << (k ? ", " : "") << a.preds.at(static_cast<size_t>(q));
        auto args = fact_args(c.facts[k], a.arity.at(static_cast<size_t>(q)));
        if (!args.empty()) {
            os << '(';
            for (size_t j = 0; j < args.size(); ++j) os << (j ? "," : "") << args[j];
            os << ')';
        }
    }
    os << '}';
    return os.str();
}

namespace {

int env_get(const std::map<int, int>& env, int v) {
    auto it = env.find(v);
    if (it == env.end()) throw Error("unbound variable in QPA formula");
    return it->second;
}

} // namespace

bool eval_qpa_formula(const Qpa& a, const Configuration& c, const std::map<int, int>& env, const FormulaPtr& f) {
    switch (f->kind) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Pred: {
        std::vector<int> args;
        for (int v : f->args) args.push_back(env_get(env, v));
        (void)a;
        return std::binary_search(c.facts.begin(), c.facts.end(), make_fact(f->pred, args));
    }
    case Formula::Kind::Eq: return env_get(env, f->args[0]) == env_get(env, f->args[1]);
    case Formula::Kind::Ne: return env_get(env, f->args[0]) != env_get(env, f->args[1]);
    case Formula::Kind::And:
        for (const auto& k : f->kids)
            if (!eval_qpa_formula(a, c, env, k)) return false;
        return true;
    case Formula::Kind::Or:
        for (const auto& k : f->kids)
            if (eval_qpa_formula(a, c, env, k)) return true;
        return false;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
        bool all = f->kind == Formula::Kind::Forall;
        std::map<int, int> inner = env;
        for (int t : c.universe) {
            inner[f->var] = t;
            bool v = eval_qpa_formula(a, c, inner, f->kids[0]);
            if (all && !v) return false;
            if (!all && v) return true;
        }
        return all;
    }
    }
    return false;
}

// ---------------------------------------------------------------- DNF

void minimize_dnf(Dnf& d) {
    std::sort(d.begin(), d.end(), [](const Clause& x, const Clause& y) {
        return x.size() != y.size() ? x.size() < y.size() : x < y;
    });
    d.erase(std::unique(d.begin(), d.end()), d.end());
    Dnf out;
    for (auto& c : d) {
        bool subsumed = false;
        for (const auto& k : out) {
            if (k.size() < c.size() && std::includes(c.begin(), c.end(), k.begin(), k.end())) {
                subsumed = true;
                break;
            }
        }
        if (!subsumed) out.push_back(std::move(c));
    }
    d = std::move(out);
}

QpaRunner::QpaRunner(const Qpa& a, std::vector<int> universe, size_t dnf_limit)
    : a_(a), universe_(std::move(universe)), dnf_limit_(dnf_limit) {
    std::sort(universe_.begin(), universe_.end());
    universe_.erase(std::unique(universe_.begin(), universe_.end()), universe_.end());
}

Dnf QpaRunner::product(const Dnf& x, const Dnf& y) {
    if (x.empty() || y.empty()) return {};
    if (x.size() == 1 && x[0].empty()) return y;
    if (y.size() == 1 && y[0].empty()) return x;
    if (x.size() * y.size() > dnf_limit_) throw ResourceLimit("DNF size limit exceeded");
    Dnf out;
    out.reserve(x.size() * y.size());
    for (const auto& cx : x) {
        for (const auto& cy : y) {
            Clause c;
            c.reserve(cx.size() + cy.size());
            std::set_union(cx.begin(), cx.end(), cy.begin(), cy.end(), std::back_inserter(c));
            out.push_back(std::move(c));
        }
    }
    minimize_dnf(out);
    return out;
}

Dnf QpaRunner::ground(const FormulaPtr& f, std::vector<std::pair<int, int>>& env) {
    auto get = [&](int v) {
        for (auto it = env.rbegin(); it != env.rend(); ++it)
            if (it->first == v) return it->second;
        throw Error("unbound variable in QPA formula");
    };
    switch (f->kind) {
    case Formula::Kind::True: return Dnf{Clause{}};
    case Formula::Kind::False: return {};
    case Formula::Kind::Pred: {
        std::vector<int> args;
        for (int v : f->args) args.push_back(get(v));
        return Dnf{Clause{make_fact(f->pred, args)}};
    }
    case Formula::Kind::Eq: return get(f->args[0]) == get(f->args[1]) ? Dnf{Clause{}} : Dnf{};
    case Formula::Kind::Ne: return get(f->args[0]) != get(f->args[1]) ? Dnf{Clause{}} : Dnf{};
    case Formula::Kind::And: {
        Dnf acc{Clause{}};
        for (const auto& k : f->kids) {
            acc = product(acc, ground(k, env));
            if (acc.empty()) break;
        }
        return acc;
    }
    case Formula::Kind::Or: {
        Dnf acc;
        for (const auto& k : f->kids) {
            Dnf d = ground(k, env);
            if (d.size() == 1 && d[0].empty()) return d;
            acc.insert(acc.end(), d.begin(), d.end());
            if (acc.size() > dnf_limit_) throw ResourceLimit("DNF size limit exceeded");
        }
        minimize_dnf(acc);
        return acc;
    }
    case Formula::Kind::Forall: {
        Dnf acc{Clause{}};
        for (int t : universe_) {
            env.push_back({f->var, t});
            Dnf d = ground(f->kids[0], env);
            env.pop_back();
            acc = product(acc, d);
            if (acc.empty()) break;
        }
        return acc;
    }
    case Formula::Kind::Exists: {
        Dnf acc;
        for (int t : universe_) {
            env.push_back({f->var, t});
            Dnf d = ground(f->kids[0], env);
            env.pop_back();
            if (d.size() == 1 && d[0].empty()) return d;
            acc.insert(acc.end(), d.begin(), d.end());
        }
        minimize_dnf(acc);
        return acc;
    }
    }
    return {};
}

std::vector<Clause> QpaRunner::initial() {
    std::vector<std::pair<int, int>> env;
    return ground(a_.start, env);
}

const Dnf& QpaRunner::ground_delta(Fact f, int letter, int tid) {
    auto key = std::make_tuple(f, letter, tid);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    int q = fact_pred(f);
    auto args = fact_args(f, a_.arity[static_cast<size_t>(q)]);
    std::vector<std::pair<int, int>> env{{0, tid}};
    for (size_t k = 0; k < args.size(); ++k) env.push_back({static_cast<int>(k) + 1, args[k]});
    Dnf d = ground(a_.delta[static_cast<size_t>(q)][static_cast<size_t>(letter)], env);
    return cache_.emplace(key, std::move(d)).first->second;
}

std::vector<Clause> QpaRunner::step(const Clause& facts, int letter, int tid) {
    Dnf acc{Clause{}};
    for (Fact f : facts) {
        acc = product(acc, ground_delta(f, letter, tid));
        if (acc.empty()) break;
    }
    return acc;
}

bool QpaRunner::accepting(const Clause& facts) const {
    for (Fact f : facts)
        if (!a_.accepting[static_cast<size_t>(fact_pred(f))]) return false;
    return true;
}

std::vector<Configuration> min_successors(const Qpa& a, const Configuration& c, int letter, int k) {
    if (!std::binary_search(c.universe.begin(), c.universe.end(), k))
        throw PreconditionError("thread " + std::to_string(k) + " is outside the configuration's universe");
    if (letter < 0 || static_cast<size_t>(letter) >= a.n_letters()) throw PreconditionError("letter out of range");
    QpaRunner r(a, c.universe);
    std::vector<Configuration> out;
    for (auto& cl : r.step(c.facts, letter, k)) out.push_back(Configuration{r.universe(), std::move(cl)});
    return out;
}

// ---------------------------------------------------------------- acceptance

bool accepts_in(const Qpa& a, const QWord& w, const std::vector<int>& universe) {
    QpaRunner r(a, universe);
    for (const auto& l : w)
        if (!std::binary_search(r.universe().begin(), r.universe().end(), l.tid)) return false;
    Dnf frontier = r.initial();
    for (auto it = w.rbegin(); it != w.rend() && !frontier.empty(); ++it) {
        Dnf next;
        for (const auto& c : frontier) {
            auto succ = r.step(c, it->letter, it->tid);
            next.insert(next.end(), succ.begin(), succ.end());
        }
        minimize_dnf(next);
        frontier = std::move(next);
    }
    for (const auto& c : frontier)
        if (r.accepting(c)) return true;
    return false;
}

bool accepts(const Qpa& a, const QWord& w, const AcceptOptions& opts) {
    std::vector<int> ids;
    for (const auto& l : w) {
        if (l.tid < 1) throw PreconditionError("thread ids must be positive");
        ids.push_back(l.tid);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    int top = ids.empty() ? 0 : ids.back();
    for (int j = 0; j <= opts.fresh_cap; ++j) {
        std::vector<int> u = ids;
        for (int k = 1; k <= j; ++k) u.push_back(top + k);
        if (u.empty()) continue;
        if (accepts_in(a, w, u)) return true;
    }
    return false;
}

// ---------------------------------------------------------------- Boolean closure

namespace {

std::string unique_name(const Qpa& target, std::string name) {
    while (target.pred_index(name)) name += "'";
    return name;
}

} // namespace

Qpa compose_boolean(BoolOp op, const Qpa& a, const Qpa* b) {
    if (op == BoolOp::Complement) {
        Qpa out(a.letters);
        for (size_t q = 0; q < a.n_preds(); ++q) {
            const std::string& n = a.preds[q];
            std::string dual = n.size() > 1 && n[0] == '~' ? n.substr(1) : "~" + n;
            out.add_pred(unique_name(out, dual), a.arity[q], !a.accepting[q]);
        }
        for (size_t q = 0; q < a.n_preds(); ++q)
            for (size_t l = 0; l < a.n_letters(); ++l)
                out.set_delta(static_cast<int>(q), static_cast<int>(l), de_morgan(a.delta[q][l]));
        out.start = de_morgan(a.start);
        return out;
    }
    if (!b) throw PreconditionError("binary Boolean operation needs two automata");
    if (a.letters != b->letters) throw PreconditionError("alphabet mismatch");
    Qpa out = a;
    int offset = static_cast<int>(a.n_preds());
    for (size_t q = 0; q < b->n_preds(); ++q) out.add_pred(unique_name(out, b->preds[q]), b->arity[q], b->accepting[q]);
    auto shift = [offset](int q) { return q + offset; };
    for (size_t q = 0; q < b->n_preds(); ++q)
        for (size_t l = 0; l < b->n_letters(); ++l)
            out.set_delta(offset + static_cast<int>(q), static_cast<int>(l), map_preds(b->delta[q][l], shift));
    FormulaPtr bs = map_preds(b->start, shift);
    out.start = op == BoolOp::Intersect ? fm::conj(a.start, bs) : fm::disj(a.start, bs);
    return out;
}

Qpa intersect(const Qpa& a, const Qpa& b) { return compose_boolean(BoolOp::Intersect, a, &b); }
Qpa unite(const Qpa& a, const Qpa& b) { return compose_boolean(BoolOp::Union, a, &b); }
Qpa complement(const Qpa& a) { return compose_boolean(BoolOp::Complement, a); }

FormulaPtr symbolic_post(const Qpa& a, const FormulaPtr& phi, int letter) {
    if (letter < 0 || static_cast<size_t>(letter) >= a.n_letters()) throw PreconditionError("letter out of range");
    int i = fresh_var();
    FormulaPtr body = substitute_preds(phi, [&](int q, const std::vector<int>& args) {
        std::map<int, int> ren{{0, i}};
        for (size_t k = 0; k < args.size(); ++k) ren[static_cast<int>(k) + 1] = args[k];
        return rename_vars(a.delta[static_cast<size_t>(q)][static_cast<size_t>(letter)], ren);
    });
    return fm::exists(i, body);
}

} // namespace wfps
