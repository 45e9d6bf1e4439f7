#include "wfps/qltl.hpp"
#include "wfps/lexer.hpp"

#include <algorithm>
#include <map>

namespace wfps {

namespace ql {

namespace {
QltlPtr make(Qltl q) { return std::make_shared<const Qltl>(std::move(q)); }
} // namespace

QltlPtr tt() { return make({}); }
QltlPtr ff() { return make({Qltl::Kind::False, -1, {}, {}, {}}); }
QltlPtr exec(int letter, std::string var) { return make({Qltl::Kind::Exec, letter, std::move(var), {}, {}}); }
QltlPtr eq(std::string a, std::string b) { return make({Qltl::Kind::Eq, -1, std::move(a), std::move(b), {}}); }
QltlPtr neg(QltlPtr a) { return make({Qltl::Kind::Not, -1, {}, {}, {std::move(a)}}); }
QltlPtr conj(QltlPtr a, QltlPtr b) { return make({Qltl::Kind::And, -1, {}, {}, {std::move(a), std::move(b)}}); }
QltlPtr disj(QltlPtr a, QltlPtr b) { return make({Qltl::Kind::Or, -1, {}, {}, {std::move(a), std::move(b)}}); }
QltlPtr next(QltlPtr a) { return make({Qltl::Kind::Next, -1, {}, {}, {std::move(a)}}); }
QltlPtr until(QltlPtr a, QltlPtr b) { return make({Qltl::Kind::Until, -1, {}, {}, {std::move(a), std::move(b)}}); }
QltlPtr eventually(QltlPtr a) { return until(tt(), std::move(a)); }
QltlPtr always(QltlPtr a) { return neg(eventually(neg(std::move(a)))); }
QltlPtr forall(std::string v, QltlPtr body) { return make({Qltl::Kind::Forall, -1, std::move(v), {}, {std::move(body)}}); }
QltlPtr exists(std::string v, QltlPtr body) { return make({Qltl::Kind::Exists, -1, std::move(v), {}, {std::move(body)}}); }

} // namespace ql

namespace {

std::string strip_ws(std::string_view s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    return out;
}

class PropertyParser {
public:
    PropertyParser(std::string_view text, const std::vector<std::string>& letters) : ts_(text) {
        for (size_t k = 0; k < letters.size(); ++k)
            if (letters[k] != "$") names_[strip_ws(letters[k])] = static_cast<int>(k);
    }

    QltlPtr parse() {
        QltlPtr f = formula();
        if (!ts_.at_end()) ts_.fail("unexpected input after property");
        auto free = qltl_free_vars(f);
        if (!free.empty()) throw ParseError("property has free thread variable '" + *free.begin() + "'", 1, 1);
        return f;
    }

private:
    bool is_keyword_ident(std::string_view s) const {
        return s == "forall" || s == "exists" || s == "exec" || s == "true" || s == "false" || s == "U" ||
               is_prefix_ops(s);
    }
    static bool is_prefix_ops(std::string_view s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c == 'G' || c == 'F' || c == 'X'; });
    }

    QltlPtr formula() {
        if (ts_.is("forall") || ts_.is("exists")) return quantified();
        QltlPtr lhs = disjunction();
        if (ts_.accept("->")) return ql::disj(ql::neg(lhs), formula());
        return lhs;
    }

    QltlPtr quantified() {
        bool all = ts_.next().text == "forall";
        if (temporal_depth_ > 0) ts_.fail("quantifiers may not appear under temporal operators");
        std::string v = ts_.expect_ident();
        if (is_keyword_ident(v)) ts_.fail("reserved word used as thread variable");
        ts_.expect(".");
        QltlPtr body = formula();
        return all ? ql::forall(v, body) : ql::exists(v, body);
    }

    QltlPtr disjunction() {
        QltlPtr f = conjunction();
        while (ts_.accept("|") || ts_.accept("||")) f = ql::disj(f, conjunction());
        return f;
    }

    QltlPtr conjunction() {
        QltlPtr f = until();
        while (ts_.accept("&") || ts_.accept("&&")) f = ql::conj(f, until());
        return f;
    }

    QltlPtr until() {
        size_t before = temporal_depth_;
        QltlPtr f;
        // The left operand of U is under a temporal operator as well.
        size_t mark = ts_.position();
        f = unary();
        if (ts_.peek().kind == Tok::Ident && ts_.peek().text == "U") {
            ts_.rewind(mark);
            ++temporal_depth_;
            f = unary();
            ts_.next();
            QltlPtr rhs = until();
            temporal_depth_ = before;
            return ql::until(f, rhs);
        }
        return f;
    }

    QltlPtr unary() {
        const Token& t = ts_.peek();
        if (ts_.accept("!")) return ql::neg(unary());
        if (t.kind == Tok::Ident && is_prefix_ops(t.text)) {
            std::string ops = ts_.next().text;
            ++temporal_depth_;
            QltlPtr f = unary();
            --temporal_depth_;
            for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
                if (*it == 'G') f = ql::always(f);
                else if (*it == 'F') f = ql::eventually(f);
                else f = ql::next(f);
            }
            return f;
        }
        if (ts_.is("forall") || ts_.is("exists")) return quantified();
        if (ts_.accept("(")) {
            QltlPtr f = formula();
            ts_.expect(")");
            return f;
        }
        if (ts_.accept("true")) return ql::tt();
        if (ts_.accept("false")) return ql::ff();
        if (ts_.accept("exec")) return exec_atom();
        if (t.kind == Tok::Ident && !is_keyword_ident(t.text)) {
            std::string a = ts_.next().text;
            bool negated = false;
            if (ts_.accept("!=")) negated = true;
            else if (!ts_.accept("=") && !ts_.accept("==")) ts_.fail("expected '=' or '!=' after thread variable");
            std::string b = ts_.expect_ident();
            QltlPtr e = ql::eq(a, b);
            return negated ? ql::neg(e) : e;
        }
        ts_.fail("expected a property");
    }

    QltlPtr exec_atom() {
        ts_.expect("[");
        std::string name;
        int depth = 0;
        for (;;) {
            if (ts_.at_end()) ts_.fail("unterminated command name");
            if (ts_.is("]") && depth == 0) break;
            Token t = ts_.next();
            if (t.text == "[") ++depth;
            if (t.text == "]") --depth;
            name += t.text;
        }
        ts_.expect("]");
        int letter = -1;
        if (name != "*") {
            auto it = names_.find(name);
            if (it == names_.end()) ts_.fail("unknown command '" + name + "'");
            letter = it->second;
        }
        ts_.expect("(");
        std::string v = ts_.expect_ident();
        ts_.expect(")");
        return ql::exec(letter, v);
    }

    TokenStream ts_;
    std::map<std::string, int> names_;
    size_t temporal_depth_ = 0;
};

void free_vars_rec(const QltlPtr& f, std::set<std::string>& bound, std::set<std::string>& out) {
    switch (f->kind) {
    case Qltl::Kind::Exec:
        if (!bound.count(f->var)) out.insert(f->var);
        return;
    case Qltl::Kind::Eq:
        if (!bound.count(f->var)) out.insert(f->var);
        if (!bound.count(f->var2)) out.insert(f->var2);
        return;
    case Qltl::Kind::Forall:
    case Qltl::Kind::Exists: {
        bool had = bound.count(f->var) > 0;
        bound.insert(f->var);
        free_vars_rec(f->kids[0], bound, out);
        if (!had) bound.erase(f->var);
        return;
    }
    default:
        for (const auto& k : f->kids) free_vars_rec(k, bound, out);
    }
}

// Position graph of tau rho^omega: position p is followed by p+1, and the
// last position loops back to |tau|.
struct PeriodicWord {
    std::vector<IndexedCommand> letters;
    size_t loop_start = 0;
    size_t next(size_t p) const { return p + 1 < letters.size() ? p + 1 : loop_start; }
    size_t size() const { return letters.size(); }

    explicit PeriodicWord(const Lasso& l) : loop_start(l.stem.size()) {
        letters = l.stem;
        letters.insert(letters.end(), l.loop.begin(), l.loop.end());
    }

    std::vector<bool> next_of(const std::vector<bool>& s) const {
        std::vector<bool> out(size());
        for (size_t p = 0; p < size(); ++p) out[p] = s[next(p)];
        return out;
    }
    std::vector<bool> until_of(const std::vector<bool>& a, const std::vector<bool>& b) const {
        std::vector<bool> s = b;
        for (bool changed = true; changed;) {
            changed = false;
            for (size_t p = 0; p < size(); ++p)
                if (!s[p] && a[p] && s[next(p)]) s[p] = changed = true;
        }
        return s;
    }
};

std::vector<bool> eval_qltl(const PeriodicWord& w, const QltlPtr& f, std::map<std::string, int>& env, int n) {
    size_t len = w.size();
    auto lookup = [&](const std::string& v) {
        auto it = env.find(v);
        if (it == env.end()) throw PreconditionError("free thread variable '" + v + "'");
        return it->second;
    };
    switch (f->kind) {
    case Qltl::Kind::True: return std::vector<bool>(len, true);
    case Qltl::Kind::False: return std::vector<bool>(len, false);
    case Qltl::Kind::Exec: {
        int t = lookup(f->var);
        std::vector<bool> s(len);
        for (size_t p = 0; p < len; ++p)
            s[p] = w.letters[p].thread == t && (f->letter < 0 || w.letters[p].cmd == f->letter);
        return s;
    }
    case Qltl::Kind::Eq: return std::vector<bool>(len, lookup(f->var) == lookup(f->var2));
    case Qltl::Kind::Not: {
        auto s = eval_qltl(w, f->kids[0], env, n);
        s.flip();
        return s;
    }
    case Qltl::Kind::And:
    case Qltl::Kind::Or: {
        auto a = eval_qltl(w, f->kids[0], env, n);
        auto b = eval_qltl(w, f->kids[1], env, n);
        for (size_t p = 0; p < len; ++p) a[p] = f->kind == Qltl::Kind::And ? (a[p] && b[p]) : (a[p] || b[p]);
        return a;
    }
    case Qltl::Kind::Next: return w.next_of(eval_qltl(w, f->kids[0], env, n));
    case Qltl::Kind::Until: return w.until_of(eval_qltl(w, f->kids[0], env, n), eval_qltl(w, f->kids[1], env, n));
    case Qltl::Kind::Forall:
    case Qltl::Kind::Exists: {
        bool all = f->kind == Qltl::Kind::Forall;
        std::optional<int> saved;
        if (auto it = env.find(f->var); it != env.end()) saved = it->second;
        std::vector<bool> acc(len, all);
        for (int t = 1; t <= n; ++t) {
            env[f->var] = t;
            auto s = eval_qltl(w, f->kids[0], env, n);
            for (size_t p = 0; p < len; ++p) acc[p] = all ? (acc[p] && s[p]) : (acc[p] || s[p]);
        }
        if (saved) env[f->var] = *saved;
        else env.erase(f->var);
        return acc;
    }
    }
    return {};
}

std::string print(const QltlPtr& f, const std::vector<std::string>& letters) {
    switch (f->kind) {
    case Qltl::Kind::True: return "true";
    case Qltl::Kind::False: return "false";
    case Qltl::Kind::Exec:
        return "exec[" + (f->letter < 0 ? std::string("*") : letters.at(static_cast<size_t>(f->letter))) + "](" + f->var +
               ")";
    case Qltl::Kind::Eq: return f->var + " = " + f->var2;
    case Qltl::Kind::Not: return "!" + print(f->kids[0], letters);
    case Qltl::Kind::And: return "(" + print(f->kids[0], letters) + " & " + print(f->kids[1], letters) + ")";
    case Qltl::Kind::Or: return "(" + print(f->kids[0], letters) + " | " + print(f->kids[1], letters) + ")";
    case Qltl::Kind::Next: return "X " + print(f->kids[0], letters);
    case Qltl::Kind::Until:
        if (f->kids[0]->kind == Qltl::Kind::True) return "F " + print(f->kids[1], letters);
        return "(" + print(f->kids[0], letters) + " U " + print(f->kids[1], letters) + ")";
    case Qltl::Kind::Forall: return "(forall " + f->var + ". " + print(f->kids[0], letters) + ")";
    case Qltl::Kind::Exists: return "(exists " + f->var + ". " + print(f->kids[0], letters) + ")";
    }
    return "";
}

} // namespace

QltlPtr parse_qltl(std::string_view text, const std::vector<std::string>& letters) {
    return PropertyParser(text, letters).parse();
}

std::string qltl_str(const QltlPtr& f, const std::vector<std::string>& letters) { return print(f, letters); }

std::set<std::string> qltl_free_vars(const QltlPtr& f) {
    std::set<std::string> bound, out;
    free_vars_rec(f, bound, out);
    return out;
}

bool has_temporal(const QltlPtr& f) {
    if (f->kind == Qltl::Kind::Next || f->kind == Qltl::Kind::Until) return true;
    return std::any_of(f->kids.begin(), f->kids.end(), has_temporal);
}

bool has_quantifier(const QltlPtr& f) {
    if (f->kind == Qltl::Kind::Forall || f->kind == Qltl::Kind::Exists) return true;
    return std::any_of(f->kids.begin(), f->kids.end(), has_quantifier);
}

bool lasso_satisfies(const Lasso& l, const QltlPtr& f, int n_threads) {
    if (l.loop.empty()) throw PreconditionError("lasso loop must be nonempty");
    if (!qltl_free_vars(f).empty()) throw PreconditionError("property must be a sentence");
    for (int t : l.threads())
        if (t > n_threads) throw PreconditionError("lasso mentions thread " + std::to_string(t) + " beyond N");
    PeriodicWord w(l);
    std::map<std::string, int> env;
    return eval_qltl(w, f, env, n_threads)[0];
}

// ------------------------------------------------------------ normal form

namespace {

LtlPtr mk(Ltl l) { return std::make_shared<const Ltl>(std::move(l)); }
LtlPtr ltl_const(bool b) { return mk({b ? Ltl::Kind::True : Ltl::Kind::False, -1, 0, {}}); }

LtlPtr ltl_not(LtlPtr a) {
    if (a->kind == Ltl::Kind::True) return ltl_const(false);
    if (a->kind == Ltl::Kind::False) return ltl_const(true);
    if (a->kind == Ltl::Kind::Not) return a->kids[0];
    return mk({Ltl::Kind::Not, -1, 0, {std::move(a)}});
}

LtlPtr ltl_bin(Ltl::Kind k, LtlPtr a, LtlPtr b) {
    bool is_and = k == Ltl::Kind::And;
    if (k == Ltl::Kind::And || k == Ltl::Kind::Or) {
        auto absorbing = is_and ? Ltl::Kind::False : Ltl::Kind::True;
        auto neutral = is_and ? Ltl::Kind::True : Ltl::Kind::False;
        if (a->kind == absorbing || b->kind == absorbing) return ltl_const(!is_and);
        if (a->kind == neutral) return b;
        if (b->kind == neutral) return a;
    }
    if (k == Ltl::Kind::Until && (b->kind == Ltl::Kind::True || b->kind == Ltl::Kind::False)) return b;
    return mk({k, -1, 0, {std::move(a), std::move(b)}});
}

LtlPtr ltl_next(LtlPtr a) {
    if (a->kind == Ltl::Kind::True || a->kind == Ltl::Kind::False) return a;
    return mk({Ltl::Kind::Next, -1, 0, {std::move(a)}});
}

// Quantifier-free formula to LTL over representatives (class = rep id).
LtlPtr to_ltl(const QltlPtr& f, const std::map<std::string, int>& env) {
    switch (f->kind) {
    case Qltl::Kind::True: return ltl_const(true);
    case Qltl::Kind::False: return ltl_const(false);
    case Qltl::Kind::Exec: return mk({Ltl::Kind::Atom, f->letter, env.at(f->var), {}});
    case Qltl::Kind::Eq: return ltl_const(env.at(f->var) == env.at(f->var2));
    case Qltl::Kind::Not: return ltl_not(to_ltl(f->kids[0], env));
    case Qltl::Kind::And: return ltl_bin(Ltl::Kind::And, to_ltl(f->kids[0], env), to_ltl(f->kids[1], env));
    case Qltl::Kind::Or: return ltl_bin(Ltl::Kind::Or, to_ltl(f->kids[0], env), to_ltl(f->kids[1], env));
    case Qltl::Kind::Next: return ltl_next(to_ltl(f->kids[0], env));
    case Qltl::Kind::Until: return ltl_bin(Ltl::Kind::Until, to_ltl(f->kids[0], env), to_ltl(f->kids[1], env));
    default: throw PreconditionError("quantifier under a temporal operator");
    }
}

void collect_classes(const LtlPtr& f, std::set<int>& out) {
    if (f->kind == Ltl::Kind::Atom) out.insert(f->cls);
    for (const auto& k : f->kids) collect_classes(k, out);
}

LtlPtr rename_classes(const LtlPtr& f, const std::map<int, int>& ren) {
    if (f->kind == Ltl::Kind::Atom) return mk({Ltl::Kind::Atom, f->letter, ren.at(f->cls), {}});
    if (f->kids.empty()) return f;
    Ltl copy = *f;
    for (auto& k : copy.kids) k = rename_classes(k, ren);
    return mk(std::move(copy));
}

QuantTree const_leaf(bool b) {
    QuantTree t;
    t.matrix = ltl_const(b);
    return t;
}

bool is_const(const QuantTree& t, bool b) {
    return t.kind == QuantTree::Kind::Leaf && t.matrix->kind == (b ? Ltl::Kind::True : Ltl::Kind::False);
}

QuantTree combine(QuantTree::Kind k, std::vector<QuantTree> kids) {
    bool is_and = k == QuantTree::Kind::And;
    std::vector<QuantTree> keep;
    for (auto& c : kids) {
        if (is_const(c, !is_and)) return const_leaf(!is_and);
        if (is_const(c, is_and)) continue;
        if (c.kind == k) {
            for (auto& g : c.kids) keep.push_back(std::move(g));
        } else {
            keep.push_back(std::move(c));
        }
    }
    if (keep.empty()) return const_leaf(is_and);
    if (keep.size() == 1) return std::move(keep[0]);
    QuantTree t;
    t.kind = k;
    t.kids = std::move(keep);
    return t;
}

QuantTree expand(const QltlPtr& f, bool positive, std::map<std::string, int>& env, int depth) {
    if (!has_quantifier(f)) {
        LtlPtr m = to_ltl(f, env);
        if (!positive) m = ltl_not(m);
        std::set<int> used;
        collect_classes(m, used);
        std::map<int, int> ren;
        QuantTree t;
        for (int r : used) {
            ren[r] = static_cast<int>(ren.size()) + 1;
            t.reps.push_back(r);
        }
        t.matrix = rename_classes(m, ren);
        return t;
    }
    switch (f->kind) {
    case Qltl::Kind::Not: return expand(f->kids[0], !positive, env, depth);
    case Qltl::Kind::And:
    case Qltl::Kind::Or: {
        bool is_and = (f->kind == Qltl::Kind::And) == positive;
        std::vector<QuantTree> kids;
        for (const auto& k : f->kids) kids.push_back(expand(k, positive, env, depth));
        return combine(is_and ? QuantTree::Kind::And : QuantTree::Kind::Or, std::move(kids));
    }
    case Qltl::Kind::Forall:
    case Qltl::Kind::Exists: {
        bool all = (f->kind == Qltl::Kind::Forall) == positive;
        std::optional<int> saved;
        if (auto it = env.find(f->var); it != env.end()) saved = it->second;
        std::vector<QuantTree> cases;
        for (int r = 1; r <= depth; ++r) {
            env[f->var] = r;
            cases.push_back(expand(f->kids[0], positive, env, depth));
        }
        env[f->var] = depth + 1;
        QuantTree body = expand(f->kids[0], positive, env, depth + 1);
        if (saved) env[f->var] = *saved;
        else env.erase(f->var);
        // A body independent of the new representative needs no quantifier
        // only when the domain is known to be nonempty, which it is not here.
        QuantTree q;
        q.kind = all ? QuantTree::Kind::Forall : QuantTree::Kind::Exists;
        q.rep = depth + 1;
        q.kids.push_back(std::move(body));
        if (is_const(q.kids[0], true) && all) q = const_leaf(true);
        else if (is_const(q.kids[0], false) && !all) q = const_leaf(false);
        cases.push_back(std::move(q));
        return combine(all ? QuantTree::Kind::And : QuantTree::Kind::Or, std::move(cases));
    }
    default: throw PreconditionError("quantifier under a temporal operator");
    }
}

void split_disjuncts(QuantTree t, std::vector<QuantTree>& out) {
    if (t.kind == QuantTree::Kind::Or) {
        for (auto& k : t.kids) split_disjuncts(std::move(k), out);
        return;
    }
    if (t.kind == QuantTree::Kind::Exists && t.kids[0].kind == QuantTree::Kind::Or) {
        std::vector<QuantTree> inner;
        split_disjuncts(std::move(t.kids[0]), inner);
        for (auto& k : inner) {
            QuantTree q;
            q.kind = QuantTree::Kind::Exists;
            q.rep = t.rep;
            q.kids.push_back(std::move(k));
            out.push_back(std::move(q));
        }
        return;
    }
    out.push_back(std::move(t));
}

std::vector<bool> eval_ltl(const PeriodicWord& w, const LtlPtr& f, const std::vector<int>& threads) {
    size_t len = w.size();
    switch (f->kind) {
    case Ltl::Kind::True: return std::vector<bool>(len, true);
    case Ltl::Kind::False: return std::vector<bool>(len, false);
    case Ltl::Kind::Atom: {
        std::vector<bool> s(len);
        int t = threads.at(static_cast<size_t>(f->cls - 1));
        for (size_t p = 0; p < len; ++p)
            s[p] = w.letters[p].thread == t && (f->letter < 0 || w.letters[p].cmd == f->letter);
        return s;
    }
    case Ltl::Kind::Not: {
        auto s = eval_ltl(w, f->kids[0], threads);
        s.flip();
        return s;
    }
    case Ltl::Kind::And:
    case Ltl::Kind::Or: {
        auto a = eval_ltl(w, f->kids[0], threads);
        auto b = eval_ltl(w, f->kids[1], threads);
        for (size_t p = 0; p < len; ++p) a[p] = f->kind == Ltl::Kind::And ? (a[p] && b[p]) : (a[p] || b[p]);
        return a;
    }
    case Ltl::Kind::Next: return w.next_of(eval_ltl(w, f->kids[0], threads));
    case Ltl::Kind::Until: return w.until_of(eval_ltl(w, f->kids[0], threads), eval_ltl(w, f->kids[1], threads));
    }
    return {};
}

bool tree_eval(const PeriodicWord& w, const QuantTree& t, std::map<int, int>& env, int n) {
    switch (t.kind) {
    case QuantTree::Kind::Leaf: {
        std::vector<int> threads;
        for (int r : t.reps) threads.push_back(env.at(r));
        return eval_ltl(w, t.matrix, threads)[0];
    }
    case QuantTree::Kind::And:
        return std::all_of(t.kids.begin(), t.kids.end(), [&](const QuantTree& k) { return tree_eval(w, k, env, n); });
    case QuantTree::Kind::Or:
        return std::any_of(t.kids.begin(), t.kids.end(), [&](const QuantTree& k) { return tree_eval(w, k, env, n); });
    case QuantTree::Kind::Forall:
    case QuantTree::Kind::Exists: {
        bool all = t.kind == QuantTree::Kind::Forall;
        for (int th = 1; th <= n; ++th) {
            bool taken = false;
            for (const auto& [r, v] : env)
                if (r < t.rep && v == th) taken = true;
            if (taken) continue;
            env[t.rep] = th;
            bool v = tree_eval(w, t.kids[0], env, n);
            env.erase(t.rep);
            if (v != all) return v;
        }
        return all;
    }
    }
    return false;
}

} // namespace

std::string ltl_str(const LtlPtr& f) {
    switch (f->kind) {
    case Ltl::Kind::True: return "true";
    case Ltl::Kind::False: return "false";
    case Ltl::Kind::Atom: return "a" + (f->letter < 0 ? std::string("*") : std::to_string(f->letter)) + ":" + std::to_string(f->cls);
    case Ltl::Kind::Not: return "!" + ltl_str(f->kids[0]);
    case Ltl::Kind::And: return "(" + ltl_str(f->kids[0]) + " & " + ltl_str(f->kids[1]) + ")";
    case Ltl::Kind::Or: return "(" + ltl_str(f->kids[0]) + " | " + ltl_str(f->kids[1]) + ")";
    case Ltl::Kind::Next: return "X " + ltl_str(f->kids[0]);
    case Ltl::Kind::Until: return "(" + ltl_str(f->kids[0]) + " U " + ltl_str(f->kids[1]) + ")";
    }
    return "";
}

std::vector<QuantTree> normalize_to_prenex_disjuncts(const QltlPtr& f) {
    if (!qltl_free_vars(f).empty()) throw PreconditionError("property must be a sentence");
    std::map<std::string, int> env;
    std::vector<QuantTree> out;
    split_disjuncts(expand(f, true, env, 0), out);
    return out;
}

bool tree_satisfies(const Lasso& l, const QuantTree& t, int n_threads) {
    if (l.loop.empty()) throw PreconditionError("lasso loop must be nonempty");
    PeriodicWord w(l);
    std::map<int, int> env;
    return tree_eval(w, t, env, n_threads);
}

std::string tree_str(const QuantTree& t) {
    switch (t.kind) {
    case QuantTree::Kind::Leaf: {
        std::string s = "[" + ltl_str(t.matrix) + "](";
        for (size_t k = 0; k < t.reps.size(); ++k) s += (k ? "," : "") + std::string("r") + std::to_string(t.reps[k]);
        return s + ")";
    }
    case QuantTree::Kind::And:
    case QuantTree::Kind::Or: {
        std::string s = "(";
        for (size_t k = 0; k < t.kids.size(); ++k)
            s += (k ? (t.kind == QuantTree::Kind::And ? " & " : " | ") : "") + tree_str(t.kids[k]);
        return s + ")";
    }
    case QuantTree::Kind::Forall:
    case QuantTree::Kind::Exists:
        return std::string(t.kind == QuantTree::Kind::Forall ? "forall" : "exists") + " r" + std::to_string(t.rep) +
               "*. " + tree_str(t.kids[0]);
    }
    return "";
}

} // namespace wfps
