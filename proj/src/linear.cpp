#include "wfps/linear.hpp"

#include "wfps/error.hpp"
#include "wfps/lexer.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace wfps {

int64_t checked_add(int64_t a, int64_t b) {
    int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw Error("integer overflow in linear arithmetic");
    return r;
}

int64_t checked_mul(int64_t a, int64_t b) {
    int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw Error("integer overflow in linear arithmetic");
    return r;
}

namespace {

int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

int64_t ceil_div(int64_t a, int64_t b) { return -floor_div(-a, b); }

} // namespace

Var Var::old() const {
    if (kind == VarKind::Global) return {VarKind::OldGlobal, name, index};
    if (kind == VarKind::Local) return {VarKind::OldLocal, name, index};
    return *this;
}

Var Var::current() const {
    if (kind == VarKind::OldGlobal) return {VarKind::Global, name, index};
    if (kind == VarKind::OldLocal) return {VarKind::Local, name, index};
    return *this;
}

std::string Var::str() const {
    std::string base = name;
    if (is_local() && index != 0) base += "(" + std::to_string(index) + ")";
    return is_old() ? "old(" + base + ")" : base;
}

LinTerm LinTerm::var(const Var& v, int64_t c) {
    LinTerm t;
    if (c != 0) t.coeffs.push_back({v, c});
    return t;
}

int64_t LinTerm::coeff(const Var& v) const {
    auto it = std::lower_bound(coeffs.begin(), coeffs.end(), v,
                               [](const auto& p, const Var& x) { return p.first < x; });
    return (it != coeffs.end() && it->first == v) ? it->second : 0;
}

std::set<Var> LinTerm::vars() const {
    std::set<Var> out;
    for (const auto& [v, c] : coeffs) out.insert(v);
    return out;
}

LinTerm LinTerm::operator+(const LinTerm& o) const {
    LinTerm r;
    r.constant = checked_add(constant, o.constant);
    size_t i = 0, j = 0;
    while (i < coeffs.size() || j < o.coeffs.size()) {
        if (j == o.coeffs.size() || (i < coeffs.size() && coeffs[i].first < o.coeffs[j].first)) {
            r.coeffs.push_back(coeffs[i++]);
        } else if (i == coeffs.size() || o.coeffs[j].first < coeffs[i].first) {
            r.coeffs.push_back(o.coeffs[j++]);
        } else {
            int64_t c = checked_add(coeffs[i].second, o.coeffs[j].second);
            if (c != 0) r.coeffs.push_back({coeffs[i].first, c});
            ++i;
            ++j;
        }
    }
    return r;
}

LinTerm LinTerm::operator-(const LinTerm& o) const { return *this + (o * -1); }

LinTerm LinTerm::operator*(int64_t k) const {
    LinTerm r;
    if (k == 0) return r;
    r.constant = checked_mul(constant, k);
    r.coeffs.reserve(coeffs.size());
    for (const auto& [v, c] : coeffs) r.coeffs.push_back({v, checked_mul(c, k)});
    return r;
}

LinTerm LinTerm::substitute(const Var& v, const LinTerm& by) const {
    int64_t c = coeff(v);
    if (c == 0) return *this;
    LinTerm rest = *this - LinTerm::var(v, c);
    return rest + by * c;
}

LinTerm LinTerm::substitute(const std::map<Var, LinTerm>& sub) const {
    LinTerm r(constant);
    for (const auto& [v, c] : coeffs) {
        auto it = sub.find(v);
        r = r + (it == sub.end() ? LinTerm::var(v, c) : it->second * c);
    }
    return r;
}

LinTerm LinTerm::map_vars(const std::function<Var(const Var&)>& f) const {
    LinTerm r(constant);
    for (const auto& [v, c] : coeffs) r = r + LinTerm::var(f(v), c);
    return r;
}

int64_t LinTerm::eval(const std::function<int64_t(const Var&)>& lookup) const {
    int64_t r = constant;
    for (const auto& [v, c] : coeffs) r = checked_add(r, checked_mul(c, lookup(v)));
    return r;
}

namespace {

// Renders a sum of (var, positive-or-negative coeff) followed by a constant.
std::string render_sum(const std::vector<std::pair<Var, int64_t>>& terms, int64_t constant) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [v, c] : terms) {
        int64_t mag = c < 0 ? -c : c;
        if (first) {
            if (c < 0) os << "-";
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        if (mag != 1) os << mag << "*";
        os << v.str();
        first = false;
    }
    if (first) {
        os << constant;
    } else if (constant != 0) {
        os << (constant < 0 ? " - " : " + ") << (constant < 0 ? -constant : constant);
    }
    return os.str();
}

} // namespace

std::string LinTerm::str() const { return render_sum(coeffs, constant); }

std::optional<Cmp> parse_cmp(std::string_view op) {
    if (op == "<") return Cmp::Lt;
    if (op == "<=") return Cmp::Le;
    if (op == "=" || op == "==") return Cmp::Eq;
    if (op == "!=") return Cmp::Ne;
    if (op == ">") return Cmp::Gt;
    if (op == ">=") return Cmp::Ge;
    return std::nullopt;
}

std::string_view cmp_text(Cmp c) {
    switch (c) {
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Eq: return "=";
    case Cmp::Ne: return "!=";
    case Cmp::Gt: return ">";
    case Cmp::Ge: return ">=";
    }
    return "?";
}

Cmp negate_cmp(Cmp c) {
    switch (c) {
    case Cmp::Lt: return Cmp::Ge;
    case Cmp::Le: return Cmp::Gt;
    case Cmp::Eq: return Cmp::Ne;
    case Cmp::Ne: return Cmp::Eq;
    case Cmp::Gt: return Cmp::Le;
    case Cmp::Ge: return Cmp::Lt;
    }
    return c;
}

namespace {

Atom normalize(Atom::Rel rel, LinTerm t) {
    if (t.coeffs.empty()) {
        bool ok = rel == Atom::Rel::Le ? t.constant <= 0
                  : rel == Atom::Rel::Eq ? t.constant == 0
                                         : t.constant != 0;
        return ok ? Atom::truth() : Atom::falsity();
    }
    int64_t g = 0;
    for (const auto& [v, c] : t.coeffs) g = std::gcd(g, c < 0 ? -c : c);
    Atom a;
    a.rel = rel;
    if (rel == Atom::Rel::Le) {
        for (auto& [v, c] : t.coeffs) c /= g;
        t.constant = ceil_div(t.constant, g);
    } else {
        if (t.constant % g != 0) return rel == Atom::Rel::Eq ? Atom::falsity() : Atom::truth();
        for (auto& [v, c] : t.coeffs) c /= g;
        t.constant /= g;
        if (t.coeffs.front().second < 0) t = t * -1;
    }
    a.term = std::move(t);
    return a;
}

} // namespace

Atom Atom::make(const LinTerm& lhs, Cmp op, const LinTerm& rhs) {
    switch (op) {
    case Cmp::Lt: return normalize(Rel::Le, lhs - rhs + LinTerm(1));
    case Cmp::Le: return normalize(Rel::Le, lhs - rhs);
    case Cmp::Gt: return normalize(Rel::Le, rhs - lhs + LinTerm(1));
    case Cmp::Ge: return normalize(Rel::Le, rhs - lhs);
    case Cmp::Eq: return normalize(Rel::Eq, lhs - rhs);
    case Cmp::Ne: return normalize(Rel::Ne, lhs - rhs);
    }
    throw Error("bad comparison");
}

Atom Atom::truth() {
    Atom a;
    a.rel = Rel::Le;
    a.term = LinTerm(0);
    return a;
}

Atom Atom::falsity() {
    Atom a;
    a.rel = Rel::Le;
    a.term = LinTerm(1);
    return a;
}

bool Atom::is_true() const { return *this == truth(); }
bool Atom::is_false() const { return *this == falsity(); }

std::set<int> Atom::indices() const {
    std::set<int> out;
    for (const auto& [v, c] : term.coeffs)
        if (v.is_local()) out.insert(v.index);
    return out;
}

bool Atom::mentions_old() const {
    return std::any_of(term.coeffs.begin(), term.coeffs.end(), [](const auto& p) { return p.first.is_old(); });
}

Atom Atom::map_vars(const std::function<Var(const Var&)>& f) const {
    return normalize(rel, term.map_vars(f));
}

std::vector<Atom> Atom::negation() const {
    switch (rel) {
    case Rel::Le: return {Atom::make(term, Cmp::Gt, LinTerm(0))};
    case Rel::Eq: return {Atom::make(term, Cmp::Lt, LinTerm(0)), Atom::make(term, Cmp::Gt, LinTerm(0))};
    case Rel::Ne: return {Atom::make(term, Cmp::Eq, LinTerm(0))};
    }
    return {};
}

bool Atom::holds(const std::function<int64_t(const Var&)>& lookup) const {
    int64_t v = term.eval(lookup);
    switch (rel) {
    case Rel::Le: return v <= 0;
    case Rel::Eq: return v == 0;
    case Rel::Ne: return v != 0;
    }
    return false;
}

std::string Atom::str() const {
    if (is_true()) return "true";
    if (is_false()) return "false";
    std::vector<std::pair<Var, int64_t>> pos, neg;
    for (const auto& [v, c] : term.coeffs) (c > 0 ? pos : neg).push_back({v, c > 0 ? c : -c});
    int64_t c = term.constant;
    if (rel == Rel::Le) {
        // pos - neg + c <= 0
        if (neg.empty()) return render_sum(pos, 0) + " <= " + std::to_string(-c);
        if (pos.empty()) {
            if (c > 0) return render_sum(neg, 0) + " > " + std::to_string(c - 1);
            return render_sum(neg, 0) + " >= " + std::to_string(c);
        }
        if (c > 0) return render_sum(neg, 0) + " > " + render_sum(pos, c - 1);
        return render_sum(neg, 0) + " >= " + render_sum(pos, c);
    }
    std::string op = rel == Rel::Eq ? " = " : " != ";
    if (neg.empty()) return render_sum(pos, 0) + op + std::to_string(-c);
    return render_sum(neg, 0) + op + render_sum(pos, c);
}

Assertion::Assertion(std::initializer_list<Atom> as) {
    for (const auto& a : as) add(a);
}

Assertion::Assertion(const std::vector<Atom>& as) {
    for (const auto& a : as) add(a);
}

void Assertion::add(const Atom& a) {
    if (a.is_true() || is_false()) return;
    if (a.is_false()) {
        atoms.clear();
        atoms.insert(a);
        return;
    }
    atoms.insert(a);
}

void Assertion::add_all(const Assertion& o) {
    for (const auto& a : o.atoms) add(a);
}

bool Assertion::is_false() const { return atoms.size() == 1 && atoms.begin()->is_false(); }

std::set<Var> Assertion::vars() const {
    std::set<Var> out;
    for (const auto& a : atoms)
        for (const auto& [v, c] : a.term.coeffs) out.insert(v);
    return out;
}

std::set<int> Assertion::indices() const {
    std::set<int> out;
    for (const auto& a : atoms) {
        auto s = a.indices();
        out.insert(s.begin(), s.end());
    }
    return out;
}

bool Assertion::holds(const std::function<int64_t(const Var&)>& lookup) const {
    return std::all_of(atoms.begin(), atoms.end(), [&](const Atom& a) { return a.holds(lookup); });
}

std::string Assertion::str() const {
    if (atoms.empty()) return "true";
    std::string out;
    for (const auto& a : atoms) {
        if (!out.empty()) out += "; ";
        out += a.str();
    }
    return out;
}

namespace {

int permute_index(int i, const Permutation& pi) {
    auto it = pi.find(i);
    return it == pi.end() ? i : it->second;
}

void check_injective(const Permutation& pi) {
    std::set<int> seen;
    for (const auto& [k, v] : pi) {
        if (!seen.insert(v).second) throw PreconditionError("permutation is not injective");
    }
}

Var permute_var(const Var& v, const Permutation& pi) {
    return v.is_local() ? v.with_index(permute_index(v.index, pi)) : v;
}

} // namespace

LinTerm apply_permutation(const LinTerm& t, const Permutation& pi) {
    return t.map_vars([&](const Var& v) { return permute_var(v, pi); });
}

Atom apply_permutation(const Atom& a, const Permutation& pi) {
    check_injective(pi);
    return a.map_vars([&](const Var& v) { return permute_var(v, pi); });
}

Assertion apply_permutation(const Assertion& phi, const Permutation& pi) {
    check_injective(pi);
    std::set<int> idx = phi.indices();
    std::set<int> images;
    for (int i : idx) {
        if (!images.insert(permute_index(i, pi)).second)
            throw PreconditionError("permutation is not injective on the assertion's indices");
    }
    Assertion out;
    for (const auto& a : phi.atoms) out.add(a.map_vars([&](const Var& v) { return permute_var(v, pi); }));
    return out;
}

RankingFormula apply_permutation(const RankingFormula& w, const Permutation& pi) {
    check_injective(pi);
    return {apply_permutation(w.term, pi), w.bound};
}

namespace {

constexpr size_t kExhaustiveCanonLimit = 6;

std::vector<Atom> renamed_sorted(const Assertion& phi, const std::map<int, int>& ren) {
    std::vector<Atom> out;
    out.reserve(phi.atoms.size());
    for (const auto& a : phi.atoms) out.push_back(apply_permutation(a, ren));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> tuple_of(const std::vector<int>& originals, const std::vector<int>& perm) {
    // perm[p] = canonical index (1-based) assigned to originals[p]
    std::vector<int> tuple(originals.size());
    for (size_t p = 0; p < originals.size(); ++p) tuple[perm[p] - 1] = originals[p];
    return tuple;
}

struct CanonResult {
    std::vector<Atom> best;
    std::vector<std::vector<int>> tuples;
};

CanonResult canon_search(const Assertion& phi) {
    std::set<int> idx = phi.indices();
    std::vector<int> originals(idx.begin(), idx.end());
    CanonResult res;
    if (originals.size() > kExhaustiveCanonLimit) {
        // First-occurrence renaming over the atom order.
        std::map<int, int> ren;
        int next = 1;
        for (const auto& a : phi.atoms)
            for (const auto& [v, c] : a.term.coeffs)
                if (v.is_local() && !ren.count(v.index)) ren[v.index] = next++;
        res.best = renamed_sorted(phi, ren);
        std::vector<int> tuple(ren.size());
        for (const auto& [o, n] : ren) tuple[n - 1] = o;
        res.tuples.push_back(tuple);
        return res;
    }
    std::vector<int> perm(originals.size());
    std::iota(perm.begin(), perm.end(), 1);
    bool have = false;
    do {
        std::map<int, int> ren;
        for (size_t p = 0; p < originals.size(); ++p) ren[originals[p]] = perm[p];
        auto cand = renamed_sorted(phi, ren);
        if (!have || res.best < cand) {
            res.best = std::move(cand);
            res.tuples.clear();
            res.tuples.push_back(tuple_of(originals, perm));
            have = true;
        } else if (cand == res.best) {
            res.tuples.push_back(tuple_of(originals, perm));
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return res;
}

} // namespace

std::pair<CanonicalAssertion, std::vector<int>> canonicalize(const Assertion& phi) {
    CanonResult r = canon_search(phi);
    CanonicalAssertion c{Assertion(r.best), static_cast<int>(r.tuples.front().size())};
    return {c, r.tuples.front()};
}

std::vector<std::vector<int>> canonical_tuples(const Assertion& phi) { return canon_search(phi).tuples; }

Assertion instantiate(const CanonicalAssertion& c, const std::vector<int>& tuple) {
    if (static_cast<int>(tuple.size()) != c.arity) throw PreconditionError("tuple arity mismatch");
    Permutation ren;
    for (int j = 0; j < c.arity; ++j) ren[j + 1] = tuple[j];
    Assertion out;
    for (const auto& a : c.name.atoms)
        out.add(a.map_vars([&](const Var& v) { return v.is_local() ? v.with_index(ren.at(v.index)) : v; }));
    return out;
}

bool comb_entails(const Assertion& phi, const Assertion& psi) {
    return std::includes(phi.atoms.begin(), phi.atoms.end(), psi.atoms.begin(), psi.atoms.end());
}

Assertion RankingFormula::as_assertion() const {
    LinTerm old_t = term.map_vars([](const Var& v) { return v.old(); });
    return Assertion{Atom::make(old_t, Cmp::Gt, term), Atom::make(old_t, Cmp::Ge, LinTerm(bound))};
}

bool RankingFormula::relates(const std::function<int64_t(const Var&)>& old_lookup,
                             const std::function<int64_t(const Var&)>& lookup) const {
    int64_t before = term.eval(old_lookup);
    int64_t after = term.eval(lookup);
    return before > after && before >= bound;
}

std::string RankingFormula::str() const { return term.str() + " >= " + std::to_string(bound); }

// ---------------------------------------------------------------- parsing

namespace {

struct TermParser {
    TokenStream& ts;
    const VarResolver& resolve;

    LinTerm sum() {
        LinTerm t = product();
        for (;;) {
            if (ts.accept("+")) {
                t = t + product();
            } else if (ts.is("-") ) {
                ts.next();
                t = t - product();
            } else {
                return t;
            }
        }
    }

    LinTerm product() {
        LinTerm t = unary();
        while (ts.accept("*")) {
            LinTerm r = unary();
            if (t.is_constant()) {
                t = r * t.constant;
            } else if (r.is_constant()) {
                t = t * r.constant;
            } else {
                ts.fail("non-linear expression");
            }
        }
        return t;
    }

    LinTerm unary() {
        if (ts.accept("-")) return -unary();
        if (ts.accept("+")) return unary();
        return primary();
    }

    LinTerm primary() {
        const Token& t = ts.peek();
        if (t.kind == Tok::Int) return LinTerm(ts.expect_int());
        if (ts.accept("(")) {
            LinTerm r = sum();
            ts.expect(")");
            return r;
        }
        if (t.kind == Tok::Ident) {
            std::string name = ts.next().text;
            return LinTerm::var(resolve(ts, name));
        }
        ts.fail("expected linear term");
    }
};

} // namespace

LinTerm parse_term_with(TokenStream& ts, const VarResolver& resolve) {
    TermParser p{ts, resolve};
    return p.sum();
}

std::optional<Cmp> accept_cmp(TokenStream& ts) {
    const Token& t = ts.peek();
    if (t.kind != Tok::Sym) return std::nullopt;
    auto c = parse_cmp(t.text);
    if (c) ts.next();
    return c;
}

Var resolve_assertion_var(TokenStream& ts, const std::string& name) {
    if (name == "old") {
        ts.expect("(");
        std::string inner = ts.expect_ident();
        Var v = resolve_assertion_var(ts, inner);
        ts.expect(")");
        if (v.is_old()) ts.fail("nested old()");
        return v.old();
    }
    if (ts.accept("(")) {
        int64_t idx = ts.expect_int();
        ts.expect(")");
        if (idx < 1) ts.fail("thread index must be positive");
        return Var::local(name, static_cast<int>(idx));
    }
    return Var::global(name);
}

LinTerm parse_term(TokenStream& ts) { return parse_term_with(ts, resolve_assertion_var); }

Atom parse_atom(TokenStream& ts) {
    if (ts.accept("true")) return Atom::truth();
    if (ts.accept("false")) return Atom::falsity();
    LinTerm lhs = parse_term(ts);
    auto op = accept_cmp(ts);
    if (!op) ts.fail("expected comparison operator");
    LinTerm rhs = parse_term(ts);
    return Atom::make(lhs, *op, rhs);
}

Assertion parse_assertion(TokenStream& ts) {
    Assertion out;
    out.add(parse_atom(ts));
    while (ts.accept(";") || ts.accept("&&") || ts.accept("&")) out.add(parse_atom(ts));
    return out;
}

namespace {

template <typename T, typename F>
T parse_whole(std::string_view text, F f) {
    TokenStream ts(text);
    T r = f(ts);
    if (!ts.at_end()) ts.fail("unexpected trailing input");
    return r;
}

} // namespace

LinTerm parse_term(std::string_view text) {
    return parse_whole<LinTerm>(text, [](TokenStream& ts) { return parse_term(ts); });
}

Atom parse_atom(std::string_view text) {
    return parse_whole<Atom>(text, [](TokenStream& ts) { return parse_atom(ts); });
}

Assertion parse_assertion(std::string_view text) {
    return parse_whole<Assertion>(text, [](TokenStream& ts) { return parse_assertion(ts); });
}

} // namespace wfps
