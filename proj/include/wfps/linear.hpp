#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wfps {

class TokenStream;

enum class VarKind : uint8_t { Global, Local, OldGlobal, OldLocal };

// A program variable. Locals carry a thread index; inside command bodies the
// index 0 stands for the executing thread.
struct Var {
    VarKind kind = VarKind::Global;
    std::string name;
    int index = 0;

    static Var global(std::string n) { return {VarKind::Global, std::move(n), 0}; }
    static Var local(std::string n, int i) { return {VarKind::Local, std::move(n), i}; }

    bool is_local() const { return kind == VarKind::Local || kind == VarKind::OldLocal; }
    bool is_old() const { return kind == VarKind::OldGlobal || kind == VarKind::OldLocal; }
    Var old() const;
    Var current() const;
    Var with_index(int i) const { return {kind, name, i}; }
    std::string str() const;

    auto operator<=>(const Var&) const = default;
};

using Valuation = std::map<Var, int64_t>;

struct LinTerm {
    std::vector<std::pair<Var, int64_t>> coeffs; // sorted by Var, no zero entries
    int64_t constant = 0;

    LinTerm() = default;
    explicit LinTerm(int64_t c) : constant(c) {}
    static LinTerm var(const Var& v, int64_t c = 1);

    bool is_constant() const { return coeffs.empty(); }
    int64_t coeff(const Var& v) const;
    std::set<Var> vars() const;

    LinTerm operator+(const LinTerm& o) const;
    LinTerm operator-(const LinTerm& o) const;
    LinTerm operator*(int64_t k) const;
    LinTerm operator-() const { return *this * -1; }

    LinTerm substitute(const Var& v, const LinTerm& by) const;
    LinTerm substitute(const std::map<Var, LinTerm>& sub) const;
    LinTerm map_vars(const std::function<Var(const Var&)>& f) const;
    int64_t eval(const std::function<int64_t(const Var&)>& lookup) const;
    std::string str() const;

    auto operator<=>(const LinTerm&) const = default;
};

enum class Cmp { Lt, Le, Eq, Ne, Gt, Ge };

std::optional<Cmp> parse_cmp(std::string_view op);
std::string_view cmp_text(Cmp c);
Cmp negate_cmp(Cmp c);

// Normalized linear atom `term rel 0`. Strict inequalities are turned into
// non-strict ones over the integers and coefficients are gcd-reduced.
struct Atom {
    enum class Rel : uint8_t { Le, Eq, Ne };
    Rel rel = Rel::Le;
    LinTerm term;

    static Atom make(const LinTerm& lhs, Cmp op, const LinTerm& rhs);
    static Atom truth();
    static Atom falsity();

    bool is_true() const;
    bool is_false() const;
    std::set<Var> vars() const { return term.vars(); }
    std::set<int> indices() const;
    bool mentions_old() const;
    Atom map_vars(const std::function<Var(const Var&)>& f) const;
    // Negation as a disjunction of atoms (one atom except for `=`).
    std::vector<Atom> negation() const;
    bool holds(const std::function<int64_t(const Var&)>& lookup) const;
    std::string str() const;

    auto operator<=>(const Atom&) const = default;
};

// Conjunction of atoms with set semantics; the empty set is `true`.
struct Assertion {
    std::set<Atom> atoms;

    Assertion() = default;
    Assertion(std::initializer_list<Atom> as);
    explicit Assertion(const std::vector<Atom>& as);

    void add(const Atom& a);
    void add_all(const Assertion& o);
    bool is_true() const { return atoms.empty(); }
    bool is_false() const;
    size_t size() const { return atoms.size(); }
    std::set<Var> vars() const;
    std::set<int> indices() const;
    bool holds(const std::function<int64_t(const Var&)>& lookup) const;
    std::string str() const;

    auto operator<=>(const Assertion&) const = default;
};

using Permutation = std::map<int, int>;

Atom apply_permutation(const Atom& a, const Permutation& pi);
Assertion apply_permutation(const Assertion& phi, const Permutation& pi);
LinTerm apply_permutation(const LinTerm& t, const Permutation& pi);

struct CanonicalAssertion {
    Assertion name;
    int arity = 0;
    auto operator<=>(const CanonicalAssertion&) const = default;
};

// Renames thread indices to 1..k. The result is invariant under permutation
// of the input; the tuple maps canonical index j to the original index.
std::pair<CanonicalAssertion, std::vector<int>> canonicalize(const Assertion& phi);
// Every tuple t with name[t] = phi (more than one when the name has symmetries).
std::vector<std::vector<int>> canonical_tuples(const Assertion& phi);
Assertion instantiate(const CanonicalAssertion& c, const std::vector<int>& tuple);

bool comb_entails(const Assertion& phi, const Assertion& psi);

// old(t) > t && old(t) >= bound, with t over current-state variables.
struct RankingFormula {
    LinTerm term;
    int64_t bound = 0;

    Assertion as_assertion() const;
    bool relates(const std::function<int64_t(const Var&)>& old_lookup,
                 const std::function<int64_t(const Var&)>& lookup) const;
    std::string str() const;

    auto operator<=>(const RankingFormula&) const = default;
};

RankingFormula apply_permutation(const RankingFormula& w, const Permutation& pi);

// Resolves an identifier (already consumed) to a variable; may consume an
// index suffix from the stream.
using VarResolver = std::function<Var(TokenStream& ts, const std::string& name)>;
LinTerm parse_term_with(TokenStream& ts, const VarResolver& resolve);
std::optional<Cmp> accept_cmp(TokenStream& ts);

// Assertion-language parsing: globals `x`, indexed locals `d(1)`, `old(...)`.
Var resolve_assertion_var(TokenStream& ts, const std::string& name);
LinTerm parse_term(TokenStream& ts);
Atom parse_atom(TokenStream& ts);
Assertion parse_assertion(TokenStream& ts);
LinTerm parse_term(std::string_view text);
Atom parse_atom(std::string_view text);
Assertion parse_assertion(std::string_view text);

int64_t checked_add(int64_t a, int64_t b);
int64_t checked_mul(int64_t a, int64_t b);

} // namespace wfps
