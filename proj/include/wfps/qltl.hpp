#pragma once

#include "wfps/program.hpp"
#include "wfps/qpa.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace wfps {

// Thread-quantified LTL. Quantifiers may only occur outside temporal operators.
struct Qltl;
using QltlPtr = std::shared_ptr<const Qltl>;

struct Qltl {
    enum class Kind { True, False, Exec, Eq, Not, And, Or, Next, Until, Forall, Exists };
    Kind kind = Kind::True;
    int letter = -1; // Exec: command index, -1 for any command
    std::string var, var2;
    std::vector<QltlPtr> kids;
};

namespace ql {
QltlPtr tt();
QltlPtr ff();
QltlPtr exec(int letter, std::string var);
QltlPtr eq(std::string a, std::string b);
QltlPtr neg(QltlPtr a);
QltlPtr conj(QltlPtr a, QltlPtr b);
QltlPtr disj(QltlPtr a, QltlPtr b);
QltlPtr next(QltlPtr a);
QltlPtr until(QltlPtr a, QltlPtr b);
QltlPtr eventually(QltlPtr a);
QltlPtr always(QltlPtr a);
QltlPtr forall(std::string v, QltlPtr body);
QltlPtr exists(std::string v, QltlPtr body);
} // namespace ql

// `letters` are the command names (a trailing `$` is ignored). Command names
// inside exec[...] are compared with whitespace removed.
QltlPtr parse_qltl(std::string_view text, const std::vector<std::string>& letters);
std::string qltl_str(const QltlPtr& f, const std::vector<std::string>& letters);
std::set<std::string> qltl_free_vars(const QltlPtr& f);
bool has_temporal(const QltlPtr& f);
bool has_quantifier(const QltlPtr& f);

// tau rho^omega |= f with quantifiers over 1..n_threads.
bool lasso_satisfies(const Lasso& l, const QltlPtr& f, int n_threads);

// ------------------------------------------------------------ normal form

// Quantifier-free LTL over thread classes 1..m; class m+1 stands for every
// other thread.
struct Ltl;
using LtlPtr = std::shared_ptr<const Ltl>;
struct Ltl {
    enum class Kind { True, False, Atom, Not, And, Or, Next, Until };
    Kind kind = Kind::True;
    int letter = -1; // -1: any command
    int cls = 0;
    std::vector<LtlPtr> kids;
};
std::string ltl_str(const LtlPtr& f);

// Boolean combination of distinct-relativized quantifiers over LTL leaves.
// Forall/Exists bind representative `rep` ranging over threads different
// from every representative bound above it. A leaf's classes 1..m refer to
// the representatives listed in `reps`.
struct QuantTree {
    enum class Kind { And, Or, Forall, Exists, Leaf };
    Kind kind = Kind::Leaf;
    int rep = 0;
    std::vector<QuantTree> kids;
    LtlPtr matrix;
    std::vector<int> reps;
};

// Disjuncts whose union is equivalent to the sentence. Equalities between
// thread variables are resolved by splitting each quantifier into the cases
// "equal to an enclosing representative" and "distinct from all of them".
std::vector<QuantTree> normalize_to_prenex_disjuncts(const QltlPtr& f);
bool tree_satisfies(const Lasso& l, const QuantTree& t, int n_threads);
std::string tree_str(const QuantTree& t);

// ------------------------------------------------------------ automata

// Letters of Sigma(m+1) are numbered sigma * (m+1) + (class - 1).
struct BuchiAutomaton {
    int n_letters = 0;
    int n_states = 0;
    std::vector<int> initial;
    std::vector<bool> accepting;
    std::vector<std::vector<std::vector<int>>> delta; // [state][letter] -> states
};

// Lasso membership of u v^omega, by direct search for an accepting cycle.
bool buchi_accepts_lasso(const BuchiAutomaton& b, const std::vector<int>& u, const std::vector<int>& v);
BuchiAutomaton matrix_to_buchi(const LtlPtr& matrix, int n_commands, int m);

// Deterministic and complete over n_letters + 1 symbols; symbol n_letters is `$`.
struct LassoDfa {
    int n_letters = 0;
    int n_states = 0;
    int start = 0;
    std::vector<bool> accepting;
    std::vector<std::vector<int>> delta;
    int dollar() const { return n_letters; }
    bool accepts(const std::vector<int>& word) const;
};

// Accepts exactly u$v with v nonempty and u v^omega in L(b).
LassoDfa buchi_lasso_dfa(const BuchiAutomaton& b);
LassoDfa minimize_dfa(const LassoDfa& d);

// Adds predicates "<tag><state>" of arity m simulating the DFA backwards and
// returns the predicate index of each DFA state (-1 for unused states).
std::vector<int> add_lifted_dfa(Qpa& a, const LassoDfa& dfa, int m, const std::string& tag);

enum class Quantifier { Forall, Exists };
// Single prenex disjunct Q1 i1 ... Qk ik over pairwise distinct threads.
Qpa lift_dfa_to_qpa(const LassoDfa& dfa, const std::vector<Quantifier>& prefix,
                    const std::vector<std::string>& alphabet);

// Accepts tau$rho (one `$`, rho nonempty) iff tau rho^omega |= f over the
// configuration universe.
Qpa property_qpa(const QltlPtr& f, const std::vector<std::string>& alphabet);

} // namespace wfps
