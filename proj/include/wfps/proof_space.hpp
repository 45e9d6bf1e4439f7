#pragma once

#include "wfps/program.hpp"
#include "wfps/qpa.hpp"
#include "wfps/validity.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wfps {

struct Basis {
    std::vector<HoareTriple> triples;
    std::vector<RankingFormula> rankings;

    // Adds members not already present; returns how many were new.
    size_t merge(const Basis& other);
    bool contains(const HoareTriple& t) const;
};

bool check_well_formed(const HoareTriple& t);

struct BasicVerdict {
    enum class Kind { Basic, NotBasic, Unknown };
    Kind kind = Kind::NotBasic;
    std::string reason;
    bool ok() const { return kind == Kind::Basic; }
};
// Shape checks only (single command, atomic post, well-formed).
BasicVerdict check_basic_shape(const HoareTriple& t);
BasicVerdict check_basic(const Program& p, const HoareTriple& t, ValidityOracle& oracle);

// `triple {<assertion>} <command> @ <index> {<atom>}` and `rank <term> >= <int>`.
Basis parse_basis(const Program& p, std::string_view text);
std::string basis_str(const Program& p, const Basis& b);

// Forward closure of a basis under Sequencing, Symmetry and Conjunction over
// a fixed set of thread ids. Results are memoized per instance.
class ProofSpace {
public:
    explicit ProofSpace(Basis b);

    const Basis& basis() const { return basis_; }

    using AtomSet = std::set<Atom>;
    struct Justification {
        size_t triple = 0;
        Permutation pi;
    };

    AtomSet step(const AtomSet& s, const IndexedCommand& ic, const std::vector<int>& universe,
                 std::map<Atom, Justification>* why = nullptr);
    AtomSet derivable(const Assertion& pre, const Word& w, const std::vector<int>& universe);
    // Some ranking instance has all its atoms in `s`.
    bool ranking_derived(const AtomSet& s, const std::vector<int>& universe);
    // old(x) = x for every variable mentioned in the basis, locals over `universe`.
    Assertion old_equalities(const std::vector<int>& universe) const;
    bool lasso_member(const Lasso& l);

private:
    struct Prepared {
        int cmd;
        int exec;
        std::vector<int> others; // indices of pre/post other than exec
    };
    int intern(const AtomSet& s);

    Basis basis_;
    std::vector<Prepared> prepared_;
    std::set<std::string> old_globals_, old_locals_;
    std::map<AtomSet, int> ids_;
    std::vector<const AtomSet*> sets_;
    std::map<std::tuple<int, int, int, std::vector<int>>, int> step_cache_;
    std::map<std::pair<int, std::vector<int>>, bool> rank_cache_;
};

// Thread ids of the lasso plus `fresh` new ones.
std::vector<int> lasso_universe(const Lasso& l, int fresh = 1);

std::set<Atom> derivable_atoms(const Basis& b, const Assertion& pre, const Word& w, int fresh = 1);
bool lasso_in_proof_language(const Basis& b, const Lasso& l);

struct Derivation {
    enum class Rule { Basis, Symmetry, Sequencing, Conjunction };
    Rule rule = Rule::Basis;
    HoareTriple conclusion;
    Permutation pi;                                 // Symmetry
    std::vector<std::shared_ptr<Derivation>> kids; // Sequencing: [left?, right]; Conjunction: parts
};
std::optional<std::shared_ptr<Derivation>> closure_witness(const Basis& b, const HoareTriple& t, int fresh = 1);
std::string derivation_str(const Program& p, const Derivation& d);

// A(H,W) over the program alphabet.
Qpa proof_space_qpa(const Program& p, const Basis& b);
std::string canonical_pred_name(const Atom& a);
bool is_old_equality(const Atom& a);

} // namespace wfps
