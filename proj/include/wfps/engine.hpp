#pragma once

#include "wfps/proof_space.hpp"
#include "wfps/qltl.hpp"
#include "wfps/validity.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace wfps {

// Annotations: invariance[k] holds before letter k of stem.loop (size
// |stem| + |loop| + 1); variance[k] before letter k of the loop, with
// old-copies (size |loop| + 1).
struct LassoProof {
    std::vector<Assertion> invariance;
    std::vector<Assertion> variance;
    RankingFormula ranking;
};

// Concrete run of stem.loop^k: states[j] precedes letter j of the unrolled
// word, and states[first] == states[second] at two loop boundaries.
struct FeasibleWitness {
    std::vector<ProgramState> states;
    size_t first = 0;
    size_t second = 0;
};

struct NoWitnessFound {};
struct ProofUnknown {
    std::string reason;
};

struct FeasibilityOptions {
    int unroll_bound = 16;
    HavocRange range{-8, 8};
    size_t node_limit = 200000;
};

// Starts from the all-zero initial state.
std::variant<FeasibleWitness, NoWitnessFound> check_lasso_feasibility(const Program& p, const Lasso& l,
                                                                        const FeasibilityOptions& opts = {});
bool replay_witness(const Program& p, const Lasso& l, const FeasibleWitness& w, const HavocRange& range);
std::string witness_str(const Program& p, const Lasso& l, const FeasibleWitness& w);

// Existentially projects `vars` out of a conjunction (Fourier-Motzkin;
// disequalities over eliminated variables are dropped).
Assertion project_out(const Assertion& phi, const std::set<Var>& vars, size_t atom_cap = 400);

Assertion strongest_post(const Program& p, const Assertion& pre, const Word& w);
Assertion stem_strongest_post(const Program& p, const Word& stem);

// Linear ranking function for `loop` under the invariant `support`, with
// smallest L1 coefficient norm; bound 0 when possible.
std::optional<RankingFormula> synthesize_linear_ranking(const Program& p, const Word& loop, const Assertion& support);

using ProofOutcome = std::variant<LassoProof, FeasibleWitness, ProofUnknown>;
ProofOutcome find_infeasibility_proof(const Program& p, const Lasso& l, ValidityOracle& oracle,
                                      const FeasibilityOptions& fopts = {});

// Per-step basic triples with minimized pre-conditions, plus the ranking.
Basis extract_basis(const Program& p, const LassoProof& proof, const Lasso& l, ValidityOracle& oracle);
Basis generate_stability_triples(const Basis& b, const Program& p, ValidityOracle& oracle);

struct EngineOptions {
    int n_max = 2;
    int len_max = 8;
    int max_iterations = 64;
    size_t node_limit = 3'000'000;
    double time_limit_s = 0;
    FeasibilityOptions feasibility;
    OracleConfig oracle;
    bool stability = true;
    Basis seed;
    std::optional<std::string> certificate; // formula over the inclusion QPA
};

struct Verdict {
    enum class Kind { Yes, No, Unknown, BoundExhausted };
    Kind kind = Kind::Unknown;
    Basis basis;
    std::optional<Lasso> lasso;
    std::optional<FeasibleWitness> witness;
    std::vector<Lasso> samples;
    int iterations = 0;
    EmptinessResult emptiness;
    std::optional<CertificateResult> certificate;
    std::string note;
};
std::string_view verdict_name(Verdict::Kind k);

// A(P) [& A(!phi)] & !A(H,W).
Qpa inclusion_qpa(const Program& p, const QltlPtr& property, const Basis& b);

Verdict run_algorithm1(const Program& p, const QltlPtr& property, const EngineOptions& opts);

} // namespace wfps
