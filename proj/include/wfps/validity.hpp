#pragma once

#include "wfps/linear.hpp"
#include "wfps/program.hpp"
#include "wfps/smt.hpp"

#include <memory>
#include <optional>
#include <string>

namespace wfps {

struct HoareTriple {
    Assertion pre;
    Word word;
    Assertion post;

    auto operator<=>(const HoareTriple&) const = default;
};

std::string triple_str(const Program& p, const HoareTriple& t);

enum class Validity { Valid, Invalid, Unknown };
std::string_view validity_name(Validity v);

struct ValidityResult {
    Validity verdict = Validity::Unknown;
    // For Invalid: initial and final valuations (old copies live in the initial one).
    Valuation before, after;
    std::string note;
};

struct OracleConfig {
    std::optional<std::string> prover; // command line, e.g. "z3 -in -smt2"
    int64_t enum_lo = -4;
    int64_t enum_hi = 4;
    int64_t havoc_span = 8;
    uint64_t enum_budget = 2'000'000;
};

// Layered validity checking: external prover, then bounded enumeration.
class ValidityOracle {
public:
    explicit ValidityOracle(OracleConfig cfg = {});
    ~ValidityOracle();

    ValidityResult check(const Program& p, const HoareTriple& t);
    // phi implies every atom of psi (a triple over the empty word).
    ValidityResult entails(const Program& p, const Assertion& phi, const Assertion& psi);
    // Satisfiability of a conjunction; Unknown when neither layer decides.
    Validity satisfiable(const Assertion& phi);

    bool has_prover() const { return static_cast<bool>(client_); }
    const OracleConfig& config() const { return cfg_; }
    uint64_t prover_calls() const { return prover_calls_; }

private:
    OracleConfig cfg_;
    std::unique_ptr<SmtClient> client_;
    std::map<std::pair<std::string, std::string>, ValidityResult> memo_;
    uint64_t prover_calls_ = 0;
    std::string prover_error_;
};

ValidityResult check_hoare_validity(const Program& p, const HoareTriple& t, ValidityOracle& oracle);

// Symbolic execution of a straight-line word. Havoc introduces a fresh
// variable `#h<k>` with its lower bound as a constraint.
struct SymbolicRun {
    std::map<Var, LinTerm> state; // current-state variable -> term over initial symbols
    Assertion constraints;        // assumptions and havoc bounds
    std::vector<Var> havocs;
};
SymbolicRun symbolic_execute(const Program& p, const Word& w);
LinTerm symbolic_value(const SymbolicRun& run, const Var& v);
Atom symbolic_atom(const SymbolicRun& run, const Atom& a);

bool eval_assertion(const ProgramState& s, const ProgramState* s_old, const Assertion& phi);
bool eval_ranking_relation(const ProgramState& s_old, const ProgramState& s, const RankingFormula& w);

std::string smt_term(const LinTerm& t);
std::string smt_atom(const Atom& a);

} // namespace wfps
