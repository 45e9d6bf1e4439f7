#pragma once

#include "wfps/error.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wfps {

// Positive first-order formula over a QPA vocabulary. Variables are ints; in
// transition bodies 0 is the executing thread and 1..ar the predicate's
// arguments. Bound variables are renamed apart with fresh ids.
struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    enum class Kind { True, False, Pred, Eq, Ne, And, Or, Forall, Exists };
    Kind kind = Kind::True;
    int pred = -1;
    std::vector<int> args; // predicate arguments, or the two sides of = / !=
    int var = -1;          // bound variable of a quantifier
    std::vector<FormulaPtr> kids;
};

namespace fm {
FormulaPtr tt();
FormulaPtr ff();
FormulaPtr pred(int q, std::vector<int> args);
FormulaPtr eq(int a, int b);
FormulaPtr ne(int a, int b);
FormulaPtr conj(std::vector<FormulaPtr> kids);
FormulaPtr disj(std::vector<FormulaPtr> kids);
FormulaPtr conj(FormulaPtr a, FormulaPtr b);
FormulaPtr disj(FormulaPtr a, FormulaPtr b);
FormulaPtr forall(int v, FormulaPtr body);
FormulaPtr exists(int v, FormulaPtr body);
FormulaPtr forall(const std::vector<int>& vs, FormulaPtr body);
FormulaPtr exists(const std::vector<int>& vs, FormulaPtr body);
} // namespace fm

int fresh_var();
std::set<int> free_vars(const FormulaPtr& f);
// Capture-free renaming of free variables; bound variables get fresh ids.
FormulaPtr rename_vars(const FormulaPtr& f, const std::map<int, int>& ren);
FormulaPtr map_preds(const FormulaPtr& f, const std::function<int(int)>& m);
// Dual formula: = and !=, and/or, forall/exists, true/false swap; predicates stay.
FormulaPtr de_morgan(const FormulaPtr& f);
// Replaces each predicate atom q(args) by `sub(q, args)`.
FormulaPtr substitute_preds(const FormulaPtr& f, const std::function<FormulaPtr(int, const std::vector<int>&)>& sub);
bool mentions_var(const FormulaPtr& f, int v);
size_t formula_size(const FormulaPtr& f);

struct Qpa {
    std::vector<std::string> preds;
    std::vector<int> arity;
    std::vector<bool> accepting;
    std::vector<std::string> letters;
    std::vector<std::vector<FormulaPtr>> delta; // [pred][letter]
    FormulaPtr start;

    Qpa();
    explicit Qpa(std::vector<std::string> alphabet);

    int add_pred(const std::string& name, int ar, bool acc = false);
    std::optional<int> pred_index(std::string_view name) const;
    std::optional<int> letter_index(std::string_view name) const;
    int dollar() const; // -1 when `$` is not a letter
    void set_delta(int q, int letter, FormulaPtr body);
    void or_delta(int q, int letter, FormulaPtr body);
    size_t n_preds() const { return preds.size(); }
    size_t n_letters() const { return letters.size(); }
};

struct QLetter {
    int letter = 0;
    int tid = 1;
    auto operator<=>(const QLetter&) const = default;
};
using QWord = std::vector<QLetter>;

// Ground proposition q(t1..tn): predicate in the top 16 bits, arguments in
// 12-bit fields.
using Fact = uint64_t;
constexpr int kMaxArity = 4;
constexpr int kMaxThreadId = 4095;
Fact make_fact(int pred, const std::vector<int>& args);
int fact_pred(Fact f);
std::vector<int> fact_args(Fact f, int arity);

struct Configuration {
    std::vector<int> universe; // sorted thread ids
    std::vector<Fact> facts;   // sorted
    auto operator<=>(const Configuration&) const = default;
};

std::string config_str(const Qpa& a, const Configuration& c);

bool eval_qpa_formula(const Qpa& a, const Configuration& c, const std::map<int, int>& env, const FormulaPtr& f);

class ResourceLimit : public Error {
public:
    using Error::Error;
};

using Clause = std::vector<Fact>; // sorted set of facts
using Dnf = std::vector<Clause>;  // irredundant

void minimize_dnf(Dnf& d);

// Grounds formulas over a fixed universe and computes minimal successors.
class QpaRunner {
public:
    QpaRunner(const Qpa& a, std::vector<int> universe, size_t dnf_limit = 200000);

    const std::vector<int>& universe() const { return universe_; }
    std::vector<Clause> initial();
    std::vector<Clause> step(const Clause& facts, int letter, int tid);
    bool accepting(const Clause& facts) const;
    Dnf ground(const FormulaPtr& f, std::vector<std::pair<int, int>>& env);

private:
    Dnf product(const Dnf& a, const Dnf& b);
    const Dnf& ground_delta(Fact f, int letter, int tid);

    const Qpa& a_;
    std::vector<int> universe_;
    size_t dnf_limit_;
    struct KeyHash {
        size_t operator()(const std::tuple<Fact, int, int>& k) const {
            return std::hash<uint64_t>()(std::get<0>(k) * 1000003u + static_cast<uint64_t>(std::get<1>(k)) * 4099u +
                                         static_cast<uint64_t>(std::get<2>(k)));
        }
    };
    std::unordered_map<std::tuple<Fact, int, int>, Dnf, KeyHash> cache_;
};

std::vector<Configuration> min_successors(const Qpa& a, const Configuration& c, int letter, int k);

struct AcceptOptions {
    int fresh_cap = 1; // extra thread ids beyond those in the word
};
bool accepts(const Qpa& a, const QWord& w, const AcceptOptions& opts = {});
// Acceptance over one fixed universe.
bool accepts_in(const Qpa& a, const QWord& w, const std::vector<int>& universe);

enum class BoolOp { Intersect, Union, Complement };
Qpa compose_boolean(BoolOp op, const Qpa& a, const Qpa* b = nullptr);
Qpa intersect(const Qpa& a, const Qpa& b);
Qpa unite(const Qpa& a, const Qpa& b);
Qpa complement(const Qpa& a);

FormulaPtr symbolic_post(const Qpa& a, const FormulaPtr& phi, int letter);

// ---------------------------------------------------------------- emptiness

struct EmptinessOptions {
    int n_max = 2;
    int len_max = 8;
    size_t node_limit = 3'000'000;
    double time_limit_s = 0; // 0 = none
};

struct EmptinessResult {
    enum class Kind { EmptyUpTo, Counterexample, ResourceLimit };
    Kind kind = Kind::EmptyUpTo;
    QWord word;
    int universe = 0;
    int n_max = 0;
    int len_max = 0;
    size_t nodes = 0;
    std::string note;
};

EmptinessResult bounded_emptiness(const Qpa& a, const EmptinessOptions& opts);

// ---------------------------------------------------------------- certificates

class SmtClient;

struct CertificateOptions {
    int max_universe = 3;
    size_t fact_limit = 20; // exhaustive enumeration of fact subsets up to 2^limit
    size_t samples = 200000;
    std::optional<std::string> prover;
};

struct CertificateResult {
    enum class Kind { Accepted, Rejected, BoundedOnly };
    Kind kind = Kind::BoundedOnly;
    std::string condition; // Initialization | Consecution | Rejection
    std::optional<int> letter;
    std::optional<Configuration> witness;
    std::string note;
};

// phi |- psi over finite structures; returns a counter-model if one is found.
std::optional<Configuration> find_countermodel(const Qpa& a, const FormulaPtr& phi, const FormulaPtr& psi,
                                               const CertificateOptions& opts, bool& exhaustive);
CertificateResult check_emptiness_certificate(const Qpa& a, const FormulaPtr& cert, const CertificateOptions& opts);

// ---------------------------------------------------------------- text format

Qpa parse_qpa(std::string_view text);
FormulaPtr parse_qpa_formula(const Qpa& a, std::string_view text);
std::string formula_str(const Qpa& a, const FormulaPtr& f);
std::string qpa_str(const Qpa& a);
std::string qword_str(const Qpa& a, const QWord& w);

} // namespace wfps
