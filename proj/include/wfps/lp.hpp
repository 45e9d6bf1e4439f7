#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <optional>
#include <vector>

namespace wfps {

using Rational = boost::multiprecision::cpp_rational;

// Small exact linear program: minimize an objective over free and
// non-negative variables subject to linear (in)equalities. Two-phase simplex
// with Bland's rule.
class LinearProgram {
public:
    enum class Rel { Le, Eq, Ge };

    int add_var(bool nonneg);
    void add_constraint(const std::map<int, Rational>& coeffs, Rel rel, const Rational& rhs);
    void minimize(const std::map<int, Rational>& objective) { objective_ = objective; }
    int n_vars() const { return static_cast<int>(nonneg_.size()); }

    // Optimal assignment, or nullopt when infeasible. Unbounded objectives
    // return the last feasible vertex.
    std::optional<std::vector<Rational>> solve() const;

private:
    struct Row {
        std::map<int, Rational> coeffs;
        Rel rel;
        Rational rhs;
    };
    std::vector<bool> nonneg_;
    std::vector<Row> rows_;
    std::map<int, Rational> objective_;
};

} // namespace wfps
