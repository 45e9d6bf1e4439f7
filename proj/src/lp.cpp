#include "wfps/lp.hpp"

namespace wfps {

int LinearProgram::add_var(bool nonneg) {
    nonneg_.push_back(nonneg);
    return static_cast<int>(nonneg_.size()) - 1;
}

void LinearProgram::add_constraint(const std::map<int, Rational>& coeffs, Rel rel, const Rational& rhs) {
    rows_.push_back({coeffs, rel, rhs});
}

namespace {

struct Tableau {
    // rows x (cols + 1); last column is the right-hand side.
    std::vector<std::vector<Rational>> t;
    std::vector<int> basis;
    size_t cols = 0;

    void pivot(size_t r, size_t c) {
        Rational p = t[r][c];
        for (auto& x : t[r]) x /= p;
        for (size_t i = 0; i < t.size(); ++i) {
            if (i == r || t[i][c] == 0) continue;
            Rational f = t[i][c];
            for (size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[r][j];
        }
        basis[r] = static_cast<int>(c);
    }

    // Minimizes cost over columns allowed by `usable`; returns false if unbounded.
    bool optimize(const std::vector<Rational>& cost, const std::vector<bool>& usable) {
        for (;;) {
            // Reduced costs.
            std::optional<size_t> enter;
            for (size_t j = 0; j < cols && !enter; ++j) {
                if (!usable[j]) continue;
                Rational rc = cost[j];
                for (size_t i = 0; i < t.size(); ++i) rc -= cost[static_cast<size_t>(basis[i])] * t[i][j];
                if (rc < 0) enter = j;
            }
            if (!enter) return true;
            std::optional<size_t> leave;
            Rational best;
            for (size_t i = 0; i < t.size(); ++i) {
                if (t[i][*enter] <= 0) continue;
                Rational ratio = t[i][cols] / t[i][*enter];
                if (!leave || ratio < best || (ratio == best && basis[i] < basis[*leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (!leave) return false;
            pivot(*leave, *enter);
        }
    }
};

} // namespace

std::optional<std::vector<Rational>> LinearProgram::solve() const {
    // Column layout: split variables (x+ and, for free ones, x-), then
    // slacks, then artificials.
    std::vector<std::pair<size_t, std::optional<size_t>>> split;
    size_t cols = 0;
    for (bool nn : nonneg_) {
        size_t plus = cols++;
        std::optional<size_t> minus;
        if (!nn) minus = cols++;
        split.push_back({plus, minus});
    }
    size_t n_struct = cols;
    std::vector<size_t> slack(rows_.size(), SIZE_MAX);
    for (size_t i = 0; i < rows_.size(); ++i)
        if (rows_[i].rel != Rel::Eq) slack[i] = cols++;
    size_t first_art = cols;
    cols += rows_.size();

    Tableau tb;
    tb.cols = cols;
    tb.t.assign(rows_.size(), std::vector<Rational>(cols + 1));
    tb.basis.resize(rows_.size());
    for (size_t i = 0; i < rows_.size(); ++i) {
        const Row& r = rows_[i];
        auto& row = tb.t[i];
        for (const auto& [v, c] : r.coeffs) {
            row[split[static_cast<size_t>(v)].first] += c;
            if (split[static_cast<size_t>(v)].second) row[*split[static_cast<size_t>(v)].second] -= c;
        }
        if (r.rel == Rel::Le) row[slack[i]] = 1;
        if (r.rel == Rel::Ge) row[slack[i]] = -1;
        row[cols] = r.rhs;
        if (row[cols] < 0)
            for (auto& x : row) x = -x;
        row[first_art + i] = 1;
        tb.basis[i] = static_cast<int>(first_art + i);
    }

    std::vector<Rational> phase1(cols, 0);
    for (size_t j = first_art; j < cols; ++j) phase1[j] = 1;
    std::vector<bool> all(cols, true);
    tb.optimize(phase1, all);
    Rational infeas = 0;
    for (size_t i = 0; i < tb.t.size(); ++i)
        if (static_cast<size_t>(tb.basis[i]) >= first_art) infeas += tb.t[i][cols];
    if (infeas != 0) return std::nullopt;
    // Drive remaining artificials out of the basis where possible.
    for (size_t i = 0; i < tb.t.size(); ++i) {
        if (static_cast<size_t>(tb.basis[i]) < first_art) continue;
        for (size_t j = 0; j < first_art; ++j)
            if (tb.t[i][j] != 0) {
                tb.pivot(i, j);
                break;
            }
    }

    std::vector<Rational> cost(cols, 0);
    for (const auto& [v, c] : objective_) {
        cost[split[static_cast<size_t>(v)].first] += c;
        if (split[static_cast<size_t>(v)].second) cost[*split[static_cast<size_t>(v)].second] -= c;
    }
    std::vector<bool> usable(cols, true);
    for (size_t j = first_art; j < cols; ++j) usable[j] = false;
    tb.optimize(cost, usable);

    std::vector<Rational> col_val(cols, 0);
    for (size_t i = 0; i < tb.t.size(); ++i) col_val[static_cast<size_t>(tb.basis[i])] = tb.t[i][cols];
    std::vector<Rational> out;
    for (const auto& [plus, minus] : split) out.push_back(col_val[plus] - (minus ? col_val[*minus] : Rational(0)));
    (void)n_struct;
    return out;
}

} // namespace wfps
