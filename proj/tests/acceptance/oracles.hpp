#pragma once

#include "wfps/program.hpp"
#include "wfps/qltl.hpp"
#include "wfps/qpa.hpp"

#include <functional>
#include <random>
#include <vector>

namespace oracle {

// Runs tau rho on the explicit N-thread product: the stem must be executable
// from all-initial locations and the loop must return to the same tuple.
bool product_lasso(const wfps::Program& p, const wfps::Lasso& l, int n_threads);

// u v^omega in L(b), via reachable v-boundary states and an accepting v-cycle.
bool buchi_lasso(const wfps::BuchiAutomaton& b, const std::vector<int>& u, const std::vector<int>& v);

wfps::BuchiAutomaton random_buchi(std::mt19937& rng, int max_states, int n_letters);
wfps::Qpa random_qpa(std::mt19937& rng, int max_preds, int n_letters);

// Visits every lasso with stem <= stem_max and 1 <= loop <= loop_max over
// `letters`. For each lasso, reports acceptance by each automaton in each
// universe (false when the lasso uses a thread outside the universe). Words
// are processed right to left so runs share suffixes.
struct LassoAcceptance {
    const wfps::Lasso& lasso;
    // accepted[a][u]
    const std::vector<std::vector<bool>>& accepted;
};
void for_each_lasso_run(const std::vector<const wfps::Qpa*>& automata, int dollar,
                        const std::vector<wfps::IndexedCommand>& letters,
                        const std::vector<std::vector<int>>& universes, int stem_max, int loop_max,
                        const std::function<void(const LassoAcceptance&)>& visit);

} // namespace oracle
