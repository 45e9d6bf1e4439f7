#include "oracles.hpp"

#include <algorithm>
#include <deque>
#include <set>

using namespace wfps;

namespace oracle {

bool product_lasso(const Program& p, const Lasso& l, int n_threads) {
    if (l.loop.empty()) return false;
    std::vector<int> locs(static_cast<size_t>(n_threads), p.initial);
    auto run = [&](const Word& w) {
        for (const auto& ic : w) {
            if (ic.thread < 1 || ic.thread > n_threads) return false;
            const Command& c = p.command(ic.cmd);
            int& loc = locs[static_cast<size_t>(ic.thread - 1)];
            if (c.src != loc) return false;
            loc = c.tgt;
        }
        return true;
    };
    if (!run(l.stem)) return false;
    std::vector<int> head = locs;
    return run(l.loop) && locs == head;
}

bool buchi_lasso(const BuchiAutomaton& b, const std::vector<int>& u, const std::vector<int>& v) {
    if (v.empty()) return false;
    auto post = [&](const std::set<int>& s, int a) {
        std::set<int> out;
        for (int q : s)
            for (int r : b.delta[static_cast<size_t>(q)][static_cast<size_t>(a)]) out.insert(r);
        return out;
    };
    std::set<int> cur(b.initial.begin(), b.initial.end());
    for (int a : u) cur = post(cur, a);

    std::set<int> boundary = cur;
    std::deque<std::set<int>> todo{cur};
    std::set<std::set<int>> seen{cur};
    while (!todo.empty()) {
        std::set<int> s = todo.front();
        todo.pop_front();
        for (int a : v) s = post(s, a);
        boundary.insert(s.begin(), s.end());
        if (seen.insert(s).second) todo.push_back(s);
    }

    size_t n = v.size();
    for (int q : boundary) {
        // Nodes (state, position in v, accepting seen).
        std::set<std::tuple<int, size_t, bool>> visited;
        std::deque<std::tuple<int, size_t, bool>> queue{{q, 0, b.accepting[static_cast<size_t>(q)]}};
        bool first = true;
        while (!queue.empty()) {
            auto [s, pos, acc] = queue.front();
            queue.pop_front();
            if (!first && s == q && pos == 0 && acc) return true;
            first = false;
            for (int r : b.delta[static_cast<size_t>(s)][static_cast<size_t>(v[pos])]) {
                std::tuple<int, size_t, bool> next{r, (pos + 1) % n, acc || b.accepting[static_cast<size_t>(r)]};
                if (std::get<0>(next) == q && std::get<1>(next) == 0 && std::get<2>(next)) return true;
                if (visited.insert(next).second) queue.push_back(next);
            }
        }
    }
    return false;
}

BuchiAutomaton random_buchi(std::mt19937& rng, int max_states, int n_letters) {
    std::uniform_int_distribution<int> size(1, max_states);
    std::bernoulli_distribution coin(0.5), edge(0.35);
    BuchiAutomaton b;
    b.n_states = size(rng);
    b.n_letters = n_letters;
    for (int q = 0; q < b.n_states; ++q) {
        if (q == 0 || coin(rng)) b.initial.push_back(q);
        b.accepting.push_back(coin(rng));
    }
    b.delta.assign(static_cast<size_t>(b.n_states), std::vector<std::vector<int>>(static_cast<size_t>(n_letters)));
    for (int q = 0; q < b.n_states; ++q)
        for (int a = 0; a < n_letters; ++a)
            for (int r = 0; r < b.n_states; ++r)
                if (edge(rng)) b.delta[static_cast<size_t>(q)][static_cast<size_t>(a)].push_back(r);
    return b;
}

namespace {

FormulaPtr random_formula(std::mt19937& rng, const Qpa& a, std::vector<int> vars, int depth) {
    std::uniform_int_distribution<int> kind(0, depth > 0 ? 7 : 3);
    auto pick = [&](const std::vector<int>& xs) { return xs[std::uniform_int_distribution<size_t>(0, xs.size() - 1)(rng)]; };
    switch (kind(rng)) {
    case 0: return std::bernoulli_distribution(0.5)(rng) ? fm::tt() : fm::ff();
    case 1:
    case 2: {
        int q = std::uniform_int_distribution<int>(0, static_cast<int>(a.n_preds()) - 1)(rng);
        std::vector<int> args;
        for (int k = 0; k < a.arity[static_cast<size_t>(q)]; ++k) {
            if (vars.empty()) return fm::tt();
            args.push_back(pick(vars));
        }
        return fm::pred(q, args);
    }
    case 3:
        if (vars.empty()) return fm::ff();
        return std::bernoulli_distribution(0.5)(rng) ? fm::eq(pick(vars), pick(vars)) : fm::ne(pick(vars), pick(vars));
    case 4: return fm::conj(random_formula(rng, a, vars, depth - 1), random_formula(rng, a, vars, depth - 1));
    case 5: return fm::disj(random_formula(rng, a, vars, depth - 1), random_formula(rng, a, vars, depth - 1));
    case 6:
    case 7: {
        int v = fresh_var();
        vars.push_back(v);
        FormulaPtr body = random_formula(rng, a, vars, depth - 1);
        return std::bernoulli_distribution(0.5)(rng) ? fm::forall(v, body) : fm::exists(v, body);
    }
    }
    return fm::tt();
}

} // namespace

Qpa random_qpa(std::mt19937& rng, int max_preds, int n_letters) {
    std::vector<std::string> letters;
    for (int k = 0; k < n_letters; ++k) letters.push_back(std::string(1, static_cast<char>('a' + k)));
    Qpa a(letters);
    int n = std::uniform_int_distribution<int>(1, max_preds)(rng);
    for (int q = 0; q < n; ++q)
        a.add_pred("q" + std::to_string(q), std::uniform_int_distribution<int>(0, 1)(rng), std::bernoulli_distribution(0.5)(rng));
    for (int q = 0; q < n; ++q)
        for (int l = 0; l < n_letters; ++l) {
            std::vector<int> vars{0};
            if (a.arity[static_cast<size_t>(q)] == 1) vars.push_back(1);
            a.set_delta(q, l, random_formula(rng, a, vars, 2));
        }
    a.start = random_formula(rng, a, {}, 2);
    return a;
}

void for_each_lasso_run(const std::vector<const Qpa*>& automata, int dollar, const std::vector<IndexedCommand>& letters,
                        const std::vector<std::vector<int>>& universes, int stem_max, int loop_max,
                        const std::function<void(const LassoAcceptance&)>& visit) {
    size_t na = automata.size(), nu = universes.size();
    std::vector<std::vector<std::unique_ptr<QpaRunner>>> runners(na);
    using Frontier = std::vector<std::vector<Dnf>>;
    Frontier start(na, std::vector<Dnf>(nu));
    for (size_t a = 0; a < na; ++a)
        for (size_t u = 0; u < nu; ++u) {
            runners[a].push_back(std::make_unique<QpaRunner>(*automata[a], universes[u]));
            start[a][u] = runners[a][u]->initial();
        }

    auto step = [&](const Frontier& f, int letter, int tid) {
        Frontier out(na, std::vector<Dnf>(nu));
        for (size_t a = 0; a < na; ++a)
            for (size_t u = 0; u < nu; ++u) {
                const auto& uni = universes[u];
                if (!std::binary_search(uni.begin(), uni.end(), tid)) continue;
                Dnf next;
                for (const auto& c : f[a][u]) {
                    auto succ = runners[a][u]->step(c, letter, tid);
                    next.insert(next.end(), succ.begin(), succ.end());
                }
                minimize_dnf(next);
                out[a][u] = std::move(next);
            }
        return out;
    };

    Lasso lasso;
    std::vector<IndexedCommand> rev_stem, rev_loop;
    std::vector<std::vector<bool>> accepted(na, std::vector<bool>(nu));

    std::function<void(const Frontier&)> stem_phase = [&](const Frontier& f) {
        lasso.stem.assign(rev_stem.rbegin(), rev_stem.rend());
        for (size_t a = 0; a < na; ++a)
            for (size_t u = 0; u < nu; ++u) {
                const auto& frontier = f[a][u];
                accepted[a][u] = std::any_of(frontier.begin(), frontier.end(),
                                             [&](const Clause& c) { return runners[a][u]->accepting(c); });
            }
        visit(LassoAcceptance{lasso, accepted});
        if (static_cast<int>(rev_stem.size()) == stem_max) return;
        for (const auto& ic : letters) {
            rev_stem.push_back(ic);
            stem_phase(step(f, ic.cmd, ic.thread));
            rev_stem.pop_back();
        }
    };

    std::function<void(const Frontier&)> loop_phase = [&](const Frontier& f) {
        if (!rev_loop.empty()) {
            lasso.loop.assign(rev_loop.rbegin(), rev_loop.rend());
            stem_phase(step(f, dollar, lasso.loop.front().thread));
        }
        if (static_cast<int>(rev_loop.size()) == loop_max) return;
        for (const auto& ic : letters) {
            rev_loop.push_back(ic);
            loop_phase(step(f, ic.cmd, ic.thread));
            rev_loop.pop_back();
        }
    };
    loop_phase(start);
}

} // namespace oracle
