#include "wfps/qltl.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_map>

namespace wfps {

namespace {

// Tableau over states (T, a, c): T assigns truth to the X/U subformulas at
// the current position, a is the letter read to enter the state and c is
// the degeneralization counter.
class Tableau {
public:
    Tableau(const LtlPtr& f, int n_commands, int m) : m_(m), n_letters_(n_commands * (m + 1)) {
        index(f);
        root_ = id_of(f);
        if (temporal_.size() > 12) throw ResourceLimit("property matrix has too many temporal subformulas");
    }

    BuchiAutomaton build() {
        int n_sets = std::max<int>(1, static_cast<int>(untils_.size()));
        size_t n_t = size_t{1} << temporal_.size();
        // eval_[T][a] holds the truth of every subformula.
        table_.assign(n_t * static_cast<size_t>(n_letters_), {});
        for (size_t t = 0; t < n_t; ++t)
            for (int a = 0; a < n_letters_; ++a) table_[t * static_cast<size_t>(n_letters_) + static_cast<size_t>(a)] = eval_all(t, a);

        BuchiAutomaton b;
        b.n_letters = n_letters_;
        std::map<std::tuple<size_t, int, int>, int> ids;
        std::vector<std::tuple<size_t, int, int>> states;
        b.delta.push_back(std::vector<std::vector<int>>(static_cast<size_t>(n_letters_)));
        b.accepting.push_back(false);
        states.emplace_back(0, -1, -1); // initial pseudo-state
        b.initial = {0};
        auto get = [&](size_t t, int a, int c) {
            auto key = std::make_tuple(t, a, c);
            auto it = ids.find(key);
            if (it != ids.end()) return it->second;
            int id = static_cast<int>(states.size());
            ids.emplace(key, id);
            states.push_back(key);
            b.delta.push_back(std::vector<std::vector<int>>(static_cast<size_t>(n_letters_)));
            b.accepting.push_back(c == 0 && in_set(t, a, 0));
            return id;
        };
        for (size_t t = 0; t < n_t; ++t)
            for (int a = 0; a < n_letters_; ++a)
                if (val(t, a, root_)) b.delta[0][static_cast<size_t>(a)].push_back(get(t, a, 0));
        for (size_t s = 1; s < states.size(); ++s) {
            auto [t, a, c] = states[s];
            int c2 = in_set(t, a, c) ? (c + 1) % n_sets : c;
            for (size_t t2 = 0; t2 < n_t; ++t2)
                for (int a2 = 0; a2 < n_letters_; ++a2)
                    if (consistent(t, a, t2, a2)) {
                        int id = get(t2, a2, c2);
                        b.delta[s][static_cast<size_t>(a2)].push_back(id);
                    }
        }
        b.n_states = static_cast<int>(states.size());
        return b;
    }

private:
    struct Node {
        Ltl::Kind kind;
        int letter, cls;
        std::vector<int> kids;
        int temporal = -1;
    };

    int id_of(const LtlPtr& f) const { return by_key_.at(ltl_str(f)); }

    void index(const LtlPtr& f) {
        std::string key = ltl_str(f);
        if (by_key_.count(key)) return;
        for (const auto& k : f->kids) index(k);
        Node n{f->kind, f->letter, f->cls, {}, -1};
        for (const auto& k : f->kids) n.kids.push_back(id_of(k));
        if (f->kind == Ltl::Kind::Next || f->kind == Ltl::Kind::Until) {
            n.temporal = static_cast<int>(temporal_.size());
            temporal_.push_back(static_cast<int>(nodes_.size()));
            if (f->kind == Ltl::Kind::Until) untils_.push_back(static_cast<int>(nodes_.size()));
        }
        by_key_[key] = static_cast<int>(nodes_.size());
        nodes_.push_back(n);
    }

    std::vector<bool> eval_all(size_t t, int a) const {
        std::vector<bool> v(nodes_.size());
        int sigma = a / (m_ + 1), cls = a % (m_ + 1) + 1;
        for (size_t k = 0; k < nodes_.size(); ++k) {
            const Node& n = nodes_[k];
            switch (n.kind) {
            case Ltl::Kind::True: v[k] = true; break;
            case Ltl::Kind::False: v[k] = false; break;
            case Ltl::Kind::Atom: v[k] = n.cls == cls && (n.letter < 0 || n.letter == sigma); break;
            case Ltl::Kind::Not: v[k] = !v[static_cast<size_t>(n.kids[0])]; break;
            case Ltl::Kind::And: v[k] = v[static_cast<size_t>(n.kids[0])] && v[static_cast<size_t>(n.kids[1])]; break;
            case Ltl::Kind::Or: v[k] = v[static_cast<size_t>(n.kids[0])] || v[static_cast<size_t>(n.kids[1])]; break;
            case Ltl::Kind::Next:
            case Ltl::Kind::Until: v[k] = (t >> n.temporal) & 1; break;
            }
        }
        return v;
    }

    bool val(size_t t, int a, int node) const {
        return table_[t * static_cast<size_t>(n_letters_) + static_cast<size_t>(a)][static_cast<size_t>(node)];
    }

    bool consistent(size_t t, int a, size_t t2, int a2) const {
        for (int node : temporal_) {
            const Node& n = nodes_[static_cast<size_t>(node)];
            bool now = val(t, a, node);
            bool want = n.kind == Ltl::Kind::Next
                            ? val(t2, a2, n.kids[0])
                            : val(t, a, n.kids[1]) || (val(t, a, n.kids[0]) && val(t2, a2, node));
            if (now != want) return false;
        }
        return true;
    }

    bool in_set(size_t t, int a, int c) const {
        if (untils_.empty()) return true;
        int node = untils_[static_cast<size_t>(c)];
        return !val(t, a, node) || val(t, a, nodes_[static_cast<size_t>(node)].kids[1]);
    }

    int m_;
    int n_letters_;
    std::vector<Node> nodes_;
    std::map<std::string, int> by_key_;
    std::vector<int> temporal_, untils_;
    int root_ = 0;
    std::vector<std::vector<bool>> table_;
};

std::vector<std::vector<int>> successors(const BuchiAutomaton& b) {
    std::vector<std::vector<int>> out(static_cast<size_t>(b.n_states));
    for (int s = 0; s < b.n_states; ++s) {
        for (const auto& ts : b.delta[static_cast<size_t>(s)]) out[static_cast<size_t>(s)].insert(out[static_cast<size_t>(s)].end(), ts.begin(), ts.end());
        auto& v = out[static_cast<size_t>(s)];
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return out;
}

std::vector<bool> reach_from(const std::vector<std::vector<int>>& succ, const std::vector<int>& from, bool strict) {
    std::vector<bool> seen(succ.size());
    std::deque<int> q;
    for (int s : from) {
        if (strict) {
            for (int t : succ[static_cast<size_t>(s)])
                if (!seen[static_cast<size_t>(t)]) seen[static_cast<size_t>(t)] = true, q.push_back(t);
        } else if (!seen[static_cast<size_t>(s)]) {
            seen[static_cast<size_t>(s)] = true;
            q.push_back(s);
        }
    }
    while (!q.empty()) {
        int s = q.front();
        q.pop_front();
        for (int t : succ[static_cast<size_t>(s)])
            if (!seen[static_cast<size_t>(t)]) seen[static_cast<size_t>(t)] = true, q.push_back(t);
    }
    return seen;
}

// Drops states that are unreachable or cannot reach an accepting cycle, then
// merges forward-bisimilar states.
BuchiAutomaton reduce(const BuchiAutomaton& b) {
    auto succ = successors(b);
    auto reach = reach_from(succ, b.initial, false);
    std::vector<bool> good(static_cast<size_t>(b.n_states));
    std::vector<int> on_cycle;
    for (int s = 0; s < b.n_states; ++s)
        if (reach[static_cast<size_t>(s)] && b.accepting[static_cast<size_t>(s)] && reach_from(succ, {s}, true)[static_cast<size_t>(s)])
            on_cycle.push_back(s);
    // Backward reachability to accepting cycles.
    std::vector<std::vector<int>> pred(static_cast<size_t>(b.n_states));
    for (int s = 0; s < b.n_states; ++s)
        for (int t : succ[static_cast<size_t>(s)]) pred[static_cast<size_t>(t)].push_back(s);
    auto live = reach_from(pred, on_cycle, false);
    for (int s = 0; s < b.n_states; ++s) good[static_cast<size_t>(s)] = reach[static_cast<size_t>(s)] && live[static_cast<size_t>(s)];

    // Partition refinement over the good states.
    std::vector<int> cls(static_cast<size_t>(b.n_states), -1);
    for (int s = 0; s < b.n_states; ++s)
        if (good[static_cast<size_t>(s)]) cls[static_cast<size_t>(s)] = b.accepting[static_cast<size_t>(s)] ? 1 : 0;
    for (;;) {
        std::map<std::pair<int, std::vector<std::vector<int>>>, int> sig;
        std::vector<int> next(static_cast<size_t>(b.n_states), -1);
        for (int s = 0; s < b.n_states; ++s) {
            if (!good[static_cast<size_t>(s)]) continue;
            std::vector<std::vector<int>> row;
            for (const auto& ts : b.delta[static_cast<size_t>(s)]) {
                std::vector<int> cs;
                for (int t : ts)
                    if (good[static_cast<size_t>(t)]) cs.push_back(cls[static_cast<size_t>(t)]);
                std::sort(cs.begin(), cs.end());
                cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
                row.push_back(std::move(cs));
            }
            auto key = std::make_pair(cls[static_cast<size_t>(s)], std::move(row));
            auto it = sig.find(key);
            if (it == sig.end()) it = sig.emplace(std::move(key), static_cast<int>(sig.size())).first;
            next[static_cast<size_t>(s)] = it->second;
        }
        size_t before = std::set<int>(cls.begin(), cls.end()).size();
        cls = next;
        if (std::set<int>(cls.begin(), cls.end()).size() == before) break;
    }
    BuchiAutomaton r;
    r.n_letters = b.n_letters;
    int n = 0;
    for (int c : cls) n = std::max(n, c + 1);
    r.n_states = n;
    r.accepting.assign(static_cast<size_t>(n), false);
    r.delta.assign(static_cast<size_t>(n), std::vector<std::vector<int>>(static_cast<size_t>(b.n_letters)));
    for (int s = 0; s < b.n_states; ++s) {
        int c = cls[static_cast<size_t>(s)];
        if (c < 0) continue;
        r.accepting[static_cast<size_t>(c)] = b.accepting[static_cast<size_t>(s)];
        for (int a = 0; a < b.n_letters; ++a)
            for (int t : b.delta[static_cast<size_t>(s)][static_cast<size_t>(a)])
                if (cls[static_cast<size_t>(t)] >= 0) r.delta[static_cast<size_t>(c)][static_cast<size_t>(a)].push_back(cls[static_cast<size_t>(t)]);
    }
    for (auto& row : r.delta)
        for (auto& ts : row) {
            std::sort(ts.begin(), ts.end());
            ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
        }
    for (int s : b.initial)
        if (cls[static_cast<size_t>(s)] >= 0) r.initial.push_back(cls[static_cast<size_t>(s)]);
    std::sort(r.initial.begin(), r.initial.end());
    r.initial.erase(std::unique(r.initial.begin(), r.initial.end()), r.initial.end());
    return r;
}

uint8_t join(uint8_t x, uint8_t y) { return (x == 0 || y == 0) ? 0 : std::max(x, y); }

} // namespace

BuchiAutomaton matrix_to_buchi(const LtlPtr& matrix, int n_commands, int m) {
    if (n_commands < 1 || m < 0) throw PreconditionError("matrix_to_buchi needs at least one command");
    return reduce(Tableau(matrix, n_commands, m).build());
}

bool buchi_accepts_lasso(const BuchiAutomaton& b, const std::vector<int>& u, const std::vector<int>& v) {
    if (v.empty()) throw PreconditionError("lasso loop must be nonempty");
    std::vector<int> w = u;
    w.insert(w.end(), v.begin(), v.end());
    size_t len = w.size();
    auto node = [&](int q, size_t p) { return static_cast<size_t>(q) * len + p; };
    size_t n = static_cast<size_t>(b.n_states) * len;
    std::vector<std::vector<size_t>> succ(n);
    for (int q = 0; q < b.n_states; ++q)
        for (size_t p = 0; p < len; ++p) {
            size_t np = p + 1 < len ? p + 1 : u.size();
            for (int q2 : b.delta[static_cast<size_t>(q)][static_cast<size_t>(w[p])]) succ[node(q, p)].push_back(node(q2, np));
        }
    auto bfs = [&](const std::vector<size_t>& from, bool strict) {
        std::vector<bool> seen(n);
        std::deque<size_t> queue;
        for (size_t s : from) {
            if (strict) {
                for (size_t t : succ[s])
                    if (!seen[t]) seen[t] = true, queue.push_back(t);
            } else {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while (!queue.empty()) {
            size_t s = queue.front();
            queue.pop_front();
            for (size_t t : succ[s])
                if (!seen[t]) seen[t] = true, queue.push_back(t);
        }
        return seen;
    };
    std::vector<size_t> init;
    for (int q : b.initial) init.push_back(node(q, 0));
    auto reach = bfs(init, false);
    for (int q = 0; q < b.n_states; ++q) {
        if (!b.accepting[static_cast<size_t>(q)]) continue;
        for (size_t p = u.size(); p < len; ++p) {
            size_t x = node(q, p);
            if (reach[x] && bfs({x}, true)[x]) return true;
        }
    }
    return false;
}

bool LassoDfa::accepts(const std::vector<int>& word) const {
    int s = start;
    for (int a : word) s = delta[static_cast<size_t>(s)][static_cast<size_t>(a)];
    return accepting[static_cast<size_t>(s)];
}

LassoDfa buchi_lasso_dfa(const BuchiAutomaton& b) {
    size_t n = static_cast<size_t>(b.n_states);
    int L = b.n_letters;
    // Key: tag, reachable set, profile. Tags: 'P' before `$`, 'D' right after,
    // 'R' with a profile, 'X' dead.
    struct State {
        char tag;
        std::vector<uint8_t> set;
        std::vector<uint8_t> prof;
    };
    std::vector<State> states;
    std::map<std::string, int> ids;
    LassoDfa d;
    d.n_letters = L;
    auto key_of = [](const State& s) {
        std::string k(1, s.tag);
        k.append(s.set.begin(), s.set.end());
        k.push_back('|');
        k.append(s.prof.begin(), s.prof.end());
        return k;
    };
    auto accepting = [&](const State& s) {
        if (s.tag != 'R') return false;
        std::vector<uint8_t> c = s.prof;
        for (size_t k = 0; k < n; ++k)
            for (size_t i = 0; i < n; ++i) {
                if (!c[i * n + k]) continue;
                for (size_t j = 0; j < n; ++j) {
                    uint8_t via = join(c[i * n + k], c[k * n + j]);
                    if (via > c[i * n + j]) c[i * n + j] = via;
                }
            }
        for (size_t p = 0; p < n; ++p) {
            if (!s.set[p]) continue;
            for (size_t q = 0; q < n; ++q)
                if ((p == q || c[p * n + q]) && c[q * n + q] == 2) return true;
        }
        return false;
    };
    auto get = [&](State s) {
        std::string k = key_of(s);
        auto it = ids.find(k);
        if (it != ids.end()) return it->second;
        int id = static_cast<int>(states.size());
        ids.emplace(std::move(k), id);
        d.accepting.push_back(accepting(s));
        states.push_back(std::move(s));
        d.delta.emplace_back();
        return id;
    };
    State init{'P', std::vector<uint8_t>(n, 0), {}};
    for (int q : b.initial) init.set[static_cast<size_t>(q)] = 1;
    d.start = get(init);
    for (size_t s = 0; s < states.size(); ++s) {
        std::vector<int> row(static_cast<size_t>(L) + 1);
        for (int a = 0; a <= L; ++a) {
            const State cur = states[s];
            State nxt;
            if (cur.tag == 'X' || (a == L && cur.tag != 'P')) {
                nxt = State{'X', {}, {}};
            } else if (a == L) {
                nxt = State{'D', cur.set, {}};
            } else if (cur.tag == 'P') {
                nxt = State{'P', std::vector<uint8_t>(n, 0), {}};
                for (size_t p = 0; p < n; ++p)
                    if (cur.set[p])
                        for (int q : b.delta[p][static_cast<size_t>(a)]) nxt.set[static_cast<size_t>(q)] = 1;
            } else {
                std::vector<uint8_t> e(n * n, 0);
                for (size_t p = 0; p < n; ++p)
                    for (int q : b.delta[p][static_cast<size_t>(a)])
                        e[p * n + static_cast<size_t>(q)] = b.accepting[static_cast<size_t>(q)] ? 2 : 1;
                nxt = State{'R', cur.set, {}};
                if (cur.tag == 'D') {
                    nxt.prof = std::move(e);
                } else {
                    nxt.prof.assign(n * n, 0);
                    for (size_t p = 0; p < n; ++p)
                        for (size_t q = 0; q < n; ++q) {
                            uint8_t x = cur.prof[p * n + q];
                            if (!x) continue;
                            for (size_t r = 0; r < n; ++r) {
                                uint8_t v = join(x, e[q * n + r]);
                                if (v > nxt.prof[p * n + r]) nxt.prof[p * n + r] = v;
                            }
                        }
                }
            }
            row[static_cast<size_t>(a)] = get(std::move(nxt));
        }
        d.delta[s] = std::move(row);
    }
    d.n_states = static_cast<int>(states.size());
    return minimize_dfa(d);
}

LassoDfa minimize_dfa(const LassoDfa& d) {
    size_t n = static_cast<size_t>(d.n_states);
    std::vector<int> cls(n);
    for (size_t s = 0; s < n; ++s) cls[s] = d.accepting[s] ? 1 : 0;
    size_t count = std::set<int>(cls.begin(), cls.end()).size();
    for (;;) {
        std::map<std::vector<int>, int> sig;
        std::vector<int> next(n);
        for (size_t s = 0; s < n; ++s) {
            std::vector<int> key{cls[s]};
            for (int t : d.delta[s]) key.push_back(cls[static_cast<size_t>(t)]);
            auto it = sig.find(key);
            if (it == sig.end()) it = sig.emplace(std::move(key), static_cast<int>(sig.size())).first;
            next[s] = it->second;
        }
        cls = std::move(next);
        if (sig.size() == count) break;
        count = sig.size();
    }
    // Renumber so the start state is 0 and the rest follow in BFS order.
    std::vector<int> order(count, -1);
    std::vector<size_t> rep(count);
    for (size_t s = 0; s < n; ++s) rep[static_cast<size_t>(cls[s])] = s;
    std::deque<int> q{cls[static_cast<size_t>(d.start)]};
    int next_id = 0;
    order[static_cast<size_t>(q.front())] = next_id++;
    std::vector<int> bfs{q.front()};
    while (!q.empty()) {
        int c = q.front();
        q.pop_front();
        for (int t : d.delta[rep[static_cast<size_t>(c)]]) {
            int ct = cls[static_cast<size_t>(t)];
            if (order[static_cast<size_t>(ct)] < 0) {
                order[static_cast<size_t>(ct)] = next_id++;
                bfs.push_back(ct);
                q.push_back(ct);
            }
        }
    }
    LassoDfa r;
    r.n_letters = d.n_letters;
    r.n_states = next_id;
    r.start = 0;
    r.accepting.resize(static_cast<size_t>(next_id));
    r.delta.resize(static_cast<size_t>(next_id));
    for (int c : bfs) {
        size_t s = rep[static_cast<size_t>(c)];
        size_t id = static_cast<size_t>(order[static_cast<size_t>(c)]);
        r.accepting[id] = d.accepting[s];
        for (int t : d.delta[s]) r.delta[id].push_back(order[static_cast<size_t>(cls[static_cast<size_t>(t)])]);
    }
    return r;
}

std::vector<int> add_lifted_dfa(Qpa& a, const LassoDfa& dfa, int m, const std::string& tag) {
    int dollar = a.dollar();
    if (dollar < 0) throw PreconditionError("QPA alphabet lacks `$`");
    std::vector<int> cmd_of(a.n_letters(), -1);
    int n_cmds = 0;
    for (size_t l = 0; l < a.n_letters(); ++l)
        if (static_cast<int>(l) != dollar) cmd_of[l] = n_cmds++;
    if (dfa.n_letters != n_cmds * (m + 1)) throw PreconditionError("DFA alphabet does not match the QPA alphabet");
    if (m > kMaxArity) throw PreconditionError("too many thread variables in one property matrix");
    size_t n = static_cast<size_t>(dfa.n_states);
    for (const auto& row : dfa.delta)
        if (row.size() != static_cast<size_t>(dfa.n_letters) + 1) throw PreconditionError("DFA is not complete");

    // States that can reach acceptance; only they need predicates.
    std::vector<std::vector<int>> pred(n);
    for (size_t s = 0; s < n; ++s)
        for (int t : dfa.delta[s]) pred[static_cast<size_t>(t)].push_back(static_cast<int>(s));
    std::vector<bool> live(n);
    std::deque<int> q;
    for (size_t s = 0; s < n; ++s)
        if (dfa.accepting[s]) live[s] = true, q.push_back(static_cast<int>(s));
    while (!q.empty()) {
        int s = q.front();
        q.pop_front();
        for (int p : pred[static_cast<size_t>(s)])
            if (!live[static_cast<size_t>(p)]) live[static_cast<size_t>(p)] = true, q.push_back(p);
    }
    std::vector<int> ids(n, -1);
    for (size_t s = 0; s < n; ++s)
        if (live[s]) ids[s] = a.add_pred(tag + std::to_string(s), m, static_cast<int>(s) == dfa.start);
    std::vector<int> args;
    for (int k = 1; k <= m; ++k) args.push_back(k);
    auto sources = [&](size_t target, int letter) {
        std::vector<FormulaPtr> out;
        for (size_t s = 0; s < n; ++s)
            if (live[s] && dfa.delta[s][static_cast<size_t>(letter)] == static_cast<int>(target))
                out.push_back(fm::pred(ids[s], args));
        return fm::disj(std::move(out));
    };
    for (size_t s = 0; s < n; ++s) {
        if (!live[s]) continue;
        for (size_t l = 0; l < a.n_letters(); ++l) {
            if (static_cast<int>(l) == dollar) {
                a.set_delta(ids[s], static_cast<int>(l), sources(s, dfa.dollar()));
                continue;
            }
            int base = cmd_of[l] * (m + 1);
            std::vector<FormulaPtr> cases;
            std::vector<FormulaPtr> other{sources(s, base + m)};
            for (int c = 1; c <= m; ++c) {
                cases.push_back(fm::conj(fm::eq(0, c), sources(s, base + c - 1)));
                other.push_back(fm::ne(0, c));
            }
            cases.push_back(fm::conj(std::move(other)));
            a.set_delta(ids[s], static_cast<int>(l), fm::disj(std::move(cases)));
        }
    }
    return ids;
}

namespace {

FormulaPtr final_disjunction(const LassoDfa& dfa, const std::vector<int>& ids, const std::vector<int>& args) {
    std::vector<FormulaPtr> out;
    for (size_t s = 0; s < ids.size(); ++s)
        if (dfa.accepting[s] && ids[s] >= 0) out.push_back(fm::pred(ids[s], args));
    return fm::disj(std::move(out));
}

// Relativized quantifier: the new variable differs from every variable in scope.
FormulaPtr distinct_quantifier(bool all, int v, const std::vector<int>& scope, FormulaPtr body) {
    std::vector<FormulaPtr> parts;
    for (int u : scope) parts.push_back(all ? fm::eq(v, u) : fm::ne(v, u));
    parts.push_back(std::move(body));
    return all ? fm::forall(v, fm::disj(std::move(parts))) : fm::exists(v, fm::conj(std::move(parts)));
}

std::vector<std::string> commands_of(const std::vector<std::string>& alphabet) {
    std::vector<std::string> out;
    for (const auto& s : alphabet)
        if (s != "$") out.push_back(s);
    if (out.empty()) throw PreconditionError("alphabet has no commands");
    return out;
}

class PropertyBuilder {
public:
    PropertyBuilder(const std::vector<std::string>& alphabet) : cmds_(commands_of(alphabet)) {
        auto letters = cmds_;
        letters.push_back("$");
        qpa_ = Qpa(letters);
    }

    FormulaPtr build(const QuantTree& t, std::map<int, int>& scope) {
        switch (t.kind) {
        case QuantTree::Kind::Leaf: {
            int m = static_cast<int>(t.reps.size());
            std::string key = std::to_string(m) + ":" + ltl_str(t.matrix);
            auto it = leaves_.find(key);
            if (it == leaves_.end()) {
                LassoDfa dfa = buchi_lasso_dfa(matrix_to_buchi(t.matrix, static_cast<int>(cmds_.size()), m));
                std::string tag = "L" + std::to_string(leaves_.size()) + "_";
                auto ids = add_lifted_dfa(qpa_, dfa, m, tag);
                it = leaves_.emplace(key, std::make_pair(std::move(dfa), std::move(ids))).first;
            }
            std::vector<int> args;
            for (int r : t.reps) args.push_back(scope.at(r));
            return final_disjunction(it->second.first, it->second.second, args);
        }
        case QuantTree::Kind::And:
        case QuantTree::Kind::Or: {
            std::vector<FormulaPtr> kids;
            for (const auto& k : t.kids) kids.push_back(build(k, scope));
            return t.kind == QuantTree::Kind::And ? fm::conj(std::move(kids)) : fm::disj(std::move(kids));
        }
        case QuantTree::Kind::Forall:
        case QuantTree::Kind::Exists: {
            std::vector<int> outer;
            for (const auto& [r, v] : scope)
                if (r < t.rep) outer.push_back(v);
            int v = fresh_var();
            scope[t.rep] = v;
            FormulaPtr body = build(t.kids[0], scope);
            scope.erase(t.rep);
            return distinct_quantifier(t.kind == QuantTree::Kind::Forall, v, outer, std::move(body));
        }
        }
        return fm::ff();
    }

    Qpa& qpa() { return qpa_; }

private:
    std::vector<std::string> cmds_;
    Qpa qpa_;
    std::map<std::string, std::pair<LassoDfa, std::vector<int>>> leaves_;
};

} // namespace

Qpa lift_dfa_to_qpa(const LassoDfa& dfa, const std::vector<Quantifier>& prefix, const std::vector<std::string>& alphabet) {
    auto letters = commands_of(alphabet);
    letters.push_back("$");
    Qpa a(letters);
    int k = static_cast<int>(prefix.size());
    auto ids = add_lifted_dfa(a, dfa, k, "q");
    std::vector<int> vars;
    for (int j = 0; j < k; ++j) vars.push_back(fresh_var());
    FormulaPtr f = final_disjunction(dfa, ids, vars);
    for (int j = k - 1; j >= 0; --j) {
        std::vector<int> scope(vars.begin(), vars.begin() + j);
        f = distinct_quantifier(prefix[static_cast<size_t>(j)] == Quantifier::Forall, vars[static_cast<size_t>(j)], scope, f);
    }
    a.start = f;
    return a;
}

Qpa property_qpa(const QltlPtr& f, const std::vector<std::string>& alphabet) {
    PropertyBuilder b(alphabet);
    std::vector<FormulaPtr> disjuncts;
    for (const auto& t : normalize_to_prenex_disjuncts(f)) {
        std::map<int, int> scope;
        disjuncts.push_back(b.build(t, scope));
    }
    b.qpa().start = fm::disj(std::move(disjuncts));
    return b.qpa();
}

} // namespace wfps
