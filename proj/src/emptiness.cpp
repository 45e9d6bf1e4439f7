#include "wfps/qpa.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <unordered_map>

namespace wfps {

namespace {

using LetterKey = std::pair<int, int>;

LetterKey letter_key(const Qpa& a, const QLetter& l) { return {l.letter == a.dollar() ? INT_MAX : l.letter, l.tid}; }

bool word_less(const Qpa& a, const QWord& x, const QWord& y) {
    if (x.size() != y.size()) return x.size() < y.size();
    for (size_t k = 0; k < x.size(); ++k) {
        auto kx = letter_key(a, x[k]), ky = letter_key(a, y[k]);
        if (kx != ky) return kx < ky;
    }
    return false;
}

// Visited configurations indexed by their smallest fact; a query asks
// whether some stored set is contained in the candidate.
class SubsumptionIndex {
public:
    bool subsumed(const Clause& c) const {
        if (has_empty_) return true;
        for (Fact f : c) {
            auto it = by_first_.find(f);
            if (it == by_first_.end()) continue;
            for (const auto& s : it->second)
                if (s.size() <= c.size() && std::includes(c.begin(), c.end(), s.begin(), s.end())) return true;
        }
        return false;
    }
    void add(const Clause& c) {
        if (c.empty()) {
            has_empty_ = true;
            return;
        }
        by_first_[c.front()].push_back(c);
    }

private:
    bool has_empty_ = false;
    std::unordered_map<Fact, std::vector<Clause>> by_first_;
};

struct Node {
    Clause facts;
    int parent;
    QLetter letter;
};

struct SearchOutcome {
    bool found = false;
    QWord word;
};

class Search {
public:
    Search(const Qpa& a, int n, int len_max, const EmptinessOptions& opts, size_t& nodes,
           std::chrono::steady_clock::time_point t0)
        : a_(a), runner_(a, universe(n)), len_max_(len_max), opts_(opts), nodes_(nodes), t0_(t0) {
        for (int l = 0; l < static_cast<int>(a.n_letters()); ++l)
            for (int t = 1; t <= n; ++t) letters_.push_back({l, t});
        std::sort(letters_.begin(), letters_.end(),
                  [&](const QLetter& x, const QLetter& y) { return letter_key(a, x) < letter_key(a, y); });
    }

    SearchOutcome run() {
        std::vector<int> level;
        for (auto& c : runner_.initial()) admit(std::move(c), -1, {}, level);
        for (int depth = 0;; ++depth) {
            for (int id : level)
                if (runner_.accepting(arena_[static_cast<size_t>(id)].facts)) return {true, word_of(id)};
            if (depth >= len_max_ || level.empty()) return {};
            std::vector<int> next;
            for (const auto& l : letters_) {
                for (int id : level) {
                    check_time();
                    auto succ = runner_.step(arena_[static_cast<size_t>(id)].facts, l.letter, l.tid);
                    for (auto& c : succ) admit(std::move(c), id, l, next);
                }
            }
            level = std::move(next);
        }
    }

private:
    static std::vector<int> universe(int n) {
        std::vector<int> u;
        for (int t = 1; t <= n; ++t) u.push_back(t);
        return u;
    }

    void admit(Clause c, int parent, QLetter l, std::vector<int>& level) {
        if (visited_.subsumed(c)) return;
        if (++nodes_ > opts_.node_limit) throw ResourceLimit("node limit of " + std::to_string(opts_.node_limit) + " reached");
        visited_.add(c);
        arena_.push_back(Node{std::move(c), parent, l});
        level.push_back(static_cast<int>(arena_.size()) - 1);
    }

    // Letters are prepended while reading right to left, so the node's own
    // letter is leftmost.
    QWord word_of(int id) const {
        QWord w;
        for (int k = id; arena_[static_cast<size_t>(k)].parent != -1; k = arena_[static_cast<size_t>(k)].parent)
            w.push_back(arena_[static_cast<size_t>(k)].letter);
        return w;
    }

    void check_time() const {
        if (opts_.time_limit_s <= 0) return;
        double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        if (el > opts_.time_limit_s) throw ResourceLimit("time limit reached");
    }

    const Qpa& a_;
    QpaRunner runner_;
    int len_max_;
    const EmptinessOptions& opts_;
    size_t& nodes_;
    std::chrono::steady_clock::time_point t0_;
    std::vector<QLetter> letters_;
    std::vector<Node> arena_;
    SubsumptionIndex visited_;
};

} // namespace

EmptinessResult bounded_emptiness(const Qpa& a, const EmptinessOptions& opts) {
    if (opts.n_max < 1 || opts.len_max < 1) throw PreconditionError("emptiness bounds must be at least 1");
    EmptinessResult res;
    res.n_max = opts.n_max;
    res.len_max = opts.len_max;
    auto t0 = std::chrono::steady_clock::now();
    std::optional<QWord> best;
    int best_n = 0;
    try {
        for (int n = 1; n <= opts.n_max; ++n) {
            int bound = best ? static_cast<int>(best->size()) : opts.len_max;
            Search s(a, n, bound, opts, res.nodes, t0);
            SearchOutcome out = s.run();
            if (out.found && (!best || word_less(a, out.word, *best))) {
                best = out.word;
                best_n = n;
            }
        }
    } catch (const ResourceLimit& e) {
        res.kind = EmptinessResult::Kind::ResourceLimit;
        res.note = e.what();
        if (best) {
            res.kind = EmptinessResult::Kind::Counterexample;
            res.word = *best;
            res.universe = best_n;
            res.note += "; the counterexample is genuine but may not be length-lex minimal";
        }
        return res;
    }
    if (best) {
        res.kind = EmptinessResult::Kind::Counterexample;
        res.word = *best;
        res.universe = best_n;
    }
    return res;
}

} // namespace wfps
