#include "wfps/program_qpa.hpp"

namespace wfps {

std::vector<std::string> program_alphabet(const Program& p) {
    std::vector<std::string> out;
    for (const auto& c : p.commands) out.push_back(c.name);
    out.push_back("$");
    return out;
}

Qpa program_lasso_qpa(const Program& p) {
    Qpa a(program_alphabet(p));
    const int n = static_cast<int>(p.locations.size());
    std::vector<int> at(static_cast<size_t>(n));
    std::vector<std::vector<int>> pair(static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(n)));
    for (int l = 0; l < n; ++l)
        at[static_cast<size_t>(l)] = a.add_pred("at_" + p.locations[static_cast<size_t>(l)], 1, l == p.initial);
    for (int l1 = 0; l1 < n; ++l1)
        for (int l2 = 0; l2 < n; ++l2)
            pair[static_cast<size_t>(l1)][static_cast<size_t>(l2)] = a.add_pred(
                "pair_" + p.locations[static_cast<size_t>(l1)] + "_" + p.locations[static_cast<size_t>(l2)], 1);
    const int delta = a.add_pred("Delta", 1);
    const int nodollar = a.add_pred("nodollar", 0);
    const int loc = a.add_pred("loc", 1, true);

    // Variable 0 is the executing thread j, variable 1 the predicate argument i.
    auto ite = [](FormulaPtr then, FormulaPtr other) {
        return fm::disj(fm::conj(fm::eq(1, 0), std::move(then)), fm::conj(fm::ne(1, 0), std::move(other)));
    };
    auto P = [](int q) { return fm::pred(q, {1}); };
    const int dollar = a.dollar();
    for (int c = 0; c < static_cast<int>(p.commands.size()); ++c) {
        const Command& cmd = p.command(c);
        const size_t src = static_cast<size_t>(cmd.src), tgt = static_cast<size_t>(cmd.tgt);
        for (int l1 = 0; l1 < n; ++l1) {
            for (int l2 = 0; l2 < n; ++l2) {
                int q = pair[static_cast<size_t>(l1)][static_cast<size_t>(l2)];
                a.set_delta(q, c,
                            static_cast<size_t>(l1) == tgt ? ite(P(pair[src][static_cast<size_t>(l2)]), P(q))
                                                           : fm::conj(fm::ne(1, 0), P(q)));
            }
            int q = at[static_cast<size_t>(l1)];
            a.set_delta(q, c, static_cast<size_t>(l1) == tgt ? ite(P(at[src]), P(q)) : fm::conj(fm::ne(1, 0), P(q)));
        }
        a.set_delta(delta, c, ite(P(pair[src][tgt]), P(delta)));
        a.set_delta(loc, c, ite(P(at[src]), P(loc)));
        a.set_delta(nodollar, c, fm::tt());
    }
    for (int l = 0; l < n; ++l)
        a.set_delta(pair[static_cast<size_t>(l)][static_cast<size_t>(l)], dollar, P(at[static_cast<size_t>(l)]));
    a.set_delta(delta, dollar, P(loc));
    int i = fresh_var();
    a.start = fm::conj(fm::pred(nodollar, {}), fm::forall(i, fm::pred(delta, {i})));
    return a;
}

QWord encode_word(const Word& w) {
    QWord out;
    for (const auto& ic : w) out.push_back({ic.cmd, ic.thread});
    return out;
}

QWord encode_lasso(const Program& p, const Lasso& l) {
    QWord out = encode_word(l.stem);
    out.push_back({static_cast<int>(p.commands.size()), l.loop.empty() ? 1 : l.loop.front().thread});
    QWord loop = encode_word(l.loop);
    out.insert(out.end(), loop.begin(), loop.end());
    return out;
}

std::optional<Lasso> decode_lasso(const Program& p, const QWord& w) {
    const int dollar = static_cast<int>(p.commands.size());
    Lasso l;
    bool seen = false;
    for (const auto& x : w) {
        if (x.letter == dollar) {
            if (seen) return std::nullopt;
            seen = true;
            continue;
        }
        if (x.letter < 0 || x.letter > dollar) return std::nullopt;
        (seen ? l.loop : l.stem).push_back({x.letter, x.tid});
    }
    if (!seen || l.loop.empty()) return std::nullopt;
    return l;
}

} // namespace wfps
