#include "wfps/qpa.hpp"
#include "wfps/smt.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace wfps {

namespace {

std::vector<Fact> all_facts(const Qpa& a, const std::vector<int>& universe) {
    std::vector<Fact> out;
    for (size_t q = 0; q < a.n_preds(); ++q) {
        std::vector<int> args(static_cast<size_t>(a.arity[q]), 0);
        std::vector<size_t> idx(args.size(), 0);
        for (;;) {
            for (size_t k = 0; k < args.size(); ++k) args[k] = universe[idx[k]];
            out.push_back(make_fact(static_cast<int>(q), args));
            size_t k = 0;
            for (; k < idx.size(); ++k) {
                if (++idx[k] < universe.size()) break;
                idx[k] = 0;
            }
            if (k == idx.size()) break;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string smt_formula(const Qpa& a, const FormulaPtr& f) {
    auto var = [](int v) { return smt_symbol("v" + std::to_string(v)); };
    switch (f->kind) {
    case Formula::Kind::True: return "true";
    case Formula::Kind::False: return "false";
    case Formula::Kind::Pred: {
        std::string p = smt_symbol("p_" + a.preds[static_cast<size_t>(f->pred)]);
        if (f->args.empty()) return p;
        std::string out = "(" + p;
        for (int v : f->args) out += " " + var(v);
        return out + ")";
    }
    case Formula::Kind::Eq: return "(= " + var(f->args[0]) + " " + var(f->args[1]) + ")";
    case Formula::Kind::Ne: return "(not (= " + var(f->args[0]) + " " + var(f->args[1]) + "))";
    case Formula::Kind::And:
    case Formula::Kind::Or: {
        std::string out = f->kind == Formula::Kind::And ? "(and" : "(or";
        for (const auto& k : f->kids) out += " " + smt_formula(a, k);
        return out + ")";
    }
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
        return std::string(f->kind == Formula::Kind::Forall ? "(forall ((" : "(exists ((") + var(f->var) + " T)) " +
               smt_formula(a, f->kids[0]) + ")";
    }
    return "true";
}

std::string smt_entailment_query(const Qpa& a, const FormulaPtr& phi, const FormulaPtr& psi) {
    std::ostringstream os;
    os << "(set-option :timeout 10000)\n(declare-sort T 0)\n";
    for (size_t q = 0; q < a.n_preds(); ++q) {
        os << "(declare-fun " << smt_symbol("p_" + a.preds[q]) << " (";
        for (int k = 0; k < a.arity[q]; ++k) os << (k ? " T" : "T");
        os << ") Bool)\n";
    }
    os << "(assert " << smt_formula(a, phi) << ")\n";
    os << "(assert (not " << smt_formula(a, psi) << "))\n";
    return os.str();
}

} // namespace

// phi and psi are positive, so a counter-model exists on a universe iff one of
// the minimal models of phi falsifies psi.
std::optional<Configuration> find_countermodel(const Qpa& a, const FormulaPtr& phi, const FormulaPtr& psi,
                                               const CertificateOptions& opts, bool& exhaustive) {
    exhaustive = true;
    for (int n = 1; n <= opts.max_universe; ++n) {
        std::vector<int> universe;
        for (int t = 1; t <= n; ++t) universe.push_back(t);
        QpaRunner r(a, universe);
        try {
            std::vector<std::pair<int, int>> env;
            for (auto& c : r.ground(phi, env)) {
                Configuration cfg{universe, std::move(c)};
                if (!eval_qpa_formula(a, cfg, {}, psi)) return cfg;
            }
            continue;
        } catch (const ResourceLimit&) {
        }
        // Grounding blew up: fall back to enumeration or sampling of fact sets.
        auto facts = all_facts(a, universe);
        auto check = [&](const std::vector<Fact>& chosen) -> std::optional<Configuration> {
            Configuration cfg{universe, chosen};
            if (eval_qpa_formula(a, cfg, {}, phi) && !eval_qpa_formula(a, cfg, {}, psi)) return cfg;
            return std::nullopt;
        };
        if (facts.size() <= opts.fact_limit) {
            for (uint64_t mask = 0; mask < (uint64_t{1} << facts.size()); ++mask) {
                std::vector<Fact> chosen;
                for (size_t k = 0; k < facts.size(); ++k)
                    if (mask >> k & 1) chosen.push_back(facts[k]);
                if (auto c = check(chosen)) return c;
            }
        } else {
            exhaustive = false;
            std::mt19937_64 rng(0x5eed + static_cast<uint64_t>(n));
            for (size_t s = 0; s < opts.samples; ++s) {
                std::vector<Fact> chosen;
                for (Fact f : facts)
                    if (rng() & 1) chosen.push_back(f);
                if (auto c = check(chosen)) return c;
            }
        }
    }
    return std::nullopt;
}

CertificateResult check_emptiness_certificate(const Qpa& a, const FormulaPtr& cert, const CertificateOptions& opts) {
    if (!free_vars(cert).empty()) throw PreconditionError("certificate must be a closed formula");
    struct Obligation {
        std::string condition;
        std::optional<int> letter;
        FormulaPtr lhs, rhs;
    };
    std::vector<Obligation> obligations;
    obligations.push_back({"Initialization", std::nullopt, a.start, cert});
    for (int l = 0; l < static_cast<int>(a.n_letters()); ++l)
        obligations.push_back({"Consecution", l, symbolic_post(a, cert, l), cert});
    std::vector<FormulaPtr> nonfinal;
    for (size_t q = 0; q < a.n_preds(); ++q) {
        if (a.accepting[q]) continue;
        std::vector<int> vs;
        for (int k = 0; k < a.arity[q]; ++k) vs.push_back(fresh_var());
        nonfinal.push_back(fm::exists(vs, fm::pred(static_cast<int>(q), vs)));
    }
    obligations.push_back({"Rejection", std::nullopt, cert, fm::disj(std::move(nonfinal))});

    CertificateResult res;
    bool all_exhaustive = true;
    for (const auto& ob : obligations) {
        bool exhaustive = true;
        if (auto cm = find_countermodel(a, ob.lhs, ob.rhs, opts, exhaustive)) {
            res.kind = CertificateResult::Kind::Rejected;
            res.condition = ob.condition;
            res.letter = ob.letter;
            res.witness = cm;
            return res;
        }
        all_exhaustive = all_exhaustive && exhaustive;
    }
    std::string bound_note = "no counter-model on universes up to size " + std::to_string(opts.max_universe) +
                             (all_exhaustive ? "" : " (partly sampled)");
    if (!opts.prover) {
        res.kind = CertificateResult::Kind::BoundedOnly;
        res.note = bound_note + "; no prover configured";
        return res;
    }
    try {
        SmtClient client(*opts.prover, "UF");
        for (const auto& ob : obligations) {
            auto ans = client.check(smt_entailment_query(a, ob.lhs, ob.rhs), false);
            if (ans.result == SatResult::Unsat) continue;
            std::string where = ob.condition + (ob.letter ? " on " + a.letters[static_cast<size_t>(*ob.letter)] : "");
            if (ans.result == SatResult::Sat) {
                res.kind = CertificateResult::Kind::Rejected;
                res.condition = ob.condition;
                res.letter = ob.letter;
                res.note = "prover found a counter-model larger than the bounded search for " + where;
                return res;
            }
            res.kind = CertificateResult::Kind::BoundedOnly;
            res.note = bound_note + "; prover could not decide " + where;
            return res;
        }
    } catch (const Error& e) {
        res.kind = CertificateResult::Kind::BoundedOnly;
        res.note = bound_note + "; prover failed: " + e.what();
        return res;
    }
    res.kind = CertificateResult::Kind::Accepted;
    res.note = "all entailments proved valid by the prover";
    return res;
}

} // namespace wfps
