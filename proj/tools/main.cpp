#include "wfps/engine.hpp"
#include "wfps/error.hpp"
#include "wfps/program_qpa.hpp"
#include "wfps/proof_space.hpp"
#include "wfps/qltl.hpp"
#include "wfps/smt.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace wfps;
using json = nlohmann::json;

namespace {

constexpr int kYes = 0;
constexpr int kCounterexample = 1;
constexpr int kUnknown = 2;
constexpr int kUsage = 3;

struct RunConfig {
    std::string program;
    std::string property;
    std::string basis;
    std::string certificate;
    std::string qpa;
    std::string dump_basis;
    int n_max = 2;
    int stem_max = 0;
    int loop_max = 0;
    int len_max = 8;
    int max_iterations = 64;
    std::string havoc_range = "-8:8";
    std::string prover;
    std::string format = "text";
    std::string lasso;
};

struct UsageError : Error {
    using Error::Error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::optional<std::string> prover_of(const RunConfig& cfg) {
    if (cfg.prover == "none") return std::nullopt;
    if (!cfg.prover.empty()) return cfg.prover;
    return default_prover();
}

HavocRange havoc_of(const RunConfig& cfg) {
    auto colon = cfg.havoc_range.find(':', 1);
    if (colon == std::string::npos) throw UsageError("--havoc-range expects lo:hi");
    try {
        HavocRange r{std::stoll(cfg.havoc_range.substr(0, colon)), std::stoll(cfg.havoc_range.substr(colon + 1))};
        if (r.lo > r.hi) throw UsageError("--havoc-range: lo exceeds hi");
        return r;
    } catch (const std::logic_error&) {
        throw UsageError("--havoc-range expects lo:hi");
    }
}

int effective_len(const RunConfig& cfg) {
    if (cfg.stem_max > 0 && cfg.loop_max > 0) return std::min(cfg.len_max, cfg.stem_max + cfg.loop_max + 1);
    return cfg.len_max;
}

OracleConfig oracle_of(const RunConfig& cfg) {
    OracleConfig oc;
    oc.prover = prover_of(cfg);
    HavocRange r = havoc_of(cfg);
    oc.havoc_span = std::max<int64_t>(1, r.hi - r.lo + 1);
    return oc;
}

QltlPtr load_property(const Program& p, const RunConfig& cfg) {
    if (cfg.property.empty()) return nullptr;
    return parse_qltl(read_file(cfg.property), program_alphabet(p));
}

void emit(const RunConfig& cfg, const json& j, const std::string& text) {
    if (cfg.format == "json") std::cout << j.dump(2) << "\n";
    else std::cout << text;
}

std::string emptiness_kind(const EmptinessResult& r) {
    switch (r.kind) {
    case EmptinessResult::Kind::EmptyUpTo: return "EmptyUpTo";
    case EmptinessResult::Kind::Counterexample: return "Counterexample";
    case EmptinessResult::Kind::ResourceLimit: return "ResourceLimit";
    }
    return "?";
}

std::string cert_kind(const CertificateResult& r) {
    switch (r.kind) {
    case CertificateResult::Kind::Accepted: return "Accepted";
    case CertificateResult::Kind::Rejected: return "Rejected";
    case CertificateResult::Kind::BoundedOnly: return "BoundedOnly";
    }
    return "?";
}

json cert_json(const Qpa& a, const CertificateResult& r) {
    json j{{"result", cert_kind(r)}, {"note", r.note}};
    if (!r.condition.empty()) j["condition"] = r.condition;
    if (r.letter) j["letter"] = a.letters.at(static_cast<size_t>(*r.letter));
    if (r.witness) j["witness"] = config_str(a, *r.witness);
    return j;
}

std::string cert_text(const Qpa& a, const CertificateResult& r) {
    std::string out = "certificate: " + cert_kind(r);
    if (!r.condition.empty()) out += " (" + r.condition + ")";
    out += "\n";
    if (r.letter) out += "letter: " + a.letters.at(static_cast<size_t>(*r.letter)) + "\n";
    if (r.witness) out += "witness: " + config_str(a, *r.witness) + "\n";
    if (!r.note.empty()) out += "note: " + r.note + "\n";
    return out;
}

int cert_exit(const CertificateResult& r) {
    switch (r.kind) {
    case CertificateResult::Kind::Accepted: return kYes;
    case CertificateResult::Kind::Rejected: return kCounterexample;
    case CertificateResult::Kind::BoundedOnly: return kUnknown;
    }
    return kUnknown;
}

std::string bound_str(const EmptinessResult& r) {
    return "(" + std::to_string(r.n_max) + "," + std::to_string(r.len_max) + ")";
}

int cmd_check(const RunConfig& cfg) {
    Program p = parse_program(read_file(cfg.program));
    QltlPtr prop = load_property(p, cfg);
    EmptinessOptions eo;
    eo.n_max = cfg.n_max;
    eo.len_max = effective_len(cfg);

    if (!cfg.basis.empty()) {
        Basis b = parse_basis(p, read_file(cfg.basis));
        Qpa a = inclusion_qpa(p, prop, b);
        EmptinessResult r = bounded_emptiness(a, eo);
        json j{{"mode", "inclusion"}, {"result", emptiness_kind(r)}, {"n_max", r.n_max}, {"len_max", r.len_max},
               {"nodes", r.nodes}};
        std::string text = "inclusion check with " + std::to_string(b.triples.size()) + " triples and " +
                           std::to_string(b.rankings.size()) + " ranking formulas\n";
        int code = kUnknown;
        if (r.kind == EmptinessResult::Kind::EmptyUpTo) {
            text += "result: EmptyUpTo" + bound_str(r) + "\n";
            code = kYes;
            if (!cfg.certificate.empty()) {
                CertificateOptions co;
                co.prover = prover_of(cfg);
                CertificateResult cr = check_emptiness_certificate(a, parse_qpa_formula(a, read_file(cfg.certificate)), co);
                j["certificate"] = cert_json(a, cr);
                text += cert_text(a, cr);
            }
        } else if (r.kind == EmptinessResult::Kind::Counterexample) {
            auto l = decode_lasso(p, r.word);
            std::string ls = l ? lasso_str(p, *l) : qword_str(a, r.word);
            j["lasso"] = ls;
            j["universe"] = r.universe;
            text += "result: Counterexample\nlasso: " + ls + "\n";
            code = kCounterexample;
        } else {
            j["note"] = r.note;
            text += "result: ResourceLimit\nnote: " + r.note + "\n";
        }
        emit(cfg, j, text);
        return code;
    }

    EngineOptions opts;
    opts.n_max = cfg.n_max;
    opts.len_max = effective_len(cfg);
    opts.max_iterations = cfg.max_iterations;
    opts.oracle = oracle_of(cfg);
    opts.feasibility.range = havoc_of(cfg);
    if (!cfg.certificate.empty()) opts.certificate = read_file(cfg.certificate);
    Verdict v = run_algorithm1(p, prop, opts);

    std::string verdict(verdict_name(v.kind));
    json j{{"mode", "auto"}, {"verdict", verdict}, {"iterations", v.iterations}, {"basis", basis_str(p, v.basis)}};
    std::ostringstream text;
    text << "verdict: " << verdict;
    if (v.kind == Verdict::Kind::Yes) text << " EmptyUpTo" << bound_str(v.emptiness);
    text << "\niterations: " << v.iterations << "\n";
    json samples = json::array();
    for (const auto& s : v.samples) {
        samples.push_back(lasso_str(p, s));
        text << "sampled: " << lasso_str(p, s) << "\n";
    }
    j["samples"] = samples;
    if (v.kind == Verdict::Kind::Yes) {
        j["n_max"] = v.emptiness.n_max;
        j["len_max"] = v.emptiness.len_max;
    }
    if (v.certificate) {
        Qpa a = inclusion_qpa(p, prop, v.basis);
        j["certificate"] = cert_json(a, *v.certificate);
        text << cert_text(a, *v.certificate);
    }
    if (v.kind == Verdict::Kind::No) {
        j["lasso"] = lasso_str(p, *v.lasso);
        j["witness"] = witness_str(p, *v.lasso, *v.witness);
        text << "lasso: " << lasso_str(p, *v.lasso) << "\nrecurrent execution:\n" << witness_str(p, *v.lasso, *v.witness);
    } else if (v.kind == Verdict::Kind::Unknown && v.lasso) {
        j["lasso"] = lasso_str(p, *v.lasso);
        text << "lasso: " << lasso_str(p, *v.lasso) << "\n";
    }
    if (!v.note.empty()) {
        j["note"] = v.note;
        text << "note: " << v.note << "\n";
    }
    text << "basis:\n" << basis_str(p, v.basis);
    if (!cfg.dump_basis.empty()) {
        std::ofstream out(cfg.dump_basis);
        if (!out) throw UsageError("cannot write " + cfg.dump_basis);
        out << basis_str(p, v.basis);
    }
    emit(cfg, j, text.str());
    switch (v.kind) {
    case Verdict::Kind::Yes: return kYes;
    case Verdict::Kind::No: return kCounterexample;
    default: return kUnknown;
    }
}

int cmd_certificate(const RunConfig& cfg) {
    Qpa a;
    if (!cfg.qpa.empty()) {
        a = parse_qpa(read_file(cfg.qpa));
    } else {
        if (cfg.program.empty()) throw UsageError("certificate needs --qpa or --program");
        Program p = parse_program(read_file(cfg.program));
        Basis b = cfg.basis.empty() ? Basis{} : parse_basis(p, read_file(cfg.basis));
        a = inclusion_qpa(p, load_property(p, cfg), b);
    }
    CertificateOptions co;
    co.prover = prover_of(cfg);
    CertificateResult r = check_emptiness_certificate(a, parse_qpa_formula(a, read_file(cfg.certificate)), co);
    emit(cfg, cert_json(a, r), cert_text(a, r));
    return cert_exit(r);
}

std::string annotated(const Program& p, const std::vector<Assertion>& ann, const Word& w) {
    std::string out;
    for (size_t k = 0; k < ann.size(); ++k) {
        out += "  {" + ann[k].str() + "}\n";
        if (k < w.size()) out += "    " + p.command(w[k].cmd).name + "@" + std::to_string(w[k].thread) + "\n";
    }
    return out;
}

json annotation_json(const std::vector<Assertion>& ann) {
    json j = json::array();
    for (const auto& a : ann) j.push_back(a.str());
    return j;
}

int cmd_lasso(const std::string& sub, const RunConfig& cfg) {
    Program p = parse_program(read_file(cfg.program));
    Lasso l = parse_lasso(p, cfg.lasso);
    if (sub == "program") {
        bool ok = is_program_lasso(p, l);
        emit(cfg, json{{"lasso", lasso_str(p, l)}, {"program_lasso", ok}},
             std::string("program lasso: ") + (ok ? "true" : "false") + "\n");
        return ok ? kYes : kCounterexample;
    }
    if (sub == "member") {
        if (cfg.basis.empty()) throw UsageError("member needs --basis");
        Basis b = parse_basis(p, read_file(cfg.basis));
        bool ok = lasso_in_proof_language(b, l);
        emit(cfg, json{{"lasso", lasso_str(p, l)}, {"member", ok}},
             std::string("member: ") + (ok ? "true" : "false") + "\n");
        return ok ? kYes : kCounterexample;
    }
    ValidityOracle oracle(oracle_of(cfg));
    FeasibilityOptions fo;
    fo.range = havoc_of(cfg);
    ProofOutcome out = find_infeasibility_proof(p, l, oracle, fo);
    if (auto* proof = std::get_if<LassoProof>(&out)) {
        Word whole = l.stem;
        whole.insert(whole.end(), l.loop.begin(), l.loop.end());
        Basis b = extract_basis(p, *proof, l, oracle);
        json j{{"result", "proof"},
               {"invariance", annotation_json(proof->invariance)},
               {"variance", annotation_json(proof->variance)},
               {"ranking", proof->ranking.as_assertion().str()},
               {"basis", basis_str(p, b)}};
        std::string text = "result: termination proof\ninvariance:\n" + annotated(p, proof->invariance, whole) +
                           "variance:\n" + annotated(p, proof->variance, l.loop) +
                           "ranking: " + proof->ranking.as_assertion().str() + "\nbasis:\n" + basis_str(p, b);
        emit(cfg, j, text);
        return kYes;
    }
    if (auto* w = std::get_if<FeasibleWitness>(&out)) {
        emit(cfg, json{{"result", "feasible"}, {"witness", witness_str(p, l, *w)}},
             "result: feasible\nrecurrent execution:\n" + witness_str(p, l, *w));
        return kCounterexample;
    }
    const auto& u = std::get<ProofUnknown>(out);
    emit(cfg, json{{"result", "unknown"}, {"reason", u.reason}}, "result: unknown\nreason: " + u.reason + "\n");
    return kUnknown;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Well-founded proof spaces for parameterized programs"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto common = [&](CLI::App* sc) {
        sc->add_option("--program", cfg.program, "program file");
        sc->add_option("--property", cfg.property, "QLTL property file");
        sc->add_option("--basis", cfg.basis, "basis file");
        sc->add_option("--certificate", cfg.certificate, "emptiness certificate file");
        sc->add_option("--n-max", cfg.n_max, "largest thread universe")->check(CLI::PositiveNumber);
        sc->add_option("--stem-max", cfg.stem_max, "stem length bound")->check(CLI::PositiveNumber);
        sc->add_option("--loop-max", cfg.loop_max, "loop length bound")->check(CLI::PositiveNumber);
        sc->add_option("--len-max", cfg.len_max, "word length bound, `$` included")->check(CLI::PositiveNumber);
        sc->add_option("--havoc-range", cfg.havoc_range, "havoc values lo:hi for concrete execution");
        sc->add_option("--prover", cfg.prover, "SMT prover command, or `none`");
        sc->add_option("--format", cfg.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    };

    CLI::App* check = app.add_subcommand("check", "prove termination or a QLTL property");
    common(check);
    check->add_option("--max-iterations", cfg.max_iterations, "refinement rounds")->check(CLI::PositiveNumber);
    check->add_option("--dump-basis", cfg.dump_basis, "write the final basis to a file");

    CLI::App* cert = app.add_subcommand("certificate", "check an emptiness certificate");
    common(cert);
    cert->add_option("--qpa", cfg.qpa, "QPA file instead of the inclusion automaton");

    CLI::App* lasso = app.add_subcommand("lasso", "operations on a single lasso");
    lasso->require_subcommand(1);
    std::vector<CLI::App*> lasso_subs;
    for (const char* name : {"prove", "member", "program"}) {
        CLI::App* sc = lasso->add_subcommand(name);
        common(sc);
        sc->add_option("lasso", cfg.lasso, "`<cmd>@<tid> ... $ <cmd>@<tid> ...`")->required();
        lasso_subs.push_back(sc);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*check) {
            if (cfg.program.empty()) throw UsageError("check needs --program");
            return cmd_check(cfg);
        }
        if (*cert) {
            if (cfg.certificate.empty()) throw UsageError("certificate needs --certificate");
            return cmd_certificate(cfg);
        }
        for (CLI::App* sc : lasso_subs)
            if (*sc) {
                if (cfg.program.empty()) throw UsageError("lasso needs --program");
                return cmd_lasso(sc->get_name(), cfg);
            }
    } catch (const ResourceLimit& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return kUnknown;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
