#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wfps {

// Minimal s-expression, enough for check-sat answers and models.
struct SExpr {
    std::string atom; // empty for lists
    std::vector<SExpr> items;
    bool is_list() const { return atom.empty(); }
};

std::vector<SExpr> parse_sexprs(const std::string& text);

enum class SatResult { Sat, Unsat, Unknown };

struct SmtAnswer {
    SatResult result = SatResult::Unknown;
    std::map<std::string, int64_t> model; // integer constants only
};

// Persistent solver subprocess driven over stdin/stdout. Every query runs
// inside push/pop; answers are cached by query text.
class SmtClient {
public:
    SmtClient(std::string command, std::string logic);
    ~SmtClient();
    SmtClient(const SmtClient&) = delete;
    SmtClient& operator=(const SmtClient&) = delete;

    // `script` holds declarations and assertions; throws Error on process failure.
    SmtAnswer check(const std::string& script, bool want_model);
    const std::string& command() const { return command_; }

private:
    void start();
    void stop();
    void send(const std::string& text);
    std::string read_line();
    std::string read_sexpr();

    std::string command_;
    std::string logic_;
    int to_child_ = -1;
    int from_child_ = -1;
    int pid_ = -1;
    std::string buffer_;
    std::map<std::pair<std::string, bool>, SmtAnswer> cache_;
};

// Quoted SMT-LIB symbol for an arbitrary name.
std::string smt_symbol(const std::string& name);

// Looks for a usable solver on PATH; returns its command line.
std::optional<std::string> default_prover();

} // namespace wfps
