#include "wfps/smt.hpp"

#include "wfps/error.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace wfps {

namespace {

void tokenize_sexpr(const std::string& text, std::vector<std::string>& out) {
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '(' || c == ')') {
            out.emplace_back(1, c);
            ++i;
        } else if (c == '|') {
            size_t j = text.find('|', i + 1);
            if (j == std::string::npos) j = text.size() - 1;
            out.push_back(text.substr(i + 1, j - i - 1));
            i = j + 1;
        } else if (c == '"') {
            size_t j = text.find('"', i + 1);
            if (j == std::string::npos) j = text.size() - 1;
            out.push_back(text.substr(i, j - i + 1));
            i = j + 1;
        } else if (c == ';') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else {
            size_t j = i;
            while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '(' &&
                   text[j] != ')')
                ++j;
            out.push_back(text.substr(i, j - i));
            i = j;
        }
    }
}

SExpr build(const std::vector<std::string>& toks, size_t& pos) {
    SExpr e;
    if (toks[pos] != "(") {
        e.atom = toks[pos++];
        return e;
    }
    ++pos;
    while (pos < toks.size() && toks[pos] != ")") e.items.push_back(build(toks, pos));
    if (pos < toks.size()) ++pos;
    return e;
}

std::optional<int64_t> int_value(const SExpr& e) {
    try {
        if (!e.is_list()) return std::stoll(e.atom);
        if (e.items.size() == 2 && e.items[0].atom == "-") {
            auto v = int_value(e.items[1]);
            if (v) return -*v;
        }
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

} // namespace

std::vector<SExpr> parse_sexprs(const std::string& text) {
    std::vector<std::string> toks;
    tokenize_sexpr(text, toks);
    std::vector<SExpr> out;
    size_t pos = 0;
    while (pos < toks.size()) {
        if (toks[pos] == ")") {
            ++pos;
            continue;
        }
        out.push_back(build(toks, pos));
    }
    return out;
}

std::string smt_symbol(const std::string& name) { return "|" + name + "|"; }

std::optional<std::string> default_prover() {
    const char* path = std::getenv("PATH");
    if (!path) return std::nullopt;
    std::stringstream ss(path);
    std::string dir;
    while (std::getline(ss, dir, ':')) {
        std::filesystem::path p = std::filesystem::path(dir) / "z3";
        std::error_code ec;
        if (std::filesystem::exists(p, ec) && ::access(p.c_str(), X_OK) == 0) return p.string() + " -in -smt2";
    }
    return std::nullopt;
}

SmtClient::SmtClient(std::string command, std::string logic) : command_(std::move(command)), logic_(std::move(logic)) {
    start();
}

SmtClient::~SmtClient() { stop(); }

void SmtClient::start() {
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) throw Error("prover: pipe failed");
    pid_t pid = fork();
    if (pid < 0) throw Error("prover: fork failed");
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    pid_ = pid;
    std::signal(SIGPIPE, SIG_IGN);
    send("(set-option :print-success false)\n(set-logic " + logic_ + ")\n");
}

void SmtClient::stop() {
    if (pid_ < 0) return;
    if (to_child_ >= 0) {
        const char* bye = "(exit)\n";
        [[maybe_unused]] auto n = ::write(to_child_, bye, std::strlen(bye));
        close(to_child_);
    }
    if (from_child_ >= 0) close(from_child_);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
    to_child_ = from_child_ = -1;
}

void SmtClient::send(const std::string& text) {
    size_t off = 0;
    while (off < text.size()) {
        ssize_t n = ::write(to_child_, text.data() + off, text.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error("prover: write failed (is '" + command_ + "' a working solver?)");
        }
        off += static_cast<size_t>(n);
    }
}

std::string SmtClient::read_line() {
    for (;;) {
        auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            return line;
        }
        char tmp[4096];
        ssize_t n = ::read(from_child_, tmp, sizeof tmp);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) throw Error("prover: unexpected end of output");
        buffer_.append(tmp, static_cast<size_t>(n));
    }
}

std::string SmtClient::read_sexpr() {
    std::string out;
    int depth = 0;
    bool started = false;
    for (;;) {
        std::string line = read_line();
        for (char c : line) {
            if (c == '(') {
                ++depth;
                started = true;
            } else if (c == ')') {
                --depth;
            }
        }
        out += line;
        out += '\n';
        if (started && depth <= 0) return out;
    }
}

SmtAnswer SmtClient::check(const std::string& script, bool want_model) {
    auto key = std::make_pair(script, want_model);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    send("(push 1)\n" + script + "\n(check-sat)\n");
    std::string line = read_line();
    SmtAnswer ans;
    if (line.find("unsat") != std::string::npos) {
        ans.result = SatResult::Unsat;
    } else if (line.find("sat") != std::string::npos && line.find("error") == std::string::npos) {
        ans.result = SatResult::Sat;
    } else if (line.find("unknown") != std::string::npos) {
        ans.result = SatResult::Unknown;
    } else {
        send("(pop 1)\n");
        throw Error("prover: unexpected answer: " + line);
    }
    if (ans.result == SatResult::Sat && want_model) {
        send("(get-model)\n");
        std::string model = read_sexpr();
        for (const auto& top : parse_sexprs(model)) {
            for (const auto& def : top.items) {
                if (!def.is_list() || def.items.size() < 5 || def.items[0].atom != "define-fun") continue;
                if (auto v = int_value(def.items[4])) ans.model[def.items[1].atom] = *v;
            }
        }
    }
    send("(pop 1)\n");
    cache_[key] = ans;
    return ans;
}

} // namespace wfps
