#include "wfps/program.hpp"

#include "wfps/error.hpp"
#include "wfps/lexer.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <sstream>

namespace wfps {

std::set<Var> Command::reads() const {
    std::set<Var> out;
    for (const auto& [v, t] : assigns)
        for (const auto& [u, c] : t.coeffs) out.insert(u);
    for (const auto& u : guard.vars()) out.insert(u);
    return out;
}

std::set<Var> Command::writes() const {
    std::set<Var> out;
    for (const auto& [v, t] : assigns) out.insert(v);
    if (kind == Kind::Havoc) out.insert(havoc_var);
    return out;
}

std::optional<int> Program::command_index(std::string_view name) const {
    for (size_t i = 0; i < commands.size(); ++i)
        if (commands[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

bool Program::is_global(std::string_view name) const {
    return std::find(globals.begin(), globals.end(), name) != globals.end();
}

bool Program::is_local(std::string_view name) const {
    return std::find(locals.begin(), locals.end(), name) != locals.end();
}

std::set<int> Lasso::threads() const {
    std::set<int> out;
    for (const auto& ic : stem) out.insert(ic.thread);
    for (const auto& ic : loop) out.insert(ic.thread);
    return out;
}

int64_t ProgramState::get(const Var& v) const {
    auto it = vals.find(v);
    if (it == vals.end()) throw Error("unbound variable " + v.str());
    return it->second;
}

Var bind_thread(const Var& v, int thread) {
    return (v.is_local() && v.index == 0) ? v.with_index(thread) : v;
}

LinTerm bind_thread(const LinTerm& t, int thread) {
    return t.map_vars([&](const Var& v) { return bind_thread(v, thread); });
}

Atom bind_thread(const Atom& a, int thread) {
    return a.map_vars([&](const Var& v) { return bind_thread(v, thread); });
}

// ---------------------------------------------------------------- parsing

namespace {

struct Cond {
    LinTerm lhs, rhs;
    Cmp op = Cmp::Eq;
    std::string lhs_text, rhs_text;

    Atom atom() const { return Atom::make(lhs, op, rhs); }
    Atom negated() const { return Atom::make(lhs, negate_cmp(op), rhs); }
    std::string name() const { return "[" + lhs_text + std::string(cmp_text(op)) + rhs_text + "]"; }
    std::string negated_name() const {
        return "[" + lhs_text + std::string(cmp_text(negate_cmp(op))) + rhs_text + "]";
    }
};

struct Stmt {
    enum class Kind { Basic, While, If };
    Kind kind = Kind::Basic;
    Command cmd;
    std::optional<Cond> cond; // nullopt means `true`
    std::vector<Stmt> body;
    std::vector<Stmt> orelse;
};

class ProgramParser {
public:
    ProgramParser(TokenStream& ts, Program& p) : ts_(ts), p_(p) {}

    void declarations() {
        while (ts_.is("global") || ts_.is("local")) {
            bool global = ts_.next().text == "global";
            if (!ts_.accept("int")) ts_.accept("nat");
            do {
                std::string name = ts_.expect_ident();
                if (p_.is_global(name) || p_.is_local(name)) ts_.fail("duplicate declaration of '" + name + "'");
                (global ? p_.globals : p_.locals).push_back(name);
            } while (ts_.accept(","));
            ts_.accept(";");
        }
    }

    std::vector<Stmt> block_until(std::string_view close) {
        std::vector<Stmt> out;
        while (!ts_.at_end() && !ts_.is(close)) {
            if (auto s = statement()) out.push_back(std::move(*s));
        }
        return out;
    }

    std::vector<Stmt> braced() {
        ts_.expect("{");
        auto b = block_until("}");
        ts_.expect("}");
        return b;
    }

    std::optional<Stmt> statement() {
        if (ts_.accept("skip")) {
            ts_.accept(";");
            return std::nullopt;
        }
        if (ts_.is("while")) {
            ts_.next();
            Stmt s;
            s.kind = Stmt::Kind::While;
            ts_.expect("(");
            s.cond = condition();
            ts_.expect(")");
            s.body = braced();
            return s;
        }
        if (ts_.is("if")) {
            ts_.next();
            Stmt s;
            s.kind = Stmt::Kind::If;
            ts_.expect("(");
            s.cond = condition();
            ts_.expect(")");
            s.body = braced();
            if (ts_.accept("else")) s.orelse = braced();
            return s;
        }
        Stmt s;
        s.cmd = basic_command();
        ts_.accept(";");
        return s;
    }

    // Parses assume, increment, assignment or havoc. Leaves src/tgt unset.
    Command basic_command() {
        size_t start = ts_.position();
        Command c;
        if (ts_.accept("assume")) {
            Cond cond = required_condition();
            c.kind = Command::Kind::Assume;
            c.guard.add(cond.atom());
            c.name = cond.name();
            return c;
        }
        if (ts_.accept("[")) {
            Cond cond = required_condition();
            ts_.expect("]");
            c.kind = Command::Kind::Assume;
            c.guard.add(cond.atom());
            c.name = cond.name();
            return c;
        }
        if (ts_.peek().kind != Tok::Ident) ts_.fail("expected statement");
        std::string target = ts_.next().text;
        Var tv = resolve(target);
        if (ts_.accept("++")) {
            c.kind = Command::Kind::Assign;
            c.assigns.push_back({tv, LinTerm::var(tv) + LinTerm(1)});
            c.name = text_since(start);
            return c;
        }
        ts_.expect("=");
        if ((ts_.is("pos") || ts_.is("havoc") || ts_.is("nondet")) && ts_.is("(", 1)) {
            bool pos = ts_.next().text == "pos";
            ts_.expect("(");
            ts_.expect(")");
            c.kind = Command::Kind::Havoc;
            c.havoc_var = tv;
            if (pos) c.lower = 1;
            c.name = text_since(start);
            return c;
        }
        if (ts_.peek().kind == Tok::Ident && ts_.is("++", 1)) {
            Var src = resolve(ts_.next().text);
            ts_.next();
            c.kind = Command::Kind::Assign;
            c.assigns.push_back({tv, LinTerm::var(src)});
            if (src != tv) c.assigns.push_back({src, LinTerm::var(src) + LinTerm(1)});
            c.name = text_since(start);
            return c;
        }
        LinTerm rhs = term();
        c.kind = Command::Kind::Assign;
        c.assigns.push_back({tv, rhs});
        c.name = text_since(start);
        return c;
    }

    std::optional<Cond> condition() {
        if (ts_.accept("true")) return std::nullopt;
        return required_condition();
    }

    Cond required_condition() {
        Cond c;
        size_t s0 = ts_.position();
        c.lhs = term();
        c.lhs_text = text_since(s0);
        auto op = accept_cmp(ts_);
        if (!op) ts_.fail("expected comparison operator");
        c.op = *op;
        size_t s1 = ts_.position();
        c.rhs = term();
        c.rhs_text = text_since(s1);
        return c;
    }

private:
    LinTerm term() {
        return parse_term_with(ts_, [this](TokenStream&, const std::string& name) { return resolve(name); });
    }

    Var resolve(const std::string& name) {
        if (p_.is_global(name)) return Var::global(name);
        if (p_.is_local(name)) return Var::local(name, 0);
        ts_.fail("undeclared variable '" + name + "'");
    }

    std::string text_since(size_t start) const {
        std::string out;
        for (size_t k = start; k < ts_.position(); ++k) out += ts_.at(k).text;
        return out;
    }

    TokenStream& ts_;
    Program& p_;
};

class Compiler {
public:
    explicit Compiler(Program& p) : p_(p) {}

    int new_loc() { return n_locs_++; }
    int n_locs() const { return n_locs_; }

    void edge(Command c, int src, int tgt) {
        c.src = src;
        c.tgt = tgt;
        p_.commands.push_back(std::move(c));
    }

    Command assume(const Atom& a, std::string name) {
        Command c;
        c.kind = Command::Kind::Assume;
        c.guard.add(a);
        c.name = std::move(name);
        return c;
    }

    int block(const std::vector<Stmt>& stmts, int from, std::optional<int> to) {
        int cur = from;
        for (size_t k = 0; k < stmts.size(); ++k) {
            bool last = k + 1 == stmts.size();
            cur = stmt(stmts[k], cur, last ? to : std::nullopt);
        }
        return cur;
    }

    int stmt(const Stmt& s, int from, std::optional<int> to) {
        switch (s.kind) {
        case Stmt::Kind::Basic: {
            int tgt = to ? *to : new_loc();
            edge(s.cmd, from, tgt);
            return tgt;
        }
        case Stmt::Kind::While: {
            int head = from;
            if (s.body.empty()) {
                if (s.cond) {
                    edge(assume(s.cond->atom(), s.cond->name()), head, head);
                } else {
                    Command skip;
                    skip.kind = Command::Kind::Skip;
                    skip.name = "skip";
                    edge(skip, head, head);
                }
            } else if (s.cond) {
                int body_start = new_loc();
                edge(assume(s.cond->atom(), s.cond->name()), head, body_start);
                block(s.body, body_start, head);
            } else {
                block(s.body, head, head);
            }
            int exit = to ? *to : new_loc();
            if (s.cond) edge(assume(s.cond->negated(), s.cond->negated_name()), head, exit);
            return exit;
        }
        case Stmt::Kind::If: {
            int join = to ? *to : new_loc();
            if (!s.cond) {
                if (s.body.empty()) return from;
                block(s.body, from, join);
                return join;
            }
            branch(s.body, s.cond->atom(), s.cond->name(), from, join);
            branch(s.orelse, s.cond->negated(), s.cond->negated_name(), from, join);
            return join;
        }
        }
        return from;
    }

private:
    void branch(const std::vector<Stmt>& body, const Atom& g, const std::string& name, int from, int join) {
        if (body.empty()) {
            edge(assume(g, name), from, join);
            return;
        }
        int start = new_loc();
        edge(assume(g, name), from, start);
        block(body, start, join);
    }

    Program& p_;
    int n_locs_ = 0;
};

// Removes non-initial locations that have no outgoing edges and are entered
// only through assumptions, then drops isolated locations and renumbers.
void prune_and_number(Program& p, int n_locs) {
    std::vector<bool> alive(static_cast<size_t>(n_locs), true);
    for (bool changed = true; changed;) {
        changed = false;
        for (int l = 0; l < n_locs; ++l) {
            if (!alive[static_cast<size_t>(l)] || l == p.initial) continue;
            bool has_out = false, all_assume = true;
            for (const auto& c : p.commands) {
                if (c.src == l) has_out = true;
                if (c.tgt == l && c.kind != Command::Kind::Assume) all_assume = false;
            }
            if (has_out || !all_assume) continue;
            alive[static_cast<size_t>(l)] = false;
            std::erase_if(p.commands, [&](const Command& c) { return c.tgt == l; });
            changed = true;
        }
    }
    for (int l = 0; l < n_locs; ++l) {
        if (l == p.initial) continue;
        bool used = std::any_of(p.commands.begin(), p.commands.end(),
                                [&](const Command& c) { return c.src == l || c.tgt == l; });
        if (!used) alive[static_cast<size_t>(l)] = false;
    }
    std::vector<int> renum(static_cast<size_t>(n_locs), -1);
    int next = 0;
    for (int l = 0; l < n_locs; ++l) {
        if (!alive[static_cast<size_t>(l)]) continue;
        renum[static_cast<size_t>(l)] = next++;
        p.locations.push_back(std::to_string(next));
    }
    for (auto& c : p.commands) {
        c.src = renum[static_cast<size_t>(c.src)];
        c.tgt = renum[static_cast<size_t>(c.tgt)];
    }
    p.initial = renum[static_cast<size_t>(p.initial)];
}

void dedupe_names(Program& p) {
    std::map<std::string, int> seen;
    for (auto& c : p.commands) {
        int k = seen[c.name]++;
        if (k > 0) c.name += "#" + std::to_string(k + 1);
    }
}

bool looks_raw(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        std::string_view l(line);
        l.remove_prefix(b);
        if (l.starts_with("edge ") || l.starts_with("init ") || l.starts_with("loc ")) return true;
    }
    return false;
}

Program parse_raw(std::string_view text) {
    Program p;
    std::map<std::string, int> locs;
    auto loc_id = [&](const std::string& name) {
        auto it = locs.find(name);
        if (it != locs.end()) return it->second;
        int id = static_cast<int>(p.locations.size());
        p.locations.push_back(name);
        locs[name] = id;
        return id;
    };
    struct PendingEdge {
        int src, tgt;
        std::string text;
        int line;
    };
    std::vector<PendingEdge> edges;
    std::optional<int> init;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = line;
        for (auto marker : {std::string("//"), std::string("#")}) {
            // `#` inside a command name is the duplicate suffix; only strip leading comments.
            if (marker == "#") {
                auto b = body.find_first_not_of(" \t");
                if (b != std::string::npos && body[b] == '#') body.clear();
            } else if (auto pos = body.find(marker); pos != std::string::npos) {
                body.resize(pos);
            }
        }
        std::istringstream ls(body);
        std::string kw;
        if (!(ls >> kw)) continue;
        if (kw == "global" || kw == "local") {
            TokenStream ts(body);
            ProgramParser pp(ts, p);
            pp.declarations();
            if (!ts.at_end()) throw ParseError("unexpected tokens after declaration", lineno, 1);
        } else if (kw == "loc") {
            std::string name;
            if (!(ls >> name)) throw ParseError("expected location name", lineno, 1);
            loc_id(name);
        } else if (kw == "init") {
            std::string name;
            if (!(ls >> name)) throw ParseError("expected location name", lineno, 1);
            if (init) throw ParseError("duplicate init", lineno, 1);
            init = loc_id(name);
        } else if (kw == "edge") {
            std::string s, t;
            if (!(ls >> s >> t)) throw ParseError("expected source and target", lineno, 1);
            std::string rest;
            std::getline(ls, rest);
            auto b = rest.find_first_not_of(" \t");
            if (b == std::string::npos) throw ParseError("expected command", lineno, 1);
            rest = rest.substr(b);
            while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\t' || rest.back() == '\r'))
                rest.pop_back();
            edges.push_back({loc_id(s), loc_id(t), rest, lineno});
        } else {
            throw ParseError("unknown directive '" + kw + "'", lineno, 1);
        }
    }
    if (!init) throw ParseError("missing init", lineno, 1);
    p.initial = *init;
    for (const auto& e : edges) {
        Command c;
        try {
            c = parse_command(p, e.text);
        } catch (const ParseError& err) {
            throw ParseError(err.what(), e.line, 1);
        }
        c.src = e.src;
        c.tgt = e.tgt;
        c.name.clear();
        for (char ch : e.text)
            if (ch != ' ' && ch != '\t') c.name += ch;
        if (p.command_index(c.name)) throw ParseError("duplicate command name '" + c.name + "'", e.line, 1);
        p.commands.push_back(std::move(c));
    }
    return p;
}

} // namespace

Command parse_command(const Program& p, std::string_view text) {
    TokenStream ts(text);
    Program scratch = p;
    ProgramParser pp(ts, scratch);
    Command c;
    if (ts.is("skip") && ts.at(ts.position() + 1).kind == Tok::End) {
        ts.next();
        c.kind = Command::Kind::Skip;
        c.name = "skip";
        return c;
    }
    c = pp.basic_command();
    ts.accept(";");
    if (!ts.at_end()) ts.fail("unexpected trailing input in command");
    return c;
}

Program parse_program(std::string_view text) {
    if (looks_raw(text)) return parse_raw(text);
    Program p;
    TokenStream ts(text);
    if (ts.at_end()) ts.fail("empty program");
    ProgramParser pp(ts, p);
    pp.declarations();
    if (ts.at_end()) ts.fail("program has no statements");
    auto stmts = pp.block_until("");
    if (!ts.at_end()) ts.fail("unexpected input");
    Compiler comp(p);
    p.initial = comp.new_loc();
    comp.block(stmts, p.initial, std::nullopt);
    prune_and_number(p, comp.n_locs());
    dedupe_names(p);
    return p;
}

// ---------------------------------------------------------------- semantics

ProgramState initial_state(const Program& p, int n_threads, const Valuation& vals) {
    ProgramState s;
    s.n_threads = n_threads;
    s.locs.assign(static_cast<size_t>(n_threads), p.initial);
    auto put = [&](const Var& v) {
        auto it = vals.find(v);
        s.vals[v] = it == vals.end() ? 0 : it->second;
    };
    for (const auto& g : p.globals) put(Var::global(g));
    for (const auto& l : p.locals)
        for (int i = 1; i <= n_threads; ++i) put(Var::local(l, i));
    return s;
}

std::vector<Valuation> execute(const Program&, const Command& c, int thread, const Valuation& vals,
                               const HavocRange& range) {
    auto lookup = [&](const Var& v) {
        Var b = bind_thread(v, thread);
        auto it = vals.find(b);
        if (it == vals.end()) throw Error("unbound variable " + b.str());
        return it->second;
    };
    switch (c.kind) {
    case Command::Kind::Skip: return {vals};
    case Command::Kind::Assume: return c.guard.holds(lookup) ? std::vector<Valuation>{vals} : std::vector<Valuation>{};
    case Command::Kind::Assign: {
        std::vector<std::pair<Var, int64_t>> updates;
        for (const auto& [v, t] : c.assigns) updates.push_back({bind_thread(v, thread), t.eval(lookup)});
        Valuation out = vals;
        for (const auto& [v, x] : updates) out[v] = x;
        return {out};
    }
    case Command::Kind::Havoc: {
        int64_t lo = c.lower ? std::max(range.lo, *c.lower) : range.lo;
        std::vector<Valuation> out;
        Var v = bind_thread(c.havoc_var, thread);
        for (int64_t x = lo; x <= range.hi; ++x) {
            Valuation n = vals;
            n[v] = x;
            out.push_back(std::move(n));
        }
        return out;
    }
    }
    return {};
}

std::vector<ProgramState> cfg_step(const Program& p, const ProgramState& s, const IndexedCommand& ic,
                                   const HavocRange& range) {
    if (ic.thread < 1 || ic.thread > s.n_threads) throw PreconditionError("thread id outside the state");
    const Command& c = p.command(ic.cmd);
    if (s.locs[static_cast<size_t>(ic.thread - 1)] != c.src) return {};
    std::vector<ProgramState> out;
    for (auto& v : execute(p, c, ic.thread, s.vals, range)) {
        ProgramState n;
        n.n_threads = s.n_threads;
        n.vals = std::move(v);
        n.locs = s.locs;
        n.locs[static_cast<size_t>(ic.thread - 1)] = c.tgt;
        out.push_back(std::move(n));
    }
    return out;
}

std::vector<int> project_thread(const Word& word, int thread) {
    std::vector<int> out;
    for (const auto& ic : word)
        if (ic.thread == thread) out.push_back(ic.cmd);
    return out;
}

bool is_program_lasso(const Program& p, const Lasso& l) {
    if (l.loop.empty()) return false;
    for (int t : l.threads()) {
        if (t < 1) return false;
        int loc = p.initial;
        for (int c : project_thread(l.stem, t)) {
            if (p.command(c).src != loc) return false;
            loc = p.command(c).tgt;
        }
        int start = loc;
        for (int c : project_thread(l.loop, t)) {
            if (p.command(c).src != loc) return false;
            loc = p.command(c).tgt;
        }
        if (loc != start) return false;
    }
    return true;
}

void enumerate_program_lassos(const Program& p, int n_threads, int stem_max, int loop_max,
                              const std::function<bool(const Lasso&)>& visit) {
    if (stem_max < 0 || loop_max < 1 || n_threads < 1) throw PreconditionError("invalid enumeration bounds");
    std::vector<IndexedCommand> letters;
    for (int c = 0; c < static_cast<int>(p.commands.size()); ++c)
        for (int t = 1; t <= n_threads; ++t) letters.push_back({c, t});

    std::vector<int> locs(static_cast<size_t>(n_threads), p.initial);
    std::vector<int> start;
    Lasso cur;
    bool stop = false;

    std::function<void(int, bool)> rec = [&](int remaining, bool in_loop) {
        if (stop) return;
        if (remaining == 0) {
            if (in_loop && locs == start) {
                if (!visit(cur)) stop = true;
            }
            return;
        }
        for (const auto& ic : letters) {
            const Command& c = p.command(ic.cmd);
            int& loc = locs[static_cast<size_t>(ic.thread - 1)];
            if (loc != c.src) continue;
            if (!in_loop) {
                // Stem letter: leave room for `$` and at least one loop letter.
                if (static_cast<int>(cur.stem.size()) >= stem_max || remaining < 3) continue;
                cur.stem.push_back(ic);
            } else {
                cur.loop.push_back(ic);
            }
            int saved = loc;
            loc = c.tgt;
            rec(remaining - 1, in_loop);
            loc = saved;
            if (!in_loop) cur.stem.pop_back();
            else cur.loop.pop_back();
            if (stop) return;
        }
        if (!in_loop && remaining - 1 >= 1 && remaining - 1 <= loop_max) {
            start = locs;
            rec(remaining - 1, true);
        }
    };
    for (int len = 2; len <= stem_max + loop_max + 1 && !stop; ++len) rec(len, false);
}

std::string word_str(const Program& p, const Word& w) {
    std::string out;
    for (const auto& ic : w) {
        if (!out.empty()) out += ' ';
        out += p.command(ic.cmd).name + "@" + std::to_string(ic.thread);
    }
    return out;
}

std::string lasso_str(const Program& p, const Lasso& l) {
    std::string s = word_str(p, l.stem);
    std::string r = word_str(p, l.loop);
    return (s.empty() ? "$" : s + " $") + (r.empty() ? "" : " " + r);
}

namespace {

IndexedCommand parse_indexed(const Program& p, const std::string& tok) {
    auto at = tok.rfind('@');
    if (at == std::string::npos || at == 0 || at + 1 == tok.size())
        throw ParseError("expected <command>@<thread>, got '" + tok + "'", 1, 1);
    std::string name = tok.substr(0, at);
    auto idx = p.command_index(name);
    if (!idx) throw ParseError("unknown command '" + name + "'", 1, 1);
    int tid = 0;
    try {
        size_t used = 0;
        tid = std::stoi(tok.substr(at + 1), &used);
        if (used != tok.size() - at - 1) throw std::invalid_argument("junk");
    } catch (const std::exception&) {
        throw ParseError("bad thread id in '" + tok + "'", 1, 1);
    }
    if (tid < 1) throw ParseError("thread ids must be positive", 1, 1);
    return {*idx, tid};
}

} // namespace

Word parse_word(const Program& p, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string tok;
    Word w;
    while (in >> tok) w.push_back(parse_indexed(p, tok));
    return w;
}

Lasso parse_lasso(const Program& p, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string tok;
    Lasso l;
    bool seen = false;
    while (in >> tok) {
        if (tok == "$") {
            if (seen) throw ParseError("more than one '$' in lasso", 1, 1);
            seen = true;
            continue;
        }
        (seen ? l.loop : l.stem).push_back(parse_indexed(p, tok));
    }
    if (!seen) throw ParseError("lasso needs a '$' separator", 1, 1);
    if (l.loop.empty()) throw ParseError("lasso loop must be nonempty", 1, 1);
    return l;
}

} // namespace wfps
