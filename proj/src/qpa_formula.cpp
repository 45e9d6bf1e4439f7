#include "wfps/lexer.hpp"
#include "wfps/qpa.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <sstream>

namespace wfps {

namespace fm {

namespace {

FormulaPtr make(Formula f) { return std::make_shared<const Formula>(std::move(f)); }

} // namespace

FormulaPtr tt() {
    static const FormulaPtr t = make(Formula{Formula::Kind::True, -1, {}, -1, {}});
    return t;
}

FormulaPtr ff() {
    static const FormulaPtr f = make(Formula{Formula::Kind::False, -1, {}, -1, {}});
    return f;
}

FormulaPtr pred(int q, std::vector<int> args) { return make(Formula{Formula::Kind::Pred, q, std::move(args), -1, {}}); }

FormulaPtr eq(int a, int b) {
    if (a == b) return tt();
    return make(Formula{Formula::Kind::Eq, -1, {a, b}, -1, {}});
}

FormulaPtr ne(int a, int b) {
    if (a == b) return ff();
    return make(Formula{Formula::Kind::Ne, -1, {a, b}, -1, {}});
}

namespace {

FormulaPtr junction(Formula::Kind kind, std::vector<FormulaPtr> kids) {
    const Formula::Kind unit = kind == Formula::Kind::And ? Formula::Kind::True : Formula::Kind::False;
    const Formula::Kind zero = kind == Formula::Kind::And ? Formula::Kind::False : Formula::Kind::True;
    std::vector<FormulaPtr> flat;
    for (auto& k : kids) {
        if (k->kind == unit) continue;
        if (k->kind == zero) return k;
        if (k->kind == kind) {
            flat.insert(flat.end(), k->kids.begin(), k->kids.end());
        } else {
            flat.push_back(std::move(k));
        }
    }
    if (flat.empty()) return kind == Formula::Kind::And ? tt() : ff();
    if (flat.size() == 1) return flat[0];
    return make(Formula{kind, -1, {}, -1, std::move(flat)});
}

} // namespace

FormulaPtr conj(std::vector<FormulaPtr> kids) { return junction(Formula::Kind::And, std::move(kids)); }
FormulaPtr disj(std::vector<FormulaPtr> kids) { return junction(Formula::Kind::Or, std::move(kids)); }
FormulaPtr conj(FormulaPtr a, FormulaPtr b) { return conj(std::vector<FormulaPtr>{std::move(a), std::move(b)}); }
FormulaPtr disj(FormulaPtr a, FormulaPtr b) { return disj(std::vector<FormulaPtr>{std::move(a), std::move(b)}); }

// Universes are never empty, so quantifiers over constants collapse.
FormulaPtr forall(int v, FormulaPtr body) {
    if (body->kind == Formula::Kind::True || body->kind == Formula::Kind::False) return body;
    return make(Formula{Formula::Kind::Forall, -1, {}, v, {std::move(body)}});
}

FormulaPtr exists(int v, FormulaPtr body) {
    if (body->kind == Formula::Kind::True || body->kind == Formula::Kind::False) return body;
    return make(Formula{Formula::Kind::Exists, -1, {}, v, {std::move(body)}});
}

FormulaPtr forall(const std::vector<int>& vs, FormulaPtr body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = forall(*it, std::move(body));
    return body;
}

FormulaPtr exists(const std::vector<int>& vs, FormulaPtr body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = exists(*it, std::move(body));
    return body;
}

} // namespace fm

int fresh_var() {
    static std::atomic<int> next{1000};
    return next++;
}

namespace {

void collect_free(const FormulaPtr& f, std::set<int>& bound, std::set<int>& out) {
    switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False: return;
    case Formula::Kind::Pred:
    case Formula::Kind::Eq:
    case Formula::Kind::Ne:
        for (int v : f->args)
            if (!bound.count(v)) out.insert(v);
        return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
        for (const auto& k : f->kids) collect_free(k, bound, out);
        return;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
        bool was = bound.count(f->var) > 0;
        bound.insert(f->var);
        collect_free(f->kids[0], bound, out);
        if (!was) bound.erase(f->var);
        return;
    }
    }
}

int lookup(const std::map<int, int>& m, int v) {
    auto it = m.find(v);
    return it == m.end() ? v : it->second;
}

} // namespace

std::set<int> free_vars(const FormulaPtr& f) {
    std::set<int> bound, out;
    collect_free(f, bound, out);
    return out;
}

bool mentions_var(const FormulaPtr& f, int v) { return free_vars(f).count(v) > 0; }

size_t formula_size(const FormulaPtr& f) {
    size_t n = 1;
    for (const auto& k : f->kids) n += formula_size(k);
    return n;
}

FormulaPtr rename_vars(const FormulaPtr& f, const std::map<int, int>& ren) {
    switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False: return f;
    case Formula::Kind::Pred: {
        std::vector<int> args;
        for (int v : f->args) args.push_back(lookup(ren, v));
        return fm::pred(f->pred, std::move(args));
    }
    case Formula::Kind::Eq: return fm::eq(lookup(ren, f->args[0]), lookup(ren, f->args[1]));
    case Formula::Kind::Ne: return fm::ne(lookup(ren, f->args[0]), lookup(ren, f->args[1]));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
        std::vector<FormulaPtr> kids;
        for (const auto& k : f->kids) kids.push_back(rename_vars(k, ren));
        return f->kind == Formula::Kind::And ? fm::conj(std::move(kids)) : fm::disj(std::move(kids));
    }
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
        int v = fresh_var();
        std::map<int, int> inner = ren;
        inner[f->var] = v;
        auto body = rename_vars(f->kids[0], inner);
        return f->kind == Formula::Kind::Forall ? fm::forall(v, body) : fm::exists(v, body);
    }
    }
    return f;
}

FormulaPtr substitute_preds(const FormulaPtr& f,
                            const std::function<FormulaPtr(int, const std::vector<int>&)>& sub) {
    switch (f->kind) {
    case Formula::Kind::Pred: return sub(f->pred, f->args);
    case Formula::Kind::And:
    case Formula::Kind::Or: {
        std::vector<FormulaPtr> kids;
        for (const auto& k : f->kids) kids.push_back(substitute_preds(k, sub));
        return f->kind == Formula::Kind::And ? fm::conj(std::move(kids)) : fm::disj(std::move(kids));
    }
    case Formula::Kind::Forall: return fm::forall(f->var, substitute_preds(f->kids[0], sub));
    case Formula::Kind::Exists: return fm::exists(f->var, substitute_preds(f->kids[0], sub));
    default: return f;
    }
}

FormulaPtr map_preds(const FormulaPtr& f, const std::function<int(int)>& m) {
    return substitute_preds(f, [&](int q, const std::vector<int>& args) { return fm::pred(m(q), args); });
}

FormulaPtr de_morgan(const FormulaPtr& f) {
    switch (f->kind) {
    case Formula::Kind::True: return fm::ff();
    case Formula::Kind::False: return fm::tt();
    case Formula::Kind::Pred: return f;
    case Formula::Kind::Eq: return fm::ne(f->args[0], f->args[1]);
    case Formula::Kind::Ne: return fm::eq(f->args[0], f->args[1]);
    case Formula::Kind::And:
    case Formula::Kind::Or: {
        std::vector<FormulaPtr> kids;
        for (const auto& k : f->kids) kids.push_back(de_morgan(k));
        return f->kind == Formula::Kind::And ? fm::disj(std::move(kids)) : fm::conj(std::move(kids));
    }
    case Formula::Kind::Forall: return fm::exists(f->var, de_morgan(f->kids[0]));
    case Formula::Kind::Exists: return fm::forall(f->var, de_morgan(f->kids[0]));
    }
    return f;
}

// ---------------------------------------------------------------- Qpa basics

Qpa::Qpa() : start(fm::ff()) {}

Qpa::Qpa(std::vector<std::string> alphabet) : letters(std::move(alphabet)), start(fm::ff()) {}

int Qpa::add_pred(const std::string& name, int ar, bool acc) {
    if (pred_index(name)) throw PreconditionError("duplicate predicate " + name);
    if (ar < 0 || ar > kMaxArity) throw PreconditionError("predicate arity out of range for " + name);
    preds.push_back(name);
    arity.push_back(ar);
    accepting.push_back(acc);
    delta.emplace_back(letters.size(), fm::ff());
    return static_cast<int>(preds.size()) - 1;
}

std::optional<int> Qpa::pred_index(std::string_view name) const {
    for (size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == name) return static_cast<int>(i);
    return std::nullopt;
}

std::optional<int> Qpa::letter_index(std::string_view name) const {
    for (size_t i = 0; i < letters.size(); ++i)
        if (letters[i] == name) return static_cast<int>(i);
    return std::nullopt;
}

int Qpa::dollar() const {
    auto d = letter_index("$");
    return d ? *d : -1;
}

void Qpa::set_delta(int q, int letter, FormulaPtr body) {
    delta.at(static_cast<size_t>(q)).at(static_cast<size_t>(letter)) = std::move(body);
}

void Qpa::or_delta(int q, int letter, FormulaPtr body) {
    auto& slot = delta.at(static_cast<size_t>(q)).at(static_cast<size_t>(letter));
    slot = fm::disj(slot, std::move(body));
}

// ---------------------------------------------------------------- printing

namespace {

bool plain_ident(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string quoted(const std::string& s) { return plain_ident(s) ? s : "`" + s + "`"; }

std::string var_name(int v) { return v < 1000 ? "i" + std::to_string(v) : "f" + std::to_string(v - 1000); }

struct Names {
    std::map<int, std::string> bound;
    int next = 1;
    std::string operator()(int v) const {
        auto it = bound.find(v);
        return it == bound.end() ? var_name(v) : it->second;
    }
};

std::string render(const Qpa& a, const FormulaPtr& f, int ctx, Names& names) {
    // ctx: 0 top, 1 inside or, 2 inside and
    switch (f->kind) {
    case Formula::Kind::True: return "true";
    case Formula::Kind::False: return "false";
    case Formula::Kind::Pred: {
        std::string out = quoted(a.preds.at(static_cast<size_t>(f->pred)));
        if (!f->args.empty()) {
            out += "(";
            for (size_t k = 0; k < f->args.size(); ++k) out += (k ? "," : "") + names(f->args[k]);
            out += ")";
        }
        return out;
    }
    case Formula::Kind::Eq: return names(f->args[0]) + " = " + names(f->args[1]);
    case Formula::Kind::Ne: return names(f->args[0]) + " != " + names(f->args[1]);
    case Formula::Kind::And:
    case Formula::Kind::Or: {
        bool is_and = f->kind == Formula::Kind::And;
        std::string out;
        for (size_t k = 0; k < f->kids.size(); ++k) {
            if (k) out += is_and ? " & " : " | ";
            out += render(a, f->kids[k], is_and ? 2 : 1, names);
        }
        bool paren = (is_and && ctx > 2) || (!is_and && ctx == 2);
        return paren ? "(" + out + ")" : out;
    }
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
        auto saved = names.bound;
        std::string v = "v" + std::to_string(names.next++);
        names.bound[f->var] = v;
        std::string out = std::string(f->kind == Formula::Kind::Forall ? "forall " : "exists ") + v + ". " +
                          render(a, f->kids[0], 0, names);
        names.bound = std::move(saved);
        return ctx == 0 ? out : "(" + out + ")";
    }
    }
    return "?";
}

} // namespace

std::string formula_str(const Qpa& a, const FormulaPtr& f) {
    Names names;
    return render(a, f, 0, names);
}

std::string qword_str(const Qpa& a, const QWord& w) {
    std::string out;
    for (const auto& l : w) {
        if (!out.empty()) out += ' ';
        out += a.letters.at(static_cast<size_t>(l.letter)) + "@" + std::to_string(l.tid);
    }
    return out;
}

std::string qpa_str(const Qpa& a) {
    std::ostringstream os;
    os << "alphabet";
    for (const auto& l : a.letters) os << ' ' << l;
    os << '\n';
    for (size_t q = 0; q < a.preds.size(); ++q)
        os << "pred " << quoted(a.preds[q]) << '/' << a.arity[q] << (a.accepting[q] ? " accepting" : "") << '\n';
    os << "start " << formula_str(a, a.start) << '\n';
    for (size_t q = 0; q < a.preds.size(); ++q) {
        for (size_t l = 0; l < a.letters.size(); ++l) {
            const auto& body = a.delta[q][l];
            if (body->kind == Formula::Kind::False) continue;
            os << "delta " << quoted(a.preds[q]);
            if (a.arity[q] > 0) {
                os << '(';
                for (int j = 1; j <= a.arity[q]; ++j) os << (j > 1 ? "," : "") << var_name(j);
                os << ')';
            }
            os << ' ' << a.letters[l] << " := " << formula_str(a, body) << '\n';
        }
    }
    return os.str();
}

// ---------------------------------------------------------------- parsing

namespace {

class FormulaParser {
public:
    FormulaParser(TokenStream& ts, const Qpa& a, std::map<std::string, int> scope)
        : ts_(ts), a_(a), scope_(std::move(scope)) {}

    FormulaPtr parse_or() {
        std::vector<FormulaPtr> kids{parse_and()};
        while (ts_.accept("|") || ts_.accept("||")) kids.push_back(parse_and());
        return fm::disj(std::move(kids));
    }

private:
    FormulaPtr parse_and() {
        std::vector<FormulaPtr> kids{parse_unary()};
        while (ts_.accept("&") || ts_.accept("&&")) kids.push_back(parse_unary());
        return fm::conj(std::move(kids));
    }

    int var(const std::string& name) {
        auto it = scope_.find(name);
        if (it == scope_.end()) ts_.fail("unbound variable '" + name + "'");
        return it->second;
    }

    FormulaPtr parse_unary() {
        if (ts_.is("forall") || ts_.is("exists")) {
            bool all = ts_.next().text == "forall";
            std::vector<std::pair<std::string, std::optional<int>>> saved;
            std::vector<int> ids;
            do {
                std::string name = ts_.expect_ident();
                auto it = scope_.find(name);
                saved.push_back({name, it == scope_.end() ? std::nullopt : std::optional<int>(it->second)});
                int id = fresh_var();
                scope_[name] = id;
                ids.push_back(id);
            } while (ts_.accept(","));
            ts_.expect(".");
            FormulaPtr body = parse_or();
            for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
                if (it->second) scope_[it->first] = *it->second;
                else scope_.erase(it->first);
            }
            return all ? fm::forall(ids, body) : fm::exists(ids, body);
        }
        if (ts_.accept("(")) {
            FormulaPtr f = parse_or();
            ts_.expect(")");
            return f;
        }
        if (ts_.accept("true")) return fm::tt();
        if (ts_.accept("false")) return fm::ff();
        if (ts_.peek().kind != Tok::Ident) ts_.fail("expected formula");
        if (ts_.is("=", 1) || ts_.is("==", 1) || ts_.is("!=", 1)) {
            int lhs = var(ts_.next().text);
            bool is_eq = ts_.next().text != "!=";
            int rhs = var(ts_.expect_ident());
            return is_eq ? fm::eq(lhs, rhs) : fm::ne(lhs, rhs);
        }
        std::string name = ts_.next().text;
        auto q = a_.pred_index(name);
        if (!q) ts_.fail("unknown predicate '" + name + "'");
        std::vector<int> args;
        if (ts_.accept("(")) {
            if (!ts_.is(")")) {
                do {
                    args.push_back(var(ts_.expect_ident()));
                } while (ts_.accept(","));
            }
            ts_.expect(")");
        }
        if (static_cast<int>(args.size()) != a_.arity[static_cast<size_t>(*q)])
            ts_.fail("predicate '" + name + "' expects " + std::to_string(a_.arity[static_cast<size_t>(*q)]) +
                     " arguments");
        return fm::pred(*q, std::move(args));
    }

    TokenStream& ts_;
    const Qpa& a_;
    std::map<std::string, int> scope_;
};

FormulaPtr parse_formula_in(const Qpa& a, std::string_view text, std::map<std::string, int> scope, int line) {
    try {
        TokenStream ts(text);
        FormulaParser p(ts, a, std::move(scope));
        FormulaPtr f = p.parse_or();
        if (!ts.at_end()) ts.fail("unexpected trailing input");
        return f;
    } catch (const ParseError& e) {
        if (line <= 0) throw;
        throw ParseError(e.what(), line, e.column());
    }
}

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Directive {
    std::string text;
    int line;
};

} // namespace

FormulaPtr parse_qpa_formula(const Qpa& a, std::string_view text) {
    FormulaPtr f = parse_formula_in(a, text, {}, 0);
    if (!free_vars(f).empty()) throw ParseError("formula must be closed", 1, 1);
    return f;
}

Qpa parse_qpa(std::string_view text) {
    std::vector<Directive> dirs;
    {
        std::istringstream in{std::string(text)};
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#' || t.starts_with("//")) continue;
            bool cont = (line[0] == ' ' || line[0] == '\t') && !dirs.empty();
            if (cont) {
                dirs.back().text += " " + t;
            } else {
                dirs.push_back({t, lineno});
            }
        }
    }
    std::vector<std::string> alphabet;
    bool explicit_alphabet = false;
    struct PendingDelta {
        std::string pred;
        std::vector<std::string> vars;
        std::string letter;
        std::string tvar;
        std::string body;
        int line;
    };
    std::vector<PendingDelta> deltas;
    std::optional<Directive> start;
    struct PendingPred {
        std::string name;
        int arity;
        bool acc;
        int line;
    };
    std::vector<PendingPred> preds;

    for (const auto& d : dirs) {
        std::istringstream ls(d.text);
        std::string kw;
        ls >> kw;
        if (kw == "alphabet") {
            std::string l;
            while (ls >> l) alphabet.push_back(l);
            explicit_alphabet = true;
        } else if (kw == "pred") {
            std::string rest = trim(d.text.substr(4));
            TokenStream ts(rest);
            try {
                std::string name = ts.expect_ident();
                ts.expect("/");
                int ar = static_cast<int>(ts.expect_int());
                bool acc = ts.accept("accepting");
                if (!ts.at_end()) ts.fail("unexpected input after predicate declaration");
                preds.push_back({name, ar, acc, d.line});
            } catch (const ParseError& e) {
                throw ParseError(e.what(), d.line, e.column());
            }
        } else if (kw == "start") {
            if (start) throw ParseError("duplicate start formula", d.line, 1);
            start = Directive{trim(d.text.substr(5)), d.line};
        } else if (kw == "delta") {
            auto assign = d.text.find(":=");
            if (assign == std::string::npos) throw ParseError("expected ':=' in delta", d.line, 1);
            std::string head = trim(d.text.substr(5, assign - 5));
            PendingDelta pd;
            pd.body = trim(d.text.substr(assign + 2));
            pd.line = d.line;
            // Head: <pred>[(<vars>)] <letter>[:<var>]
            size_t pos = 0;
            if (!head.empty() && head[0] == '`') {
                auto close = head.find('`', 1);
                if (close == std::string::npos) throw ParseError("unterminated quoted name", d.line, 1);
                pd.pred = head.substr(1, close - 1);
                pos = close + 1;
            } else {
                while (pos < head.size() && (std::isalnum(static_cast<unsigned char>(head[pos])) || head[pos] == '_'))
                    ++pos;
                pd.pred = head.substr(0, pos);
            }
            if (pd.pred.empty()) throw ParseError("expected predicate name in delta", d.line, 1);
            if (pos < head.size() && head[pos] == '(') {
                auto close = head.find(')', pos);
                if (close == std::string::npos) throw ParseError("expected ')' in delta head", d.line, 1);
                std::string inner = head.substr(pos + 1, close - pos - 1);
                std::stringstream vs(inner);
                std::string v;
                while (std::getline(vs, v, ',')) {
                    v = trim(v);
                    if (v.empty()) throw ParseError("empty variable in delta head", d.line, 1);
                    pd.vars.push_back(v);
                }
                pos = close + 1;
            }
            std::string letter = trim(head.substr(pos));
            if (letter.empty()) throw ParseError("expected letter in delta", d.line, 1);
            auto colon = letter.rfind(':');
            if (colon != std::string::npos && colon + 1 < letter.size() &&
                plain_ident(letter.substr(colon + 1))) {
                pd.tvar = letter.substr(colon + 1);
                letter = letter.substr(0, colon);
            }
            pd.letter = letter;
            deltas.push_back(std::move(pd));
        } else {
            throw ParseError("unknown directive '" + kw + "'", d.line, 1);
        }
    }
    if (!explicit_alphabet) {
        for (const auto& pd : deltas)
            if (pd.letter != "*" && std::find(alphabet.begin(), alphabet.end(), pd.letter) == alphabet.end())
                alphabet.push_back(pd.letter);
    }
    Qpa a(alphabet);
    for (const auto& pp : preds) {
        try {
            a.add_pred(pp.name, pp.arity, pp.acc);
        } catch (const PreconditionError& e) {
            throw ParseError(e.what(), pp.line, 1);
        }
    }
    if (!start) throw ParseError("missing start formula", dirs.empty() ? 1 : dirs.back().line, 1);
    a.start = parse_formula_in(a, start->text, {}, start->line);
    if (!free_vars(a.start).empty()) throw ParseError("start formula must be closed", start->line, 1);

    std::vector<std::vector<bool>> explicit_delta(a.n_preds(), std::vector<bool>(a.n_letters(), false));
    std::vector<const PendingDelta*> defaults;
    for (const auto& pd : deltas) {
        auto q = a.pred_index(pd.pred);
        if (!q) throw ParseError("unknown predicate '" + pd.pred + "'", pd.line, 1);
        if (static_cast<int>(pd.vars.size()) != a.arity[static_cast<size_t>(*q)])
            throw ParseError("arity mismatch in delta head", pd.line, 1);
        if (pd.letter == "*") {
            defaults.push_back(&pd);
            continue;
        }
        auto l = a.letter_index(pd.letter);
        if (!l) throw ParseError("letter '" + pd.letter + "' is not in the alphabet", pd.line, 1);
        std::map<std::string, int> scope;
        scope[pd.tvar.empty() ? "i0" : pd.tvar] = 0;
        for (size_t k = 0; k < pd.vars.size(); ++k) {
            if (scope.count(pd.vars[k])) throw ParseError("duplicate variable in delta head", pd.line, 1);
            scope[pd.vars[k]] = static_cast<int>(k) + 1;
        }
        FormulaPtr body = parse_formula_in(a, pd.body, scope, pd.line);
        if (explicit_delta[static_cast<size_t>(*q)][static_cast<size_t>(*l)]) {
            a.or_delta(*q, *l, body);
        } else {
            a.set_delta(*q, *l, body);
        }
        explicit_delta[static_cast<size_t>(*q)][static_cast<size_t>(*l)] = true;
    }
    for (const auto* pd : defaults) {
        int q = *a.pred_index(pd->pred);
        std::map<std::string, int> scope;
        scope[pd->tvar.empty() ? "i0" : pd->tvar] = 0;
        for (size_t k = 0; k < pd->vars.size(); ++k) scope[pd->vars[k]] = static_cast<int>(k) + 1;
        FormulaPtr body = parse_formula_in(a, pd->body, scope, pd->line);
        for (size_t l = 0; l < a.n_letters(); ++l) {
            if (a.letters[l] == "$" || explicit_delta[static_cast<size_t>(q)][l]) continue;
            a.set_delta(q, static_cast<int>(l), body);
        }
    }
    return a;
}

} // namespace wfps
