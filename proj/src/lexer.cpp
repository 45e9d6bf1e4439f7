#include "wfps/lexer.hpp"

#include <array>
#include <cctype>

namespace wfps {

namespace {

constexpr std::array<std::string_view, 9> kTwoCharSyms = {
    "<=", ">=", "==", "!=", "->", "++", ":=", "&&", "||"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

} // namespace

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    bool space = false;
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            space = true;
            continue;
        }
        if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
            while (i < src.size() && src[i] != '\n') advance(1);
            space = true;
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        t.space_before = space;
        space = false;
        if (c == '`') {
            // Backquoted names allow arbitrary text as an identifier.
            size_t j = src.find('`', i + 1);
            if (j == std::string_view::npos) throw ParseError("unterminated quoted name", line, col);
            t.kind = Tok::Ident;
            t.text = std::string(src.substr(i + 1, j - i - 1));
            advance(j - i + 1);
        } else if (ident_start(c)) {
            size_t j = i;
            while (j < src.size() && ident_char(src[j])) ++j;
            t.kind = Tok::Ident;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            t.kind = Tok::Int;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else {
            t.kind = Tok::Sym;
            t.text = std::string(1, c);
            if (i + 1 < src.size()) {
                std::string_view two = src.substr(i, 2);
                for (auto s : kTwoCharSyms) {
                    if (two == s) {
                        t.text = std::string(two);
                        break;
                    }
                }
            }
            advance(t.text.size());
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.kind = Tok::End;
    end.line = line;
    end.col = col;
    out.push_back(end);
    return out;
}

const Token& TokenStream::peek(size_t ahead) const {
    size_t k = pos_ + ahead;
    if (k >= toks_.size()) return toks_.back();
    return toks_[k];
}

Token TokenStream::next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
}

bool TokenStream::is(std::string_view sym, size_t ahead) const {
    const Token& t = peek(ahead);
    return (t.kind == Tok::Sym || t.kind == Tok::Ident) && t.text == sym;
}

bool TokenStream::accept(std::string_view sym) {
    if (!is(sym)) return false;
    next();
    return true;
}

void TokenStream::expect(std::string_view sym) {
    if (!accept(sym)) fail("expected '" + std::string(sym) + "'");
}

std::string TokenStream::expect_ident() {
    if (peek().kind != Tok::Ident) fail("expected identifier");
    return next().text;
}

int64_t TokenStream::expect_int() {
    if (peek().kind != Tok::Int) fail("expected integer");
    try {
        return std::stoll(next().text);
    } catch (const std::out_of_range&) {
        fail("integer literal out of range");
    }
}

void TokenStream::fail(const std::string& msg) const {
    const Token& t = peek();
    std::string near = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + " near " + near, t.line, t.col);
}

} // namespace wfps
