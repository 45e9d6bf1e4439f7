#pragma once

#include "wfps/error.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wfps {

enum class Tok { Ident, Int, Sym, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 1;
    int col = 1;
    bool space_before = false;
};

// Shared tokenizer for programs, assertions, QPA formulas and properties.
// `//` and `#` start line comments.
std::vector<Token> tokenize(std::string_view src);

class TokenStream {
public:
    explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}
    explicit TokenStream(std::string_view src) : toks_(tokenize(src)) {}

    const Token& peek(size_t ahead = 0) const;
    Token next();
    bool at_end() const { return peek().kind == Tok::End; }
    bool is(std::string_view sym, size_t ahead = 0) const;
    bool accept(std::string_view sym);
    void expect(std::string_view sym);
    std::string expect_ident();
    int64_t expect_int();
    [[noreturn]] void fail(const std::string& msg) const;
    size_t position() const { return pos_; }
    const Token& at(size_t pos) const { return pos < toks_.size() ? toks_[pos] : toks_.back(); }
    void rewind(size_t pos) { pos_ = pos; }

private:
    std::vector<Token> toks_;
    size_t pos_ = 0;
};

} // namespace wfps
