#pragma once

#include "wfps/program.hpp"
#include "wfps/qpa.hpp"

#include <optional>

namespace wfps {

// Command names in program order followed by `$`; letter k is command k.
std::vector<std::string> program_alphabet(const Program& p);

// A(P): accepts exactly the one-`$` words encoding lassos of P.
Qpa program_lasso_qpa(const Program& p);

// stem, `$` (tagged with the first loop thread), loop.
QWord encode_lasso(const Program& p, const Lasso& l);
QWord encode_word(const Word& w);
// Inverse of encode_lasso on words with exactly one `$` and a nonempty loop.
std::optional<Lasso> decode_lasso(const Program& p, const QWord& w);

} // namespace wfps
