#pragma once

#include "wfps/linear.hpp"

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace wfps {

// Command bodies refer to the executing thread's locals with index 0.
struct Command {
    enum class Kind { Assign, Havoc, Assume, Skip };
    Kind kind = Kind::Skip;
    std::string name;
    int src = 0;
    int tgt = 0;
    std::vector<std::pair<Var, LinTerm>> assigns; // parallel assignment
    Var havoc_var;
    std::optional<int64_t> lower;
    Assertion guard;

    std::set<Var> reads() const;
    std::set<Var> writes() const;
};

struct Program {
    std::vector<std::string> locations;
    int initial = 0;
    std::vector<Command> commands;
    std::vector<std::string> globals;
    std::vector<std::string> locals;

    std::optional<int> command_index(std::string_view name) const;
    const Command& command(int idx) const { return commands.at(static_cast<size_t>(idx)); }
    bool is_global(std::string_view name) const;
    bool is_local(std::string_view name) const;
};

struct IndexedCommand {
    int cmd = 0;
    int thread = 1;
    auto operator<=>(const IndexedCommand&) const = default;
};

using Word = std::vector<IndexedCommand>;

struct Lasso {
    Word stem;
    Word loop;

    std::set<int> threads() const;
    auto operator<=>(const Lasso&) const = default;
};

struct HavocRange {
    int64_t lo = -8;
    int64_t hi = 8;
};

struct ProgramState {
    int n_threads = 0;
    Valuation vals;        // globals and indexed locals
    std::vector<int> locs; // locs[i-1] is the location of thread i

    int64_t get(const Var& v) const;
    auto operator<=>(const ProgramState&) const = default;
};

// Maps index 0 (executing thread) to `thread`.
Var bind_thread(const Var& v, int thread);
LinTerm bind_thread(const LinTerm& t, int thread);
Atom bind_thread(const Atom& a, int thread);

Program parse_program(std::string_view text);
// Parses a single command in the concrete syntax used for edges, e.g. `x=x-d`.
Command parse_command(const Program& p, std::string_view text);

ProgramState initial_state(const Program& p, int n_threads, const Valuation& vals = {});

// Data effect of one command executed by `thread`; havoc values come from `range`.
std::vector<Valuation> execute(const Program& p, const Command& c, int thread, const Valuation& vals,
                               const HavocRange& range = {});
std::vector<ProgramState> cfg_step(const Program& p, const ProgramState& s, const IndexedCommand& ic,
                                   const HavocRange& range = {});

std::vector<int> project_thread(const Word& word, int thread);
bool is_program_lasso(const Program& p, const Lasso& l);

// Lassos over threads 1..n in length-lexicographic order of the word stem $ loop,
// letters ordered by (command, thread) with $ last. Stops when `visit` returns false.
void enumerate_program_lassos(const Program& p, int n_threads, int stem_max, int loop_max,
                              const std::function<bool(const Lasso&)>& visit);

std::string word_str(const Program& p, const Word& w);
std::string lasso_str(const Program& p, const Lasso& l);
// `<cmd>@<tid> ... $ <cmd>@<tid> ...`
Lasso parse_lasso(const Program& p, std::string_view text);
Word parse_word(const Program& p, std::string_view text);

} // namespace wfps
