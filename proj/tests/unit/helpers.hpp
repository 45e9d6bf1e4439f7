#pragma once

#include "wfps/program.hpp"
#include "wfps/smt.hpp"
#include "wfps/validity.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace testing {

inline std::string slurp(const std::string& name) {
    std::ifstream in(std::string(WFPS_DATA_DIR) + "/" + name);
    if (!in) throw std::runtime_error("missing data file " + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline wfps::Program load_program(const std::string& name) { return wfps::parse_program(slurp(name)); }

inline wfps::OracleConfig prover_config() {
    wfps::OracleConfig cfg;
    cfg.prover = wfps::default_prover();
    return cfg;
}

} // namespace testing
