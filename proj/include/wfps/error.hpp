#pragma once

#include <stdexcept>
#include <string>

namespace wfps {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line, int col)
        : Error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg), line_(line), col_(col) {}
    int line() const { return line_; }
    int column() const { return col_; }

private:
    int line_;
    int col_;
};

// Raised when a precondition of an operation is violated by the caller.
class PreconditionError : public Error {
public:
    using Error::Error;
};

} // namespace wfps
