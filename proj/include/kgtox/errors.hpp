#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgtox {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; carries the 1-based line number.
struct ParseError : Error {
    ParseError(std::size_t line_no, const std::string& what_arg)
        : Error("line " + std::to_string(line_no) + ": " + what_arg), line(line_no) {}
    std::size_t line;
};

struct ConfigError : Error {
    using Error::Error;
};

struct LookupError : Error {
    using Error::Error;
};

struct QueryError : Error {
    using Error::Error;
};

struct UnitError : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct GroupingError : Error {
    using Error::Error;
};

struct TrainingError : Error {
    using Error::Error;
};

// Iterative solver ran out of budget; carries the iteration count.
struct ConvergenceError : Error {
    ConvergenceError(std::size_t iters, const std::string& what_arg)
        : Error(what_arg + " (after " + std::to_string(iters) + " iterations)"),
          iterations(iters) {}
    std::size_t iterations;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace kgtox
