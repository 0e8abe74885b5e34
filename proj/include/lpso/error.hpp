#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lpso {

// Bad input: non-finite values, mismatched schedules, zero periods, ...
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A mathematical invariant failed to hold on a computed object.
struct InvariantError : std::logic_error {
  using std::logic_error::logic_error;
};

// Root isolation gave up; carries the energy subinterval that misbehaved.
struct SolverError : std::runtime_error {
  SolverError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), lo(lo), hi(hi) {}
  double lo, hi;
};

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input files. line is 0 when unknown.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), line(line) {}
  std::size_t line;
};

}  // namespace lpso
