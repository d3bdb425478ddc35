#pragma once

#include <stdexcept>
#include <string>

namespace gate {

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NonBinaryLabel : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Weighted normal equations stayed indefinite through the whole ridge ladder.
struct SingularSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Relative D-efficiency was requested against a singular base design; callers
// must route through the singular scoring path instead.
struct SingularBaseDesign : std::logic_error {
  using std::logic_error::logic_error;
};

struct EmptyCandidateSet : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyPool : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PoolExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyInactiveSet : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SingleClass : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyTruthSet : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyResults : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InsufficientPool : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidSpec : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct MissingColumn : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OracleFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// CSV cell that failed to parse; line and column are 1-based.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line_no, int column_no)
      : std::runtime_error(msg), line(line_no), column(column_no) {}
  int line;
  int column;
};

}  // namespace gate
