#pragma once

#include <stdexcept>
#include <string>

namespace qot {

/// Shape or extent mismatch between operands.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Caller violated an operation precondition (label range, scalar loss, ...).
class ContractError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Input is well-shaped but numerically degenerate (e.g. zero-norm vector).
class DegenerateInputError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// The finite-difference oracle cannot be trusted for this function.
class OracleInvalidError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed binary or text file. `offset` is the byte (or line) where parsing stopped.
class FormatError : public std::runtime_error {
public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"), detail_(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  std::string detail_;
  std::size_t offset_;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite value.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace qot
