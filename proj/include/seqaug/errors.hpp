#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seqaug {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf encountered; message names the op or iteration.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Precondition on a value's domain violated (negative entries, zero norms, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Dataset-level failures: empty dataset, too-short sequence, impossible noise/padding.
class DataError : public Error {
 public:
  using Error::Error;
};

// A matrix, permutation, slot list or mapping that violates its constraints.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace seqaug
