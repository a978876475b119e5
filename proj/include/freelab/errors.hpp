#pragma once

#include <stdexcept>
#include <string>

namespace freelab {

// Base of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad descriptors, non-normalized measures, empty potentials.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Descriptor text that does not parse. `position` is a 0-based column.
class ParseError : public DomainError {
 public:
  ParseError(const std::string& text, std::size_t position, const std::string& what)
      : DomainError("at position " + std::to_string(position) + " in '" + text + "': " + what),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// A hypothesis of an inequality (convexity, evenness, centering, growth) is violated.
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& what, std::string witness)
      : Error(what), witness_(std::move(witness)) {}
  const std::string& witness() const { return witness_; }

 private:
  std::string witness_;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class MultiCutError : public SolverError {
 public:
  using SolverError::SolverError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace freelab
