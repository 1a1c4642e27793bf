#pragma once

#include <stdexcept>
#include <string>

namespace relloc {

/// Bad argument value (non-finite angle, non-positive side length, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Geometry that makes a quantity undefined: coincident points, singular
/// normal matrices, coplanar anchors.
class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Euler extraction at |R13| -> 1.
class GimbalLock : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix expected to be (close to) an EDM / PSD Gram matrix is not.
class InconsistentInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AlignmentUnderdetermined : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed measurement / config file. Carries the 1-based line number
/// when one applies (0 otherwise).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace relloc
