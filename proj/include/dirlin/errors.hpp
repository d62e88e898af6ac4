#pragma once
// Exception taxonomy. Callers can branch on the type: DomainError marks a
// violated numeric precondition, the remaining types mark data problems the
// caller may be able to repair or report.

#include <stdexcept>
#include <string>

namespace dirlin {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument to a numeric routine (negative kappa, zero bandwidth, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Sample cannot support the requested computation (constant linear values,
// all directions identical, constant correlation inputs).
class DegenerateData : public Error {
 public:
  using Error::Error;
};

// A cross-validation or bootstrap objective evaluated to NaN/inf everywhere
// it was probed.
class NonFiniteObjective : public Error {
 public:
  using Error::Error;
};

// Principal-axis extraction failed: the top two eigenvalues coincide, so no
// preferred axis exists.
class DegenerateOrientation : public Error {
 public:
  using Error::Error;
};

// Malformed or unreadable input file. Carries the 1-based line number of
// the offending row; 0 marks a file-level problem with no specific line.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& msg, long line)
      : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace dirlin
