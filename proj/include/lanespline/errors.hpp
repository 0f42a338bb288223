#pragma once

#include <stdexcept>
#include <string>

namespace lanespline {

// Base class for every error raised by the library. Each subclass maps to one
// failure category so callers (the CLI in particular) can translate it into an
// exit code without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidConfiguration : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DegenerateTangent : public Error {
 public:
  using Error::Error;
};

class DegenerateNormal : public Error {
 public:
  using Error::Error;
};

class DegenerateStep : public Error {
 public:
  using Error::Error;
};

// Raised when a loss term evaluates to NaN/Inf.
class NumericalError : public Error {
 public:
  NumericalError(std::string term, const std::string& what)
      : Error(what), term_(std::move(term)) {}
  const std::string& term() const { return term_; }

 private:
  std::string term_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(int step, const std::string& what) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

}  // namespace lanespline
