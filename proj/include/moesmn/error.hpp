#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace moesmn {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A distribution or model parameter lies outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The conditioning interval carries (numerically) zero probability.
class DegenerateIntervalError : public Error {
 public:
  using Error::Error;
};

/// An observation has zero likelihood under every component.
class NumericalSupportError : public Error {
 public:
  NumericalSupportError(std::size_t index, const std::string& what)
      : Error("observation " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Weighted Gram matrix of a component (or of the gating covariates) is singular.
class SingularDesignError : public Error {
 public:
  SingularDesignError(int component, const std::string& what)
      : Error(what), component_(component) {}
  /// Offending component, or -1 for the gating design.
  int component() const noexcept { return component_; }

 private:
  int component_;
};

class EmptyComponentError : public Error {
 public:
  EmptyComponentError(int component, double mass)
      : Error("component " + std::to_string(component) + " has mass " + std::to_string(mass)),
        component_(component) {}
  int component() const noexcept { return component_; }

 private:
  int component_;
};

class InitializationError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

/// An operation was called in a context it does not support.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace moesmn
