#pragma once

#include <stdexcept>
#include <string>

namespace hjhom {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A structural hypothesis (A1, A2, H1..H3, qC, sqC) or a constant is invalid.
class HypothesisError : public Error {
 public:
  HypothesisError(std::string hypothesis, const std::string& what)
      : Error(hypothesis + ": " + what), hypothesis_(std::move(hypothesis)) {}
  const std::string& hypothesis() const { return hypothesis_; }

 private:
  std::string hypothesis_;
};

class EmptySublevelError : public Error {
 public:
  EmptySublevelError(double x, double level, double min_level);
  double x, level, min_level;
};

class EndpointObstructedError : public Error {
 public:
  EndpointObstructedError(double endpoint, double lambda, double lambda_hat);
  double endpoint, lambda, lambda_hat;
};

class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double x) : Error(what), x(x) {}
  double x;
};

class AssemblyError : public Error {
 public:
  AssemblyError(const std::string& what, double component_lo, double component_hi)
      : Error(what), component_lo(component_lo), component_hi(component_hi) {}
  double component_lo, component_hi;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace hjhom
