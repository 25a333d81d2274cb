#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsavg {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a map, parameter range or phase space.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid combination of inputs (empty grids, too few samples, mismatched bins).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A state became non-finite; `step()` is the iteration at which it happened.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::size_t step);
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Power iteration (or another fixed-point loop) hit its iteration limit.
class IterationLimitError : public Error {
 public:
  IterationLimitError(const std::string& what, std::size_t iterations, double residual);
  std::size_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

/// An excursion exceeded its iteration cap. Carries the orbit computed so far.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, std::vector<double> partial_orbit);
  const std::vector<double>& partial_orbit() const noexcept { return partial_; }

 private:
  std::vector<double> partial_;
};

/// A documented precondition of a construction does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace fsavg
