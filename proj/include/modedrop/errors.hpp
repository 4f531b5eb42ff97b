#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace modedrop {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class RankDeficientChannel : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// A matrix that should be PSD up to roundoff has a clearly negative eigenvalue.
class NotNearPsd : public Error {
 public:
  NotNearPsd(const std::string& what, double min_eigenvalue)
      : Error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class ZeroChannelEntry : public Error {
 public:
  using Error::Error;
};

class NotTwoUsers : public Error {
 public:
  using Error::Error;
};

class DualInfeasible : public Error {
 public:
  DualInfeasible(const std::string& what, std::size_t user, double min_eigenvalue)
      : Error(what), user_(user), min_eigenvalue_(min_eigenvalue) {}
  std::size_t user() const { return user_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  std::size_t user_;
  double min_eigenvalue_;
};

/// Iteration budget exhausted. Catch this base to handle any solver.
class MaxItersExceededError : public Error {
 public:
  MaxItersExceededError(const std::string& what, double final_gap)
      : Error(what), final_gap_(final_gap) {}
  double final_gap() const { return final_gap_; }

 private:
  double final_gap_;
};

/// Carries the best iterate the solver reached before giving up.
template <typename Result>
class MaxItersExceeded : public MaxItersExceededError {
 public:
  MaxItersExceeded(const std::string& what, double final_gap, Result best)
      : MaxItersExceededError(what, final_gap), best_(std::move(best)) {}
  const Result& best() const { return best_; }

 private:
  Result best_;
};

/// A Monte-Carlo work item failed; wraps the underlying message.
class RealizationError : public Error {
 public:
  RealizationError(const std::string& what, std::size_t realization)
      : Error(what), realization_(realization) {}
  std::size_t realization() const { return realization_; }

 private:
  std::size_t realization_;
};

}  // namespace modedrop
