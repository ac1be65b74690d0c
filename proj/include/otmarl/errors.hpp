#pragma once

#include <stdexcept>
#include <string>

namespace otmarl {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A weight vector with no positive mass was supplied where a distribution
/// is required.
class EmptyMass : public Error {
 public:
  explicit EmptyMass(const std::string& what) : Error(what) {}
};

/// A negative weight, mass, or intensity was supplied.
class NegativeWeight : public Error {
 public:
  explicit NegativeWeight(const std::string& what) : Error(what) {}
};

/// Two objects that must live on the same ground space (or share a shape)
/// do not.
class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

/// Regularization strength, tolerance, or iteration budget out of range.
class BadRegularization : public Error {
 public:
  explicit BadRegularization(const std::string& what) : Error(what) {}
};

/// The ground cost is not consistent with any embedding on a line.
class NotOneDimensional : public Error {
 public:
  explicit NotOneDimensional(const std::string& what) : Error(what) {}
};

/// A brute-force oracle was asked for more points than it enumerates.
class OracleTooLarge : public Error {
 public:
  explicit OracleTooLarge(const std::string& what) : Error(what) {}
};

/// Dual potentials were requested from a solver run that did not converge.
class StaleDuals : public Error {
 public:
  explicit StaleDuals(const std::string& what) : Error(what) {}
};

/// A row that must be a probability distribution does not sum to one.
class NotStochastic : public Error {
 public:
  explicit NotStochastic(const std::string& what) : Error(what) {}
};

/// A history buffer holds fewer entries than the operation needs.
class InsufficientHistory : public Error {
 public:
  explicit InsufficientHistory(const std::string& what) : Error(what) {}
};

/// A drift value that must be nonnegative is negative.
class NegativeDrift : public Error {
 public:
  explicit NegativeDrift(const std::string& what) : Error(what) {}
};

/// A gradient carries NaN or infinite entries.
class NonFiniteGradient : public Error {
 public:
  explicit NonFiniteGradient(const std::string& what) : Error(what) {}
};

/// Cluster count outside [1, point count].
class BadClusterCount : public Error {
 public:
  explicit BadClusterCount(const std::string& what) : Error(what) {}
};

/// Catch-all for argument validation not covered by a dedicated type.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(what) {}
};

/// Malformed input file or configuration document.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace otmarl
