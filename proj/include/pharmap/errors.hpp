#pragma once

#include <stdexcept>
#include <string>

namespace pharmap {

/// Base class for all domain errors raised by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The input point is too far from the target manifold for the nearest-point
/// projection to be well defined. In the solver this signals a step size that
/// is too large.
class OutsideTubularNeighborhood : public Error {
public:
  using Error::Error;
};

/// A point that was required to lie on the target manifold does not.
class PointNotOnManifold : public Error {
public:
  using Error::Error;
};

/// A vector that was required to be tangent at the given base point is not.
class NonTangentInput : public Error {
public:
  using Error::Error;
};

/// Geodesic distance was requested for a pair of points outside the region
/// where the non-sphere implementation is valid.
class DistanceNotComputable : public Error {
public:
  using Error::Error;
};

/// The requested operation is not implemented for this manifold kind.
class UnsupportedTarget : public Error {
public:
  using Error::Error;
};

/// Guard for the exponent singularity of the energy density at a vanishing
/// gradient. Not reachable for p >= 2.
class DegenerateGradient : public Error {
public:
  using Error::Error;
};

/// Boundary data violates the active ball constraint.
class InfeasibleBoundary : public Error {
public:
  using Error::Error;
};

/// The map handed to the stability oracle exceeds the declared Euclidean
/// enclosing radius.
class NotSmallRange : public Error {
public:
  using Error::Error;
};

/// Unknown boundary-data generator name.
class UnknownGenerator : public Error {
public:
  using Error::Error;
};

/// A generator or solver parameter is outside its admissible range.
class ParamOutOfRange : public Error {
public:
  using Error::Error;
};

/// Configuration file failed to parse or validate. Carries the offending
/// field (section.key) and line number when known.
class ConfigInvalid : public Error {
public:
  ConfigInvalid(const std::string& message, std::string field = {}, int line = 0)
      : Error(message), field_(std::move(field)), line_(line) {}

  const std::string& field() const { return field_; }
  int line() const { return line_; }

private:
  std::string field_;
  int line_;
};

/// File could not be read or written.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace pharmap
