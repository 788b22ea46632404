#pragma once

#include <stdexcept>
#include <string>

namespace weakgeo {

/// Malformed input: wrong dimension, non-normalized state, invalid operator.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public InvalidArgument {
public:
  DimensionMismatch(const std::string& where, long expected, long got)
      : InvalidArgument(where + ": dimension mismatch (" + std::to_string(expected) + " vs " +
                        std::to_string(got) + ")") {}
};

/// Base for failures that follow from the physics of the requested setup
/// (orthogonal post-selection, pointer running off the grid, ...).
class PhysicsGuardError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// |psi^0| too small for the psi^0 != 0 projective chart.
class ChartSingularity : public PhysicsGuardError {
public:
  using PhysicsGuardError::PhysicsGuardError;
};

/// A vanishing overlap makes a triple-product phase undefined.
class UndefinedPhase : public PhysicsGuardError {
public:
  using PhysicsGuardError::PhysicsGuardError;
};

class SupportOverflow : public PhysicsGuardError {
public:
  using PhysicsGuardError::PhysicsGuardError;
};

/// Pre- and post-selection nearly orthogonal: the weak value diverges.
class AmplificationDivergence : public PhysicsGuardError {
public:
  using PhysicsGuardError::PhysicsGuardError;
};

class PostselectionFailure : public PhysicsGuardError {
public:
  using PhysicsGuardError::PhysicsGuardError;
};

}  // namespace weakgeo
