#pragma once

#include <stdexcept>
#include <string>

namespace dipole {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// |xi| = 0: the log|xi| term of the dipole Hamiltonian is singular.
struct SingularDirectionError : Error {
  using Error::Error;
};

/// Step size underflow or step budget exhausted in the adaptive integrator.
struct StepFailureError : Error {
  using Error::Error;
};

/// A vortex is still inside the ball at the end of the trajectory.
struct NotExitedError : Error {
  using Error::Error;
};

struct CollisionError : Error {
  using Error::Error;
};

/// Evaluation of the lambda kernel at (r, alpha) = (0, -sigma).
struct SingularPointError : Error {
  using Error::Error;
};

/// Non-uniform or malformed alpha/theta grid.
struct GridError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct MetadataMismatchError : Error {
  using Error::Error;
};

}  // namespace dipole
