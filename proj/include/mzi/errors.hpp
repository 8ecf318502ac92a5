#pragma once

#include <stdexcept>
#include <string>

namespace mzi {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter set or grid violates its invariants.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Conditioning on an exit path whose detection probability vanishes.
class DegeneratePath : public Error {
 public:
  using Error::Error;
};

/// A matrix that should be a density operator is not positive semidefinite.
class NonPhysical : public Error {
 public:
  using Error::Error;
};

class EmptyTrajectory : public Error {
 public:
  using Error::Error;
};

/// Noise redraw loop exceeded its cap without producing a physical state.
class RedrawExhausted : public Error {
 public:
  using Error::Error;
};

/// Least-squares optimum landed on the search bracket boundary.
class FitDiverged : public Error {
 public:
  using Error::Error;
};

/// Frequency discretization too coarse for the requested accuracy.
class GridUnderresolved : public Error {
 public:
  using Error::Error;
};

/// More than half of the Monte-Carlo repetitions failed.
class EnsembleFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace mzi
