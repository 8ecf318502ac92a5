#pragma once

// Monte-Carlo estimate of the spread of BLP measures under readout noise.
//
// Each repetition evolves the |+>, |-> pair through the path-conditioned
// channel, adds an independent random traceless Hermitian perturbation
//
//   [[e1, e2 exp(i e3)], [e2 exp(-i e3), -e1]],  e1, e2 ~ N(0, s), e3 ~ U[0, 2pi)
//
// to every evolved state (redrawing non-physical draws), records the trace
// distance trajectory, fits the model |kappa_j| to it with Delta x as the only
// free parameter, and evaluates the BLP measure of the fitted curve.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mzi/dephasing.hpp"
#include "mzi/rng.hpp"

namespace mzi {

struct NoiseConfig {
  double full_width = 0.0;  ///< full width of the noise distribution, 6 * s
  std::size_t repetitions = 100;
  std::uint64_t seed = 0;
  TimeGrid grid{};
  std::size_t max_redraws = 1000;

  double sigma_tilde() const { return full_width / 6.0; }
  void validate() const;
};

struct EnsembleResult {
  double mean_measure = 0.0;
  double std_measure = 0.0;  ///< sample standard deviation (n - 1), Delta N
  std::vector<double> measures;
  std::vector<double> fitted_delta_x_samples;  ///< meters
  std::size_t failures = 0;
};

/// Adds one random traceless Hermitian perturbation of width sigma_tilde,
/// redrawing all three variates until the result is a valid state.
/// Throws RedrawExhausted after max_redraws rejected draws.
QubitState perturb_state(const QubitState& state, double sigma_tilde, RandomStream& rng,
                         std::size_t max_redraws = 1000);

/// Noisy trace distances of the |+>, |-> pair on noise.grid, clamped to [0, 1].
DistanceTrajectory noisy_trace_distance_trajectory(const PhysicalConfig& config, Path j,
                                                   const NoiseConfig& noise, RandomStream& rng);

struct FitOptions {
  std::size_t bracket_points = 41;
  /// Half width of the coarse bracket around the template; <= 0 means half a
  /// fringe period, c / (2 mu). Wider brackets contain near-identical copies
  /// of the optimum one period away, so the fit lands on the boundary.
  double bracket_half_width = 0.0;
  /// Final golden-section bracket width [m].
  double tolerance = 1e-13;
};

struct FitResult {
  double delta_x = 0.0;  ///< meters
  DistanceTrajectory model;
  double residual = 0.0;  ///< sum of squared residuals
};

/// Least-squares fit of |kappa_j(tau; dx)| to `noisy` over dx alone; every
/// other parameter is taken from `config_template`. A coarse scan of the
/// bracket is followed by golden-section refinement of each interior local
/// minimum of the scan; the best evaluated point wins.
/// Throws FitDiverged if the optimum sits on the bracket boundary.
FitResult fit_decoherence(const DistanceTrajectory& noisy, const PhysicalConfig& config_template, Path j,
                          const FitOptions& options = {});

/// Runs noise.repetitions independent noisy fits. Repetition i draws from
/// substream derive_seed(noise.seed, i), so any thread count reproduces the
/// serial result bit for bit. Failed repetitions (redraw exhaustion, diverged
/// fit) are counted; more than half failing throws EnsembleFailure.
EnsembleResult ensemble(const PhysicalConfig& config, Path j, const NoiseConfig& noise, unsigned threads = 1,
                        const FitOptions& fit = {});

}  // namespace mzi
