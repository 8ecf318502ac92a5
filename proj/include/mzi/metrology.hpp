#pragma once

// Sensitivities of the path-probability and memory-effect observables with
// respect to the path difference, the quantum Fisher information of the
// interferometer probe state, and the Delta x sweep engine.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mzi/dephasing.hpp"
#include "mzi/noise_mc.hpp"
#include "mzi/nonmarkovianity.hpp"

namespace mzi {

/// True for the +infinity marker of a divergent sensitivity.
bool is_divergent(double sensitivity);

/// sqrt(P_j (1 - P_j)) / |dP_j/d(dx)| with the analytic derivative, in meters.
/// Returns +infinity where the derivative vanishes (fringe extrema, dx = 0).
double sensitivity_probability(const PhysicalConfig& config, Path j);

/// Analytic dP_j/d(dx) [1/m].
double probability_derivative(const PhysicalConfig& config, Path j);

/// Central difference [N(dx + h) - N(dx - h)] / (2h) of the noiseless BLP
/// measure [1/m].
double derivative_blp(const PhysicalConfig& config, Path j, const TimeGrid& grid, double fd_step);

struct BlpSensitivity {
  double sensitivity = 0.0;  ///< meters; +infinity when the derivative vanishes
  double delta_n_std = 0.0;  ///< ensemble spread of the fitted measures
  double derivative = 0.0;   ///< dN/d(dx) [1/m]
  EnsembleResult ensemble;
};

/// Derivatives smaller than this [1/m] are treated as vanishing.
inline constexpr double kVanishingBlpDerivative = 1e-18;

/// Spread of perturbed BLP measures divided by |dN/d(dx)|. The ensemble runs on
/// noise.grid; the derivative uses the same grid.
BlpSensitivity sensitivity_blp(const PhysicalConfig& config, Path j, const NoiseConfig& noise, double fd_step,
                               unsigned threads = 1);

/// How the path difference enters the probe state: only through arm x_0
/// (x_0 = dx, x_1 = 0), or split symmetrically (x_0 = dx/2, x_1 = -dx/2).
enum class QfiMode { SingleArm, Symmetric };

/// Analytic QFI of the Gaussian probe state [1/m^2]:
///   single arm  (2 pi / c)^2 (mu^2 + 2 sigma^2)
///   symmetric   (2 pi / c)^2 (mu^2 + sigma^2)
double qfi_closed_form(const PhysicalConfig& config, QfiMode mode = QfiMode::SingleArm);

/// Unnormalized spectral density of the reduced frequency u = (f - mu) / sigma.
using SpectralDensity = std::function<double(double)>;

double gaussian_density(double u);

struct QfiOracleOptions {
  double half_width_sigmas = 8.0;  ///< frequency grid spans mu +- this * sigma
  std::size_t points = 4096;
  /// Finite-difference step in dx [m]; <= 0 picks 1e-4 / k_max.
  double fd_step = 0.0;
  QfiMode mode = QfiMode::SingleArm;
  SpectralDensity density = gaussian_density;
  /// Also evaluate on a grid of twice the size and compare.
  bool check_convergence = true;
};

/// QFI by brute force: discretized frequency integral, probe-state derivative
/// by central differences in dx. Throws GridUnderresolved when doubling the
/// grid moves the result by more than 1e-4 relative.
double qfi_numeric_oracle(const PhysicalConfig& config, const QfiOracleOptions& options = {});

/// Quantum Cramer-Rao bound 1 / sqrt(M H) [m].
double qcrb(double qfi, double measurements);

struct SweepSpec {
  double delta_x_min = 0.0;  ///< in multiples of `unit`
  double delta_x_max = 0.0;
  double unit = 1.0;         ///< meters per bound unit (1e-9 for nm input)
  std::size_t steps = 2;
  Path j = Path::Zero;
  TimeGrid grid{};
  std::optional<NoiseConfig> noise;
  double fd_step = 1e-10;  ///< meters (not bound units)
  QfiMode qfi_mode = QfiMode::SingleArm;

  /// Sweep coordinate k in bound units; the last point is delta_x_max exactly.
  double coordinate(std::size_t k) const;
  double delta_x_at(std::size_t k) const { return coordinate(k) * unit; }
  void validate() const;
};

struct SweepRecord {
  double delta_x = 0.0;     ///< meters
  double coordinate = 0.0;  ///< delta_x in the sweep's bound units
  double p0 = 0.0;
  std::optional<double> n0;  ///< empty when path 0 is degenerate
  std::optional<double> n1;
  double concurrence = 0.0;
  double sens_p = 0.0;  ///< meters, for the swept path; +infinity if divergent
  std::optional<double> sens_n;
  std::optional<double> delta_n_std;
  std::optional<double> dn_ddx;  ///< 1/m
  double qcrb_m1 = 0.0;
  std::pair<Classification, Classification> classes{Classification::Undefined, Classification::Undefined};
  bool ensemble_failed = false;
  bool grid_too_short = false;
};

/// Evaluates every record of the sweep. Points run in parallel; record k
/// always describes delta_x_at(k), and the noise of point k is drawn from
/// substream derive_seed(noise.seed, k).
std::vector<SweepRecord> sweep(const SweepSpec& spec, const PhysicalConfig& config_template,
                               unsigned threads = 1);

/// First swept dx whose n0 exceeds the Markovianity threshold.
std::optional<double> emergence_point(std::span<const SweepRecord> records);

/// Indices of strict interior local maxima above `floor` (plateaus count once,
/// at their first index).
std::vector<std::size_t> local_maxima(std::span<const double> values, double floor = 0.0);
std::vector<std::size_t> local_minima(std::span<const double> values);

}  // namespace mzi
