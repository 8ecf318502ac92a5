#pragma once

// Closed-form polarization dephasing behind an unbalanced Mach-Zehnder
// interferometer with a Gaussian photon spectrum.
//
// Dynamics are evaluated in dimensionless time tau = 2*pi*sigma*dn*t. In these
// units the bare decoherence function is
//
//   kappa(tau) = exp(i*r*tau - tau^2/2),   r = mu/sigma,
//
// and the path delay Delta x / (c*dn) becomes the echo shift
// tau_s = 2*pi*sigma*Delta x / c, independent of the birefringence. A physical
// crystal thickness L maps to tau = 2*pi*sigma*dn*L/c.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace mzi {

using Complex = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

namespace tol {
inline constexpr double kHermitian = 1e-12;
inline constexpr double kTrace = 1e-12;
inline constexpr double kPsd = 1e-12;
/// Below this detection probability a path is treated as never occurring.
inline constexpr double kDegenerateProbability = 1e-12;
/// Slack on |kappa| <= 1 for decoherence values.
inline constexpr double kModulus = 1e-9;
}  // namespace tol

/// Path index of the interferometer exit port.
enum class Path : int { Zero = 0, One = 1 };

Path path_from_int(int j);

/// Experiment parameters in SI units.
struct PhysicalConfig {
  double mu = kSpeedOfLight / 780e-9;  ///< center frequency [Hz]
  double sigma = 5.68e11;              ///< spectral standard deviation [Hz]
  double delta_n = 0.009;              ///< birefringence n_H - n_V
  double delta_x = 0.0;                ///< path difference x_0 - x_1 [m]

  static constexpr double c = kSpeedOfLight;

  /// Parameters of the reference experiment at the given path difference.
  static PhysicalConfig reference(double delta_x_m);

  PhysicalConfig with_delta_x(double delta_x_m) const;

  /// Throws ConfigError when mu, sigma or delta_n are out of range.
  void validate() const;
};

/// Dimensionless combinations that fully determine the dephasing dynamics.
struct ReducedConfig {
  double r = 1.0;      ///< mu / sigma
  double tau_s = 0.0;  ///< echo shift 2*pi*sigma*dx/c
  double phi = 0.0;    ///< interferometric phase 2*pi*mu*dx/c

  /// Builds a reduced config from (r, tau_s) with phi = r * tau_s.
  static ReducedConfig from_ratio_and_shift(double r, double tau_s);
};

ReducedConfig reduce(const PhysicalConfig& config);

/// Polarization density matrix in the {H, V} basis.
class QubitState {
 public:
  QubitState() = default;
  QubitState(Complex hh, Complex hv, Complex vh, Complex vv)
      : m_{hh, hv, vh, vv} {}

  /// Pure state C_H|H> + C_V|V>; amplitudes are normalized here.
  static QubitState pure(Complex c_h, Complex c_v);
  static QubitState plus();
  static QubitState minus();
  static QubitState maximally_mixed();

  Complex operator()(std::size_t row, std::size_t col) const {
    return m_[2 * row + col];
  }
  Complex hh() const { return m_[0]; }
  Complex hv() const { return m_[1]; }
  Complex vh() const { return m_[2]; }
  Complex vv() const { return m_[3]; }

  Complex trace() const { return m_[0] + m_[3]; }
  double min_eigenvalue() const;
  bool is_hermitian(double tolerance = tol::kHermitian) const;
  /// Hermitian, unit trace and positive semidefinite within tolerances.
  bool is_valid() const;

  QubitState operator+(const QubitState& other) const;
  QubitState operator-(const QubitState& other) const;

 private:
  std::array<Complex, 4> m_{};
};

/// Eigenvalues (ascending) of the Hermitian matrix [[a, b], [conj(b), d]].
std::pair<double, double> hermitian_eigenvalues(double a, double d, Complex b);

/// Uniform time grid in dimensionless units; the default is tau in [0, 5] with
/// step 0.01 (501 points).
struct TimeGrid {
  double tau_min = 0.0;
  double tau_max = 5.0;
  double tau_step = 0.01;

  std::size_t size() const;
  double at(std::size_t k) const { return tau_min + static_cast<double>(k) * tau_step; }
  std::vector<double> points() const;
  void validate() const;

  bool operator==(const TimeGrid&) const = default;
};

struct DecoherenceTrajectory {
  TimeGrid grid;
  std::vector<Complex> values;

  std::vector<double> moduli() const;
};

/// Trace distances sampled on a grid.
struct DistanceTrajectory {
  TimeGrid grid;
  std::vector<double> values;
};

/// Bare Gaussian decoherence function exp(i*r*tau - tau^2/2).
Complex kappa(double tau, double r);

/// Probability to detect the photon on exit path j. P_1 is computed as 1 - P_0.
double path_probability(const ReducedConfig& reduced, Path j);
double path_probability(const PhysicalConfig& config, Path j);

/// Path-conditioned decoherence function
///   [2 kappa(tau) + (-1)^j kappa(tau + tau_s) + (-1)^j kappa(tau - tau_s)] / (4 P_j).
/// Throws DegeneratePath when P_j < tol::kDegenerateProbability.
Complex kappa_path(double tau, const ReducedConfig& reduced, Path j);
Complex kappa_path(double tau, const PhysicalConfig& config, Path j);

/// kappa_path sampled over a grid (single probability evaluation).
DecoherenceTrajectory kappa_path_trajectory(const PhysicalConfig& config, Path j,
                                            const TimeGrid& grid);

/// Multiplies the H-V coherence by kappa_value, leaving populations untouched.
/// Throws NonPhysical if the result is not a valid state.
QubitState apply_dephasing(const QubitState& state, Complex kappa_value);

}  // namespace mzi
