#include "mzi/dephasing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "mzi/errors.hpp"

namespace mzi {

Path path_from_int(int j) {
  if (j == 0) return Path::Zero;
  if (j == 1) return Path::One;
  throw ConfigError("path must be 0 or 1, got " + std::to_string(j));
}

PhysicalConfig PhysicalConfig::reference(double delta_x_m) {
  PhysicalConfig config;
  config.delta_x = delta_x_m;
  return config;
}

PhysicalConfig PhysicalConfig::with_delta_x(double delta_x_m) const {
  PhysicalConfig copy = *this;
  copy.delta_x = delta_x_m;
  return copy;
}

void PhysicalConfig::validate() const {
  if (!(std::isfinite(mu) && mu > 0.0)) throw ConfigError("mu_hz must be a positive finite frequency");
  if (!(std::isfinite(sigma) && sigma > 0.0))
    throw ConfigError("sigma_hz must be a positive finite frequency");
  if (!std::isfinite(delta_n) || delta_n == 0.0) throw ConfigError("delta_n must be finite and nonzero");
  if (!std::isfinite(delta_x)) throw ConfigError("delta_x must be finite");
}

ReducedConfig ReducedConfig::from_ratio_and_shift(double r, double tau_s) {
  return ReducedConfig{r, tau_s, r * tau_s};
}

ReducedConfig reduce(const PhysicalConfig& config) {
  config.validate();
  const double scale = 2.0 * kPi * config.delta_x / PhysicalConfig::c;
  return ReducedConfig{config.mu / config.sigma, config.sigma * scale, config.mu * scale};
}

// --- QubitState -------------------------------------------------------------

QubitState QubitState::pure(Complex c_h, Complex c_v) {
  const double norm = std::sqrt(std::norm(c_h) + std::norm(c_v));
  if (norm == 0.0) throw NonPhysical("pure state with zero amplitudes");
  c_h /= norm;
  c_v /= norm;
  return QubitState(std::norm(c_h), c_h * std::conj(c_v), std::conj(c_h) * c_v, std::norm(c_v));
}

QubitState QubitState::plus() { return QubitState(0.5, 0.5, 0.5, 0.5); }
QubitState QubitState::minus() { return QubitState(0.5, -0.5, -0.5, 0.5); }
QubitState QubitState::maximally_mixed() { return QubitState(0.5, 0.0, 0.0, 0.5); }

std::pair<double, double> hermitian_eigenvalues(double a, double d, Complex b) {
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), std::abs(b));
  return {mean - radius, mean + radius};
}

double QubitState::min_eigenvalue() const {
  return hermitian_eigenvalues(m_[0].real(), m_[3].real(), m_[1]).first;
}

bool QubitState::is_hermitian(double tolerance) const {
  return std::abs(m_[0].imag()) <= tolerance && std::abs(m_[3].imag()) <= tolerance &&
         std::abs(m_[1] - std::conj(m_[2])) <= tolerance;
}

bool QubitState::is_valid() const {
  return is_hermitian() && std::abs(trace() - 1.0) <= tol::kTrace && min_eigenvalue() >= -tol::kPsd;
}

QubitState QubitState::operator+(const QubitState& other) const {
  QubitState out;
  for (std::size_t i = 0; i < 4; ++i) out.m_[i] = m_[i] + other.m_[i];
  return out;
}

QubitState QubitState::operator-(const QubitState& other) const {
  QubitState out;
  for (std::size_t i = 0; i < 4; ++i) out.m_[i] = m_[i] - other.m_[i];
  return out;
}

// --- TimeGrid ---------------------------------------------------------------

std::size_t TimeGrid::size() const {
  // Tolerant floor so that 5 / 0.01 counts 500 intervals despite rounding.
  const double intervals = (tau_max - tau_min) / tau_step;
  return static_cast<std::size_t>(std::floor(intervals + 1e-9)) + 1;
}

std::vector<double> TimeGrid::points() const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = at(k);
  return out;
}

void TimeGrid::validate() const {
  if (!(std::isfinite(tau_step) && tau_step > 0.0)) throw ConfigError("tau_step must be > 0");
  if (!std::isfinite(tau_min) || !std::isfinite(tau_max)) throw ConfigError("tau_min/tau_max must be finite");
  if (tau_min > tau_max) throw ConfigError("tau_min must not exceed tau_max");
  if ((tau_max - tau_min) / tau_step > 1e8) throw ConfigError("tau_step too small for the tau range");
}

std::vector<double> DecoherenceTrajectory::moduli() const {
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [](Complex z) { return std::abs(z); });
  return out;
}

// --- decoherence functions --------------------------------------------------

Complex kappa(double tau, double r) {
  return std::polar(std::exp(-0.5 * tau * tau), r * tau);
}

double path_probability(const ReducedConfig& reduced, Path j) {
  const double p0 =
      0.5 * (1.0 + std::exp(-0.5 * reduced.tau_s * reduced.tau_s) * std::cos(reduced.phi));
  return j == Path::Zero ? p0 : 1.0 - p0;
}

double path_probability(const PhysicalConfig& config, Path j) {
  return path_probability(reduce(config), j);
}

namespace {

double checked_probability(const ReducedConfig& reduced, Path j) {
  const double p = path_probability(reduced, j);
  if (p < tol::kDegenerateProbability) {
    std::ostringstream msg;
    msg << "exit path " << static_cast<int>(j) << " has vanishing probability " << p;
    throw DegeneratePath(msg.str());
  }
  return p;
}

Complex conditioned(double tau, const ReducedConfig& reduced, Path j, double probability) {
  const double sign = j == Path::Zero ? 1.0 : -1.0;
  const Complex sum = 2.0 * kappa(tau, reduced.r) +
                      sign * (kappa(tau + reduced.tau_s, reduced.r) + kappa(tau - reduced.tau_s, reduced.r));
  return sum / (4.0 * probability);
}

}  // namespace

Complex kappa_path(double tau, const ReducedConfig& reduced, Path j) {
  return conditioned(tau, reduced, j, checked_probability(reduced, j));
}

Complex kappa_path(double tau, const PhysicalConfig& config, Path j) {
  return kappa_path(tau, reduce(config), j);
}

DecoherenceTrajectory kappa_path_trajectory(const PhysicalConfig& config, Path j, const TimeGrid& grid) {
  grid.validate();
  const ReducedConfig reduced = reduce(config);
  const double probability = checked_probability(reduced, j);
  DecoherenceTrajectory out{grid, std::vector<Complex>(grid.size())};
  for (std::size_t k = 0; k < out.values.size(); ++k)
    out.values[k] = conditioned(grid.at(k), reduced, j, probability);
  return out;
}

QubitState apply_dephasing(const QubitState& state, Complex kappa_value) {
  const QubitState out(state.hh(), state.hv() * kappa_value, state.vh() * std::conj(kappa_value), state.vv());
  if (!out.is_valid()) {
    std::ostringstream msg;
    msg << "dephasing with |kappa| = " << std::abs(kappa_value) << " produced a non-physical state";
    throw NonPhysical(msg.str());
  }
  return out;
}

}  // namespace mzi
