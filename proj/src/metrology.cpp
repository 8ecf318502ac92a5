#include "mzi/metrology.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mzi/errors.hpp"
#include "mzi/parallel.hpp"
#include "mzi/rng.hpp"

namespace mzi {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Relative size below which dP/d(dx) counts as zero, measured against the
// largest value the two terms of the derivative could reach.
constexpr double kVanishingProbabilityDerivative = 1e-12;

}  // namespace

bool is_divergent(double sensitivity) { return std::isinf(sensitivity) && sensitivity > 0.0; }

double probability_derivative(const PhysicalConfig& config, Path j) {
  const ReducedConfig reduced = reduce(config);
  const double k_sigma = 2.0 * kPi * config.sigma / PhysicalConfig::c;
  const double k_mu = 2.0 * kPi * config.mu / PhysicalConfig::c;
  const double envelope = std::exp(-0.5 * reduced.tau_s * reduced.tau_s);
  const double dp0 = -0.5 * envelope *
                     (k_sigma * reduced.tau_s * std::cos(reduced.phi) + k_mu * std::sin(reduced.phi));
  return j == Path::Zero ? dp0 : -dp0;
}

double sensitivity_probability(const PhysicalConfig& config, Path j) {
  const ReducedConfig reduced = reduce(config);
  const double p0 = path_probability(reduced, Path::Zero);
  const double p1 = path_probability(reduced, Path::One);
  const double derivative = probability_derivative(config, j);

  const double k_sigma = 2.0 * kPi * config.sigma / PhysicalConfig::c;
  const double k_mu = 2.0 * kPi * config.mu / PhysicalConfig::c;
  const double scale = 0.5 * std::exp(-0.5 * reduced.tau_s * reduced.tau_s) *
                       (k_mu + k_sigma * std::abs(reduced.tau_s));
  if (derivative == 0.0 || std::abs(derivative) <= kVanishingProbabilityDerivative * scale) return kInfinity;
  return std::sqrt(p0 * p1) / std::abs(derivative);
}

double derivative_blp(const PhysicalConfig& config, Path j, const TimeGrid& grid, double fd_step) {
  if (!(std::isfinite(fd_step) && fd_step > 0.0)) throw ConfigError("fd_step must be > 0");
  const double upper = blp_channel(config.with_delta_x(config.delta_x + fd_step), j, grid).measure;
  const double lower = blp_channel(config.with_delta_x(config.delta_x - fd_step), j, grid).measure;
  return (upper - lower) / (2.0 * fd_step);
}

BlpSensitivity sensitivity_blp(const PhysicalConfig& config, Path j, const NoiseConfig& noise, double fd_step,
                               unsigned threads) {
  noise.validate();
  BlpSensitivity out;
  out.derivative = derivative_blp(config, j, noise.grid, fd_step);
  out.ensemble = ensemble(config, j, noise, threads);
  out.delta_n_std = out.ensemble.std_measure;
  out.sensitivity = std::abs(out.derivative) < kVanishingBlpDerivative ? kInfinity
                                                                       : out.delta_n_std / std::abs(out.derivative);
  return out;
}

// --- quantum Fisher information ---------------------------------------------

double qfi_closed_form(const PhysicalConfig& config, QfiMode mode) {
  config.validate();
  const double k = 2.0 * kPi / PhysicalConfig::c;
  const double spread = mode == QfiMode::SingleArm ? 2.0 : 1.0;
  return k * k * (config.mu * config.mu + spread * config.sigma * config.sigma);
}

double gaussian_density(double u) { return std::exp(-0.5 * u * u); }

namespace {

double discretized_qfi(const PhysicalConfig& config, const QfiOracleOptions& options, std::size_t points) {
  const double width = 2.0 * options.half_width_sigmas;
  const double du = width / static_cast<double>(points);

  std::vector<double> freq(points);
  std::vector<double> amplitude(points);
  double total = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double u = -options.half_width_sigmas + (static_cast<double>(i) + 0.5) * du;
    freq[i] = config.mu + config.sigma * u;
    amplitude[i] = options.density(u);
    if (!(amplitude[i] >= 0.0)) throw ConfigError("spectral density must be non-negative");
    total += amplitude[i];
  }
  if (!(total > 0.0)) throw ConfigError("spectral density vanishes on the frequency grid");
  // Each path carries half of the normalized weight.
  for (double& a : amplitude) a = std::sqrt(0.5 * a / total);

  const double k_max = 2.0 * kPi * (config.mu + options.half_width_sigmas * config.sigma) / PhysicalConfig::c;
  const double h = options.fd_step > 0.0 ? options.fd_step : 1e-4 / k_max;
  const bool single_arm = options.mode == QfiMode::SingleArm;
  auto arms = [&](double dx) {
    return single_arm ? std::pair{dx, 0.0} : std::pair{0.5 * dx, -0.5 * dx};
  };
  const auto [x0_up, x1_up] = arms(config.delta_x + h);
  const auto [x0_dn, x1_dn] = arms(config.delta_x - h);
  const auto [x0, x1] = arms(config.delta_x);

  double norm_d = 0.0;
  Complex overlap = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double k = 2.0 * kPi * freq[i] / PhysicalConfig::c;
    const double a = amplitude[i];
    const Complex psi0 = std::polar(a, k * x0);
    const Complex psi1 = std::polar(a, k * x1);
    const Complex d0 = (std::polar(a, k * x0_up) - std::polar(a, k * x0_dn)) / (2.0 * h);
    const Complex d1 = (std::polar(a, k * x1_up) - std::polar(a, k * x1_dn)) / (2.0 * h);
    norm_d += std::norm(d0) + std::norm(d1);
    overlap += std::conj(d0) * psi0 + std::conj(d1) * psi1;
  }
  return 4.0 * (norm_d - std::norm(overlap));
}

}  // namespace

double qfi_numeric_oracle(const PhysicalConfig& config, const QfiOracleOptions& options) {
  config.validate();
  if (!(options.half_width_sigmas >= 8.0)) throw ConfigError("frequency grid must span at least mu +- 8 sigma");
  if (options.points < 4096) throw ConfigError("frequency grid needs at least 4096 points");
  if (!options.density) throw ConfigError("spectral density is empty");

  const double value = discretized_qfi(config, options, options.points);
  if (options.check_convergence) {
    const double refined = discretized_qfi(config, options, 2 * options.points);
    const double change = std::abs(refined - value) / std::abs(refined);
    if (change > 1e-4) {
      std::ostringstream msg;
      msg << "QFI changed by " << change << " relative when doubling the frequency grid";
      throw GridUnderresolved(msg.str());
    }
  }
  return value;
}

double qcrb(double qfi, double measurements) {
  if (!(std::isfinite(qfi) && qfi > 0.0)) throw ConfigError("QFI must be positive");
  if (!(measurements >= 1.0)) throw ConfigError("measurement count must be >= 1");
  // divide last so that M = 4, 100, ... scale the single-shot bound exactly
  return (1.0 / std::sqrt(qfi)) / std::sqrt(measurements);
}

// --- sweep --------------------------------------------------------------------

double SweepSpec::coordinate(std::size_t k) const {
  if (k + 1 >= steps) return delta_x_max;
  return delta_x_min + static_cast<double>(k) * ((delta_x_max - delta_x_min) / static_cast<double>(steps - 1));
}

void SweepSpec::validate() const {
  if (!std::isfinite(delta_x_min) || !std::isfinite(delta_x_max) || !(delta_x_min < delta_x_max))
    throw ConfigError("delta_x_min must be below delta_x_max");
  if (steps < 2) throw ConfigError("steps must be >= 2");
  if (!(std::isfinite(unit) && unit > 0.0)) throw ConfigError("sweep unit must be positive");
  if (!(fd_step > 0.0 && fd_step < unit * (delta_x_max - delta_x_min) / static_cast<double>(steps)))
    throw ConfigError("fd_step must be positive and below the sweep spacing");
  grid.validate();
  if (noise) noise->validate();
}

std::vector<SweepRecord> sweep(const SweepSpec& spec, const PhysicalConfig& config_template, unsigned threads) {
  spec.validate();
  config_template.validate();
  const double bound = qcrb(qfi_closed_form(config_template, spec.qfi_mode), 1.0);

  std::vector<SweepRecord> records(spec.steps);
  parallel_for(spec.steps, threads, [&](std::size_t k) {
    const PhysicalConfig config = config_template.with_delta_x(spec.delta_x_at(k));
    SweepRecord& rec = records[k];
    rec.delta_x = config.delta_x;
    rec.coordinate = spec.coordinate(k);
    rec.p0 = path_probability(config, Path::Zero);
    rec.concurrence = concurrence(config);
    rec.sens_p = sensitivity_probability(config, spec.j);
    rec.qcrb_m1 = bound;

    auto measure = [&](Path j, std::optional<double>& slot, Classification& cls) {
      try {
        const BlpResult blp = blp_channel(config, j, spec.grid);
        slot = blp.measure;
        cls = blp.classification;
        rec.grid_too_short = blp.grid_too_short;
      } catch (const DegeneratePath&) {
        cls = Classification::Undefined;
      }
    };
    measure(Path::Zero, rec.n0, rec.classes.first);
    measure(Path::One, rec.n1, rec.classes.second);

    if (spec.noise) {
      NoiseConfig noise = *spec.noise;
      noise.grid = spec.grid;
      noise.seed = derive_seed(spec.noise->seed, k);
      try {
        const BlpSensitivity s = sensitivity_blp(config, spec.j, noise, spec.fd_step, 1);
        rec.sens_n = s.sensitivity;
        rec.delta_n_std = s.delta_n_std;
        rec.dn_ddx = s.derivative;
      } catch (const DegeneratePath&) {
      } catch (const EnsembleFailure&) {
        rec.ensemble_failed = true;
      }
    }
  });
  return records;
}

std::optional<double> emergence_point(std::span<const SweepRecord> records) {
  for (const SweepRecord& r : records)
    if (r.n0 && *r.n0 > kBlpThreshold) return r.delta_x;
  return std::nullopt;
}

namespace {

template <typename Better>
std::vector<std::size_t> extrema(std::span<const double> v, Better better) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (!better(v[i], v[i - 1])) continue;
    std::size_t end = i;
    while (end + 1 < v.size() && v[end + 1] == v[i]) ++end;
    if (end + 1 < v.size() && better(v[i], v[end + 1])) out.push_back(i);
    i = end;
  }
  return out;
}

}  // namespace

std::vector<std::size_t> local_maxima(std::span<const double> values, double floor) {
  std::vector<std::size_t> out;
  for (std::size_t i : extrema(values, [](double a, double b) { return a > b; }))
    if (values[i] > floor) out.push_back(i);
  return out;
}

std::vector<std::size_t> local_minima(std::span<const double> values) {
  return extrema(values, [](double a, double b) { return a < b; });
}

}  // namespace mzi
