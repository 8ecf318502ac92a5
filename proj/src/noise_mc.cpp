#include "mzi/noise_mc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include "mzi/errors.hpp"
#include "mzi/nonmarkovianity.hpp"
#include "mzi/parallel.hpp"

namespace mzi {

void NoiseConfig::validate() const {
  if (!(std::isfinite(full_width) && full_width >= 0.0)) throw ConfigError("noise_fw must be >= 0");
  if (repetitions < 2) throw ConfigError("reps must be >= 2");
  if (max_redraws == 0) throw ConfigError("max_redraws must be >= 1");
  grid.validate();
}

QubitState perturb_state(const QubitState& state, double sigma_tilde, RandomStream& rng, std::size_t max_redraws) {
  if (sigma_tilde == 0.0) return state;
  for (std::size_t attempt = 0; attempt < max_redraws; ++attempt) {
    const double e1 = rng.normal(0.0, sigma_tilde);
    const double e2 = rng.normal(0.0, sigma_tilde);
    const double e3 = 2.0 * kPi * rng.uniform();
    const Complex off = std::polar(e2, e3);
    const QubitState candidate = state + QubitState(e1, off, std::conj(off), -e1);
    if (candidate.is_valid()) return candidate;
  }
  std::ostringstream msg;
  msg << "no physical perturbation after " << max_redraws << " draws (sigma_tilde = " << sigma_tilde << ")";
  throw RedrawExhausted(msg.str());
}

DistanceTrajectory noisy_trace_distance_trajectory(const PhysicalConfig& config, Path j, const NoiseConfig& noise,
                                                   RandomStream& rng) {
  const DecoherenceTrajectory exact = kappa_path_trajectory(config, j, noise.grid);
  const double s = noise.sigma_tilde();
  const QubitState plus = QubitState::plus();
  const QubitState minus = QubitState::minus();

  DistanceTrajectory out{noise.grid, std::vector<double>(exact.values.size())};
  for (std::size_t k = 0; k < exact.values.size(); ++k) {
    const QubitState rho_plus = perturb_state(apply_dephasing(plus, exact.values[k]), s, rng, noise.max_redraws);
    const QubitState rho_minus = perturb_state(apply_dephasing(minus, exact.values[k]), s, rng, noise.max_redraws);
    out.values[k] = std::clamp(trace_distance(rho_plus, rho_minus), 0.0, 1.0);
  }
  return out;
}

namespace {

// Sum of squared residuals of |kappa_j| at path difference dx; +inf when the
// path is degenerate there.
double model_residual(const PhysicalConfig& config_template, Path j, double dx, const DistanceTrajectory& data) {
  DecoherenceTrajectory model;
  try {
    model = kappa_path_trajectory(config_template.with_delta_x(dx), j, data.grid);
  } catch (const DegeneratePath&) {
    return std::numeric_limits<double>::infinity();
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < model.values.size(); ++k) {
    const double r = std::abs(model.values[k]) - data.values[k];
    sum += r * r;
  }
  return sum;
}

struct Sample {
  double x;
  double f;
};

Sample golden_section(const std::function<double(double)>& f, double a, double b, double tolerance, Sample best) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  auto keep = [&](double x, double fx) {
    if (fx < best.f) best = {x, fx};
  };
  keep(c, fc);
  keep(d, fd);
  for (int iter = 0; iter < 300 && (b - a) > tolerance; ++iter) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
      keep(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
      keep(d, fd);
    }
  }
  const double mid = 0.5 * (a + b);
  keep(mid, f(mid));
  return best;
}

void refine_local_minima(const std::function<double(double)>& f, const std::vector<Sample>& scan, double tolerance,
                         Sample& best) {
  for (const Sample& s : scan)
    if (s.f < best.f) best = s;
  for (std::size_t i = 1; i + 1 < scan.size(); ++i) {
    if (scan[i].f <= scan[i - 1].f && scan[i].f <= scan[i + 1].f && std::isfinite(scan[i].f))
      best = golden_section(f, scan[i - 1].x, scan[i + 1].x, tolerance, best);
  }
}

}  // namespace

FitResult fit_decoherence(const DistanceTrajectory& noisy, const PhysicalConfig& config_template, Path j,
                          const FitOptions& options) {
  config_template.validate();
  noisy.grid.validate();
  if (noisy.values.size() != noisy.grid.size()) throw ConfigError("noisy trajectory does not match its grid");
  if (options.bracket_points < 3) throw ConfigError("fit bracket needs at least 3 points");

  const double half_width =
      options.bracket_half_width > 0.0 ? options.bracket_half_width : 0.5 * PhysicalConfig::c / config_template.mu;
  const double center = config_template.delta_x;
  const double lo = center - half_width;
  const double hi = center + half_width;
  const std::size_t n = options.bracket_points;
  const double spacing = (hi - lo) / static_cast<double>(n - 1);
  const std::size_t mid = (n - 1) / 2;

  auto objective = [&](double x) { return model_residual(config_template, j, x, noisy); };

  std::vector<Sample> coarse(n);
  for (std::size_t i = 0; i < n; ++i) {
    // The template itself is evaluated exactly when n is odd.
    const double x = (n % 2 == 1 && i == mid) ? center : center + (static_cast<double>(i) - static_cast<double>(mid)) * spacing;
    coarse[i] = {x, objective(x)};
  }
  const auto coarse_best = std::min_element(coarse.begin(), coarse.end(), [](auto& l, auto& r) { return l.f < r.f; });
  if (!std::isfinite(coarse_best->f)) throw FitDiverged("model undefined across the whole bracket");

  // Basins can be narrower than the scan spacing, so every interior local
  // minimum is refined before the boundary is judged.
  Sample best = *coarse_best;
  refine_local_minima(objective, coarse, options.tolerance, best);

  // |kappa_j| is even in the interferometric phase at fixed tau_s, so every
  // basin has a near-degenerate twin mirrored about the closest phase
  // multiple of pi. The twin may fall between scan points; refine it too.
  const double half_fringe = 0.5 * PhysicalConfig::c / config_template.mu;
  const double mirror = 2.0 * std::round(best.x / half_fringe) * half_fringe - best.x;
  const double separation = std::abs(mirror - best.x);
  if (separation > options.tolerance && mirror > lo && mirror < hi) {
    const double reach = std::min(spacing, 0.5 * separation);
    best = golden_section(objective, std::max(lo, mirror - reach), std::min(hi, mirror + reach), options.tolerance,
                          best);
  }

  // Near fringe extrema the twin drifts off the mirror point and can sit
  // within a few nm of the optimum. Rescan ever smaller neighbourhoods so
  // twins closer than the coarse spacing are still told apart.
  for (double reach = 2.0 * spacing; reach > 100.0 * options.tolerance; reach /= 10.0) {
    const double a = std::max(lo, best.x - reach);
    const double b = std::min(hi, best.x + reach);
    std::vector<Sample> local(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = i + 1 == n ? b : a + static_cast<double>(i) * ((b - a) / static_cast<double>(n - 1));
      local[i] = {x, objective(x)};
    }
    refine_local_minima(objective, local, options.tolerance, best);
  }

  if (best.x - lo <= options.tolerance || hi - best.x <= options.tolerance)
    throw FitDiverged("refined optimum on the bracket boundary");

  FitResult result;
  result.delta_x = best.x;
  result.residual = best.f;
  const DecoherenceTrajectory model = kappa_path_trajectory(config_template.with_delta_x(best.x), j, noisy.grid);
  result.model = DistanceTrajectory{noisy.grid, model.moduli()};
  return result;
}

EnsembleResult ensemble(const PhysicalConfig& config, Path j, const NoiseConfig& noise, unsigned threads,
                        const FitOptions& fit) {
  noise.validate();
  config.validate();
  // Surface DegeneratePath before spending any work.
  (void)kappa_path(0.0, config, j);

  struct Outcome {
    std::optional<double> measure;
    double delta_x = 0.0;
  };
  std::vector<Outcome> outcomes(noise.repetitions);
  parallel_for(noise.repetitions, threads, [&](std::size_t rep) {
    RandomStream rng(derive_seed(noise.seed, rep));
    try {
      const DistanceTrajectory noisy = noisy_trace_distance_trajectory(config, j, noise, rng);
      const FitResult fitted = fit_decoherence(noisy, config, j, fit);
      outcomes[rep] = {blp_from_samples(fitted.model).measure, fitted.delta_x};
    } catch (const RedrawExhausted&) {
    } catch (const FitDiverged&) {
    }
  });

  EnsembleResult result;
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t count = 0;
  for (const Outcome& o : outcomes) {
    if (!o.measure) {
      ++result.failures;
      continue;
    }
    const double x = *o.measure;
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
    result.measures.push_back(x);
    result.fitted_delta_x_samples.push_back(o.delta_x);
  }
  if (2 * result.failures > noise.repetitions || count < 2) {
    std::ostringstream msg;
    msg << result.failures << " of " << noise.repetitions << " repetitions failed";
    throw EnsembleFailure(msg.str());
  }
  result.mean_measure = mean;
  result.std_measure = std::sqrt(m2 / static_cast<double>(count - 1));
  return result;
}

}  // namespace mzi
