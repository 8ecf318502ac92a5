#include "mzi/nonmarkovianity.hpp"

#include <cmath>

#include "mzi/errors.hpp"

namespace mzi {

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::Markovian:
      return "markovian";
    case Classification::NonMarkovian:
      return "non_markovian";
    case Classification::Undefined:
      return "undefined";
  }
  return "undefined";
}

double trace_distance(const QubitState& rho1, const QubitState& rho2) {
  const QubitState delta = rho1 - rho2;
  const double a = delta.hh().real();
  const double d = delta.vv().real();
  const Complex b = delta.hv();
  const double t = a + d;
  // Traceless difference: eigenvalues are +-sqrt(((a-d)/2)^2 + |b|^2).
  if (std::abs(t) <= 1e-15) return std::hypot(0.5 * (a - d), std::abs(b));
  const auto [lo, hi] = hermitian_eigenvalues(a, d, b);
  return 0.5 * (std::abs(lo) + std::abs(hi));
}

BlpResult blp_from_samples(std::span<const double> distances) {
  if (distances.size() < 2) throw EmptyTrajectory("BLP measure needs at least two samples");
  BlpResult result;
  bool rising = false;
  for (std::size_t k = 1; k < distances.size(); ++k) {
    const double step = distances[k] - distances[k - 1];
    if (step > 0.0) {
      result.measure += step;
      if (!rising) ++result.revival_count;
      rising = true;
    } else {
      rising = false;
    }
  }
  result.classification =
      result.measure > kBlpThreshold ? Classification::NonMarkovian : Classification::Markovian;
  return result;
}

BlpResult blp_from_samples(const DistanceTrajectory& distances) {
  return blp_from_samples(std::span<const double>(distances.values));
}

BlpResult blp_channel(const PhysicalConfig& config, Path j, const TimeGrid& grid) {
  const DecoherenceTrajectory traj = kappa_path_trajectory(config, j, grid);
  const std::vector<double> moduli = traj.moduli();
  BlpResult result = blp_from_samples(moduli);
  result.grid_too_short = grid.tau_max < std::abs(reduce(config).tau_s);
  return result;
}

double concurrence(const PhysicalConfig& config) {
  const double tau_s = reduce(config).tau_s;
  return std::sqrt(-std::expm1(-tau_s * tau_s));
}

std::pair<Classification, Classification> classify_pair(const PhysicalConfig& config, const TimeGrid& grid) {
  auto classify = [&](Path j) {
    try {
      return blp_channel(config, j, grid).classification;
    } catch (const DegeneratePath&) {
      return Classification::Undefined;
    }
  };
  return {classify(Path::Zero), classify(Path::One)};
}

}  // namespace mzi
