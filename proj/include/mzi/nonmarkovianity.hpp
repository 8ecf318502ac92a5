#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>

#include "mzi/dephasing.hpp"

namespace mzi {

/// Positive-variation total below which a noiseless trajectory counts as
/// Markovian; smaller increments are floating-point residue.
inline constexpr double kBlpThreshold = 1e-9;

enum class Classification { Markovian, NonMarkovian, Undefined };

std::string_view to_string(Classification c);

struct BlpResult {
  double measure = 0.0;
  std::size_t revival_count = 0;
  Classification classification = Classification::Markovian;
  /// The grid ends before the echo at tau = |tau_s|; revivals may be missed.
  bool grid_too_short = false;
};

/// Half the trace norm of rho1 - rho2.
double trace_distance(const QubitState& rho1, const QubitState& rho2);

/// Discretized BLP measure: the sum of positive increments between
/// consecutive samples. Throws EmptyTrajectory for fewer than two samples.
BlpResult blp_from_samples(std::span<const double> distances);
BlpResult blp_from_samples(const DistanceTrajectory& distances);

/// BLP measure of the path-conditioned channel, maximized by the |+>, |->
/// pair, for which the trace distance is |kappa_j|.
BlpResult blp_channel(const PhysicalConfig& config, Path j, const TimeGrid& grid = {});

/// Concurrence of the frequency-path environment state,
/// sqrt(1 - exp(-tau_s^2)).
double concurrence(const PhysicalConfig& config);

/// Classifications of both exit channels; a degenerate path is Undefined.
std::pair<Classification, Classification> classify_pair(const PhysicalConfig& config,
                                                        const TimeGrid& grid = {});

}  // namespace mzi
