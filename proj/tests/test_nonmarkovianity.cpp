#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mzi/dephasing.hpp"
#include "mzi/errors.hpp"
#include "mzi/nonmarkovianity.hpp"

using namespace mzi;

namespace {

PhysicalConfig at_nm(double nm) { return PhysicalConfig::reference(nm * 1e-9); }

PhysicalConfig at_tau_s(double tau_s) {
  PhysicalConfig c;
  c.delta_x = tau_s * PhysicalConfig::c / (2.0 * kPi * c.sigma);
  return c;
}

// Concurrence sqrt(2 (1 - tr rho_path^2)) of the frequency-path state
//   sum_i sqrt(w_i) |f_i> (|0> + exp(2 pi i f_i dx / c) |1>) / sqrt(2),
// with the path reduced density matrix built from a discretized spectrum.
double brute_force_concurrence(const PhysicalConfig& c, std::size_t points) {
  const double half_width = 10.0;
  const double du = 2.0 * half_width / static_cast<double>(points);
  double total = 0.0;
  Complex overlap = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double u = -half_width + (static_cast<double>(i) + 0.5) * du;
    const double w = std::exp(-0.5 * u * u);
    const double f = c.mu + c.sigma * u;
    total += w;
    overlap += w * std::polar(1.0, 2.0 * kPi * f * c.delta_x / PhysicalConfig::c);
  }
  overlap /= total;
  // rho_path = [[1/2, overlap/2], [conj(overlap)/2, 1/2]]
  const double purity = 0.5 + 0.5 * std::norm(overlap);
  return std::sqrt(2.0 * (1.0 - purity));
}

}  // namespace

TEST(TraceDistance, KnownPairs) {
  const QubitState rho = QubitState::pure(Complex(0.6, 0.0), Complex(0.0, 0.8));
  EXPECT_EQ(trace_distance(rho, rho), 0.0);
  EXPECT_NEAR(trace_distance(QubitState::plus(), QubitState::minus()), 1.0, 1e-15);
  for (Complex k : {Complex(0.3, 0.4), Complex(-0.9, 0.0), Complex(0.0, 0.01)}) {
    const double d = trace_distance(apply_dephasing(QubitState::plus(), k), apply_dephasing(QubitState::minus(), k));
    EXPECT_NEAR(d, std::abs(k), 1e-15);
  }
}

TEST(TraceDistance, NonTracelessDifference) {
  // Not a pair of states, but the general branch must still be half the trace norm.
  const QubitState a(1.0, 0.0, 0.0, 0.0);
  const QubitState b(0.0, 0.0, 0.0, 0.5);
  EXPECT_NEAR(trace_distance(a, b), 0.75, 1e-15);
}

TEST(BlpFromSamples, MonotoneDecayIsMarkovian) {
  const TimeGrid g;
  std::vector<double> d;
  for (double tau : g.points()) d.push_back(std::exp(-0.5 * tau * tau));
  const BlpResult r = blp_from_samples(d);
  EXPECT_EQ(r.measure, 0.0);
  EXPECT_EQ(r.revival_count, 0u);
  EXPECT_EQ(r.classification, Classification::Markovian);
}

TEST(BlpFromSamples, SumsPositiveIncrements) {
  const std::vector<double> d{1.0, 0.5, 0.7, 0.6, 0.8};
  const BlpResult r = blp_from_samples(d);
  EXPECT_NEAR(r.measure, 0.4, 1e-15);
  EXPECT_EQ(r.revival_count, 2u);
  EXPECT_EQ(r.classification, Classification::NonMarkovian);
}

TEST(BlpFromSamples, RejectsShortTrajectories) {
  EXPECT_THROW(blp_from_samples(std::vector<double>{}), EmptyTrajectory);
  EXPECT_THROW(blp_from_samples(std::vector<double>{0.3}), EmptyTrajectory);
}

TEST(BlpChannel, ZeroPathDifferenceIsMarkovian) {
  const BlpResult r = blp_channel(at_nm(0.0), Path::Zero);
  EXPECT_EQ(r.measure, 0.0);
  EXPECT_EQ(r.classification, Classification::Markovian);
}

TEST(BlpChannel, EmergesAt5070nm) {
  const BlpResult r = blp_channel(at_nm(5070.0), Path::Zero);
  EXPECT_GT(r.measure, 0.01);
  EXPECT_EQ(r.classification, Classification::NonMarkovian);
  EXPECT_FALSE(r.grid_too_short);
}

TEST(BlpChannel, PathOnePeaksWherePathZeroDips) {
  // P_0 has a local maximum at dx = 6 * 780 nm.
  const double peak = 6.0 * 780.0;
  const double n1 = blp_channel(at_nm(peak), Path::One).measure;
  EXPECT_GT(n1, 0.01);
  EXPECT_GT(n1, blp_channel(at_nm(peak - 5.0), Path::One).measure);
  EXPECT_GT(n1, blp_channel(at_nm(peak + 5.0), Path::One).measure);
  const double n0 = blp_channel(at_nm(peak), Path::Zero).measure;
  EXPECT_LE(n0, blp_channel(at_nm(peak - 5.0), Path::Zero).measure);
  EXPECT_LE(n0, blp_channel(at_nm(peak + 5.0), Path::Zero).measure);
}

TEST(BlpChannel, LargeShiftApproachesOneHalf) {
  const PhysicalConfig c = at_tau_s(8.0);
  const BlpResult coarse = blp_channel(c, Path::Zero, TimeGrid{0.0, 13.0, 0.01});
  const BlpResult fine = blp_channel(c, Path::Zero, TimeGrid{0.0, 13.0, 0.0005});
  EXPECT_NEAR(fine.measure, 0.5, 0.05);
  EXPECT_NEAR(coarse.measure, fine.measure, 1e-3);
  EXPECT_NEAR(blp_channel(c, Path::One, TimeGrid{0.0, 13.0, 0.0005}).measure, 0.5, 0.05);
}

TEST(BlpChannel, FlagsGridEndingBeforeEcho) {
  EXPECT_TRUE(blp_channel(at_tau_s(8.0), Path::Zero).grid_too_short);
  EXPECT_FALSE(blp_channel(at_tau_s(3.0), Path::Zero).grid_too_short);
}

TEST(Concurrence, ClosedFormValues) {
  EXPECT_EQ(concurrence(at_nm(0.0)), 0.0);
  EXPECT_NEAR(concurrence(at_tau_s(1.0)), std::sqrt(1.0 - std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(concurrence(at_tau_s(1.0)), 0.7951, 1e-4);
  EXPECT_NEAR(concurrence(at_tau_s(40.0)), 1.0, 1e-15);
}

TEST(Concurrence, MatchesDiscretizedPathPurity) {
  for (double tau_s : {0.1, 1.0, 3.0}) {
    const PhysicalConfig c = at_tau_s(tau_s);
    EXPECT_NEAR(concurrence(c), brute_force_concurrence(c, 20000), 1e-6) << "tau_s = " << tau_s;
  }
}

TEST(ClassifyPair, Regimes) {
  auto zero = classify_pair(at_nm(0.0));
  EXPECT_EQ(zero.first, Classification::Markovian);
  EXPECT_EQ(zero.second, Classification::Undefined);

  auto dip = classify_pair(at_nm(5070.0));
  EXPECT_EQ(dip.first, Classification::NonMarkovian);
  EXPECT_EQ(dip.second, Classification::Markovian);

  auto overlap = classify_pair(at_tau_s(3.5));
  EXPECT_EQ(overlap.first, Classification::NonMarkovian);
  EXPECT_EQ(overlap.second, Classification::NonMarkovian);
}

TEST(Classification, Names) {
  EXPECT_EQ(to_string(Classification::Markovian), "markovian");
  EXPECT_EQ(to_string(Classification::NonMarkovian), "non_markovian");
  EXPECT_EQ(to_string(Classification::Undefined), "undefined");
}
