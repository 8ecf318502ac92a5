#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mzi/dephasing.hpp"
#include "mzi/errors.hpp"

using namespace mzi;

namespace {

PhysicalConfig at_nm(double nm) { return PhysicalConfig::reference(nm * 1e-9); }

}  // namespace

TEST(Reduce, ReferenceParametersAtZeroPathDifference) {
  const ReducedConfig r = reduce(at_nm(0.0));
  // 299792458 / 780e-9 / 5.68e11 by hand
  EXPECT_NEAR(r.r, 676.67, 0.01);
  EXPECT_EQ(r.tau_s, 0.0);
  EXPECT_EQ(r.phi, 0.0);
}

TEST(Reduce, ReferenceParametersAt5070nm) {
  const ReducedConfig r = reduce(at_nm(5070.0));
  EXPECT_NEAR(r.tau_s, 0.06036, 1e-5);
  EXPECT_NEAR(r.phi, 40.84, 0.01);
  EXPECT_NEAR(r.phi / r.tau_s, r.r, 1e-9 * r.r);
}

TEST(Reduce, RejectsInvalidParameters) {
  PhysicalConfig c;
  c.sigma = 0.0;
  EXPECT_THROW(reduce(c), ConfigError);
  c = PhysicalConfig{};
  c.mu = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PhysicalConfig{};
  c.delta_n = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PhysicalConfig{};
  c.delta_x = NAN;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Kappa, KnownValues) {
  EXPECT_EQ(kappa(0.0, 123.0), Complex(1.0, 0.0));
  EXPECT_NEAR(std::abs(kappa(1.0, 676.7)), std::exp(-0.5), 1e-15);
  const Complex forward = kappa(1.0, 3.3);
  const Complex backward = kappa(-1.0, 3.3);
  EXPECT_NEAR(std::abs(backward - std::conj(forward)), 0.0, 1e-15);
}

TEST(PathProbability, Limits) {
  EXPECT_EQ(path_probability(at_nm(0.0), Path::Zero), 1.0);
  EXPECT_EQ(path_probability(at_nm(0.0), Path::One), 0.0);
  EXPECT_LT(path_probability(at_nm(5070.0), Path::Zero), 0.01);
  const PhysicalConfig far = at_nm(5e6);  // tau_s ~ 60
  EXPECT_NEAR(path_probability(far, Path::Zero), 0.5, 1e-15);
  EXPECT_NEAR(path_probability(far, Path::One), 0.5, 1e-15);
}

TEST(PathProbability, SumsToOne) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dx(-2e-4, 2e-4);
  for (int i = 0; i < 200; ++i) {
    const PhysicalConfig c = PhysicalConfig::reference(dx(gen));
    EXPECT_EQ(path_probability(c, Path::Zero) + path_probability(c, Path::One), 1.0);
  }
}

TEST(KappaPath, ZeroPathDifferenceIsBareKappa) {
  const PhysicalConfig c = at_nm(0.0);
  const double r = reduce(c).r;
  for (double tau : {0.0, 0.3, 1.7, 4.9}) {
    const Complex diff = kappa_path(tau, c, Path::Zero) - kappa(tau, r);
    EXPECT_LT(std::abs(diff), 1e-15);
  }
  EXPECT_THROW(kappa_path(0.5, c, Path::One), DegeneratePath);
}

TEST(KappaPath, StartsAtOne) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> r(10.0, 1000.0), ts(0.01, 10.0);
  for (int i = 0; i < 500; ++i) {
    const ReducedConfig red = ReducedConfig::from_ratio_and_shift(r(gen), ts(gen));
    for (Path j : {Path::Zero, Path::One}) {
      if (path_probability(red, j) < tol::kDegenerateProbability) continue;
      EXPECT_LT(std::abs(kappa_path(0.0, red, j) - 1.0), 1e-12);
    }
  }
}

TEST(KappaPath, MixtureReproducesTotalChannel) {
  const ReducedConfig red = ReducedConfig::from_ratio_and_shift(676.7, 1.3);
  const double p0 = path_probability(red, Path::Zero);
  const double p1 = path_probability(red, Path::One);
  for (double tau = 0.0; tau <= 5.0; tau += 0.25) {
    const Complex mix = p0 * kappa_path(tau, red, Path::Zero) + p1 * kappa_path(tau, red, Path::One);
    EXPECT_LT(std::abs(mix - kappa(tau, red.r)), 1e-12);
  }
}

TEST(KappaPath, RevivalAt5070nm) {
  const DecoherenceTrajectory t = kappa_path_trajectory(at_nm(5070.0), Path::Zero, TimeGrid{});
  const std::vector<double> m = t.moduli();
  bool rises = false;
  for (std::size_t k = 1; k < m.size(); ++k) rises = rises || m[k] > m[k - 1];
  EXPECT_TRUE(rises);
}

TEST(KappaPath, TrajectoryMatchesPointwise) {
  const PhysicalConfig c = at_nm(5070.0);
  const TimeGrid g{0.0, 2.0, 0.1};
  const DecoherenceTrajectory t = kappa_path_trajectory(c, Path::Zero, g);
  ASSERT_EQ(t.values.size(), 21u);
  for (std::size_t k = 0; k < t.values.size(); ++k)
    EXPECT_LT(std::abs(t.values[k] - kappa_path(g.at(k), c, Path::Zero)), 1e-15);
}

TEST(TimeGrid, SizeAndValidation) {
  EXPECT_EQ(TimeGrid{}.size(), 501u);
  EXPECT_EQ((TimeGrid{0.0, 1.0, 0.1}.size()), 11u);
  EXPECT_EQ((TimeGrid{0.0, 1.05, 0.1}.size()), 11u);
  EXPECT_THROW((TimeGrid{0.0, 5.0, 0.0}.validate()), ConfigError);
  EXPECT_THROW((TimeGrid{2.0, 1.0, 0.1}.validate()), ConfigError);
}

TEST(QubitState, Validity) {
  EXPECT_TRUE(QubitState::plus().is_valid());
  EXPECT_TRUE(QubitState::pure(Complex(3.0, 0.0), Complex(0.0, 4.0)).is_valid());
  EXPECT_FALSE(QubitState(1.2, 0.0, 0.0, -0.2).is_valid());
  EXPECT_FALSE(QubitState(0.5, 0.1, 0.2, 0.5).is_valid());
  EXPECT_THROW(QubitState::pure(0.0, 0.0), NonPhysical);
}

TEST(ApplyDephasing, KnownChannels) {
  const QubitState plus = QubitState::plus();
  const QubitState same = apply_dephasing(plus, 1.0);
  EXPECT_EQ(same.hv(), plus.hv());
  EXPECT_EQ(same.hh(), plus.hh());

  const QubitState mixed = apply_dephasing(plus, 0.0);
  EXPECT_EQ(mixed.hh(), Complex(0.5));
  EXPECT_EQ(mixed.vv(), Complex(0.5));
  EXPECT_EQ(mixed.hv(), Complex(0.0));

  const QubitState partial = apply_dephasing(plus, std::exp(-0.5));
  EXPECT_NEAR(partial.hv().real(), 0.30327, 1e-5);
  EXPECT_NEAR(std::abs(partial.vh() - std::conj(partial.hv())), 0.0, 1e-16);

  EXPECT_THROW(apply_dephasing(plus, 1.5), NonPhysical);
}

TEST(PathFromInt, RejectsOtherIndices) {
  EXPECT_EQ(path_from_int(1), Path::One);
  EXPECT_THROW(path_from_int(2), ConfigError);
}
