// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "thz/channel_model.hpp"

using namespace thz;
using std::numbers::pi;

namespace {
constexpr double kD = 0.0015;
constexpr double kF = 1e11;
constexpr double kC = 3e8;
const cd j{0.0, 1.0};

void expect_near(const CVector& a, const CVector& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (Eigen::Index k = 0; k < a.size(); ++k) EXPECT_LT(std::abs(a[k] - b[k]), tol) << "k=" << k;
}
}  // namespace

TEST(FarSteering, BroadsideIsUniform) {
  CVector want(4);
  want << 0.5, 0.5, 0.5, 0.5;
  expect_near(far_steering(0.0, 4), want, 1e-15);
}

TEST(FarSteering, ThirtyDegreesStepsByQuarterTurn) {
  CVector want(4);
  want << 0.5, 0.5 * j, -0.5, -0.5 * j;
  expect_near(far_steering(pi / 6, 4), want, 1e-15);
  expect_near(far_steering(-pi / 6, 4), want.conjugate(), 1e-15);
}

TEST(NearElementDistances, OffsetsAreCentred) {
  const RVector psi = element_offsets(4);
  EXPECT_DOUBLE_EQ(psi[0], -1.5);
  EXPECT_DOUBLE_EQ(psi[1], -0.5);
  EXPECT_DOUBLE_EQ(psi[2], 0.5);
  EXPECT_DOUBLE_EQ(psi[3], 1.5);
}

TEST(NearElementDistances, BroadsidePair) {
  const RVector xi = near_element_distances(10.0, 0.0, 2, kD);
  // sqrt(100 + 0.00075^2)
  EXPECT_NEAR(xi[0], 10.000000028124999960, 1e-12);
  EXPECT_NEAR(xi[1], 10.000000028124999960, 1e-12);
}

TEST(NearElementDistances, EndfireIsCollinear) {
  const RVector xi = near_element_distances(10.0, pi / 2, 2, kD);
  EXPECT_NEAR(xi[0], 10.0 + 0.5 * kD, 1e-12);
  EXPECT_NEAR(xi[1], 10.0 - 0.5 * kD, 1e-12);
}

TEST(NearElementDistances, PathDifferenceIsStable) {
  const RVector diff = near_path_differences(10.0, 0.0, 2, kD);
  EXPECT_NEAR(diff[0], 2.8124999960449e-8, 1e-20);
  const RVector xi = near_element_distances(10.0, 0.4, 8, kD);
  const RVector d2 = near_path_differences(10.0, 0.4, 8, kD);
  for (Eigen::Index k = 0; k < 8; ++k) EXPECT_NEAR(d2[k], xi[k] - 10.0, 1e-13);
}

TEST(NearElementDistances, RejectsSingularGeometry) {
  // Scatterer sitting on element 2 of 2: offset +d/2 at endfire.
  EXPECT_THROW(near_element_distances(0.5 * kD, pi / 2, 2, kD), GeometryError);
  EXPECT_THROW(near_element_distances(0.0, 0.0, 2, kD), GeometryError);
  EXPECT_THROW(near_steering(0.5 * kD, pi / 2, 2, kD, kF, kC), GeometryError);
}

TEST(NearSteering, SingleElementIsOne) {
  const CVector a = near_steering(10.0, 0.3, 1, kD, kF, kC);
  ASSERT_EQ(a.size(), 1);
  EXPECT_NEAR(std::abs(a[0] - cd(1.0, 0.0)), 0.0, 1e-15);
}

TEST(NearSteering, BroadsidePairMatchesOracle) {
  const CVector a = near_steering(10.0, 0.0, 2, kD, kF, kC);
  // -2*pi*f/c * (xi - delta), evaluated at 40 digits.
  const double phase = -0.000058904862171973660908;
  for (Eigen::Index k = 0; k < 2; ++k) {
    EXPECT_NEAR(std::abs(a[k]), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(std::arg(a[k]), phase, 1e-12);
  }
}

TEST(NearSteering, ThreeElementsAtThirtyDegreesMatchOracle) {
  const CVector a = near_steering(10.0, pi / 6, 3, kD, kF, kC);
  CVector want(3);
  want << cd(-0.00010201091020582339, -0.57730695728375947), cd(0.57735026918962586, 0.0),
      cd(0.00010204151806934581, 0.57739355981837628);
  expect_near(a, want, 1e-12);
}

TEST(NearSteering, ApproachesFarFieldAtLargeDistance) {
  const double theta = 0.4;
  const CVector nf = near_steering(1e6, theta, 64, kD, kF, kC);
  const CVector ff = far_steering(theta, 64);
  // Remove the global phase before comparing elementwise.
  const cd rot = ff.dot(nf) / std::abs(ff.dot(nf));
  double worst = 0.0;
  for (Eigen::Index k = 0; k < 64; ++k) worst = std::max(worst, std::abs(nf[k] - rot * ff[k]));
  EXPECT_LT(worst, 1e-3);
  EXPECT_GE(std::abs(ff.dot(nf)), 0.999999);
}

TEST(SteeringProperty, UnitNormForRandomInputs) {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::size_t>(1 + rng.next_u64() % 200);
    const double theta = rng.uniform(-pi / 2, pi / 2);
    const double aperture = static_cast<double>(n) * kD;
    const double delta = aperture + rng.uniform(0.01, 100.0);
    EXPECT_NEAR(far_steering(theta, n).norm(), 1.0, 1e-12);
    EXPECT_NEAR(near_steering(delta, theta, n, kD, kF, kC).norm(), 1.0, 1e-12);
  }
}

TEST(RayleighDistance, HandValues) {
  EXPECT_NEAR(rayleigh_distance(64, kD, kF, kC), 5.9535, 5.9535 * 1e-6);
  EXPECT_NEAR(rayleigh_distance(128, kD, kF, kC), 24.1935, 24.1935 * 1e-6);
  EXPECT_NEAR(rayleigh_distance(2, kD, kF, kC), 0.0015, 1e-15);
}

TEST(RayleighDistance, ClassifiesRegions) {
  EXPECT_EQ(classify_region(5.0, 5.9535), FieldRegion::Near);
  EXPECT_EQ(classify_region(5.9535, 5.9535), FieldRegion::Far);
}

TEST(ScenarioConfig, DefaultsAreReferenceParameters) {
  const ScenarioConfig c;
  EXPECT_EQ(c.total_paths, 4u);
  EXPECT_DOUBLE_EQ(c.gamma, 0.5);
  EXPECT_DOUBLE_EQ(c.carrier_freq, 100e9);
  EXPECT_DOUBLE_EQ(c.light_speed, 3e8);
  EXPECT_DOUBLE_EQ(c.distance_min, 10.0);
  EXPECT_DOUBLE_EQ(c.distance_max, 80.0);
  EXPECT_DOUBLE_EQ(c.pn_var_tx, 0.1);
  EXPECT_DOUBLE_EQ(c.pn_var_rx, 0.2);
  EXPECT_EQ(c.snr_grid, (std::vector<double>{0, 5, 10, 15, 20}));
  EXPECT_NO_THROW(validate(c));
}

TEST(ScenarioConfig, ValidationRejectsBadValues) {
  ScenarioConfig c;
  c.gamma = 1.5;
  EXPECT_THROW(validate(c), ConfigError);
  c = ScenarioConfig{};
  c.num_antennas = 1;
  EXPECT_THROW(validate(c), ConfigError);
  c = ScenarioConfig{};
  c.distance_min = 0.05;  // inside the 0.0945 m aperture
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(ScenarioConfig, PathSplitRoundsHalfUp) {
  ScenarioConfig c;
  c.total_paths = 3;
  c.gamma = 0.5;
  const PathSplit s = split_paths(c);
  EXPECT_EQ(s.far, 2u);
  EXPECT_EQ(s.near, 1u);
  EXPECT_TRUE(s.rounded);
}

TEST(NearDistanceRange, FallsBackBelowRayleighForSmallArrays) {
  const ScenarioConfig c64 = ScenarioConfig{}.with_antennas(64);
  const DistanceRange r64 = near_distance_range(c64);
  EXPECT_TRUE(r64.overridden);
  EXPECT_NEAR(r64.lo, 0.59535, 1e-9);
  EXPECT_LT(r64.hi, rayleigh_distance(c64));

  const ScenarioConfig c128 = ScenarioConfig{}.with_antennas(128);
  const DistanceRange r128 = near_distance_range(c128);
  EXPECT_FALSE(r128.overridden);
  EXPECT_DOUBLE_EQ(r128.lo, 10.0);
  EXPECT_NEAR(r128.hi, 24.1935, 1e-3);
}

TEST(DrawChannel, ReferenceSplitIsTwoAndTwo) {
  Rng rng(1);
  const auto r = draw_channel(ScenarioConfig{}, rng);
  EXPECT_EQ(r.far_paths.size(), 2u);
  EXPECT_EQ(r.near_paths.size(), 2u);
  EXPECT_EQ(r.channel.size(), 64);
}

TEST(DrawChannel, GammaEndpoints) {
  ScenarioConfig c;
  c.gamma = 1.0;
  Rng rng(2);
  const auto far = draw_channel(c, rng);
  EXPECT_TRUE(far.near_paths.empty());
  EXPECT_EQ(far.far_paths.size(), 4u);
  CVector manual = CVector::Zero(64);
  for (const auto& p : far.far_paths) manual += p.gain * far_steering(p.angle, 64);
  manual *= std::sqrt(64.0 / 4.0);
  EXPECT_LT((manual - far.channel).norm(), 1e-12);

  c.gamma = 0.0;
  const auto near = draw_channel(c, rng);
  EXPECT_TRUE(near.far_paths.empty());
  EXPECT_EQ(near.near_paths.size(), 4u);
}

TEST(DrawChannel, PathsRespectRegionsAndRanges) {
  for (std::size_t n : {16u, 64u, 128u}) {
    const ScenarioConfig c = ScenarioConfig{}.with_antennas(n);
    const DistanceRange range = near_distance_range(c);
    Rng rng(n);
    for (int i = 0; i < 200; ++i) {
      const auto r = draw_channel(c, rng);
      for (const auto& p : r.near_paths) {
        EXPECT_EQ(classify_region(p.distance, r.rayleigh_distance), FieldRegion::Near);
        EXPECT_GE(p.distance, range.lo);
        EXPECT_LE(p.distance, range.hi);
        EXPECT_LE(std::abs(p.angle), pi / 2);
      }
      for (const auto& p : r.far_paths) EXPECT_LE(std::abs(p.angle), pi / 2);
    }
  }
}

TEST(DrawChannel, ReconstructsFromStoredPaths) {
  const ScenarioConfig c = ScenarioConfig{}.with_antennas(128);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto r = draw_channel(c, rng);
    EXPECT_LE((assemble_channel(r, c) - r.channel).norm(), 1e-12 * r.channel.norm());
  }
}

TEST(DrawChannel, DeterministicForSeed) {
  Rng a(77), b(77);
  const auto ra = draw_channel(ScenarioConfig{}, a);
  const auto rb = draw_channel(ScenarioConfig{}, b);
  EXPECT_TRUE(ra.channel == rb.channel);
  EXPECT_EQ(ra.near_paths[1].distance, rb.near_paths[1].distance);
}

TEST(DrawChannel, MeanPowerIsN) {
  const ScenarioConfig c = ScenarioConfig{}.with_antennas(64);
  Rng rng(2024);
  double acc = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) acc += draw_channel(c, rng).channel.squaredNorm();
  EXPECT_NEAR(acc / draws, 64.0, 0.05 * 64.0);
}
