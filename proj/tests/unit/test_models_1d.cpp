#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "stiffspec/linalg.hpp"
#include "stiffspec/models_1d.hpp"

using namespace stiffspec;

namespace {
const double kPi2 = std::numbers::pi * std::numbers::pi;
}

// Roots of sqrt(kappa^2 - lambda) = -sqrt(lambda) cot(sqrt(lambda)), computed
// independently to 30 digits and frozen here.
TEST(Models1d, TranscendentalRoots) {
  EXPECT_NEAR(obstacle_exact_eig(5.0, 1), 6.737861369621187, 1e-10);
  EXPECT_NEAR(obstacle_exact_eig(10.0, 1), 8.135854282835138, 1e-10);
  EXPECT_NEAR(obstacle_exact_eig(100.0, 1), 9.675103296508963, 1e-10);
  EXPECT_NEAR((kPi2 - obstacle_exact_eig(100.0, 1)) / kPi2, 0.019707082135828, 1e-12);
}

TEST(Models1d, ObstacleBracketAtKappaFive) {
  const ObstacleBracket b = obstacle_bracket(5.0);
  EXPECT_NEAR(b.lower, 0.25, 1e-15);
  EXPECT_NEAR(b.d, 2.0 * kPi2, 1e-12);
  EXPECT_NEAR(b.upper, 0.75, 1e-14);
  EXPECT_TRUE(b.in_range);
  EXPECT_FALSE(obstacle_bracket(4.0).in_range);
}

TEST(Models1d, SeriesPartialSums) {
  EXPECT_NEAR(taylor_reference(100.0, 1), 0.02, 1e-16);
  EXPECT_NEAR(taylor_reference(100.0, 2), 0.0197, 1e-16);
  EXPECT_THROW(taylor_reference(100.0, 0), ValidationError);
}

TEST(Models1d, ObstacleMeshHasNodeAtOne) {
  ObstacleConfig cfg;
  cfg.n_elems = 300;
  const Mesh1D m = obstacle_mesh(cfg);
  ASSERT_EQ(m.nodes.size(), 301);
  EXPECT_DOUBLE_EQ(m.nodes(0), 0.0);
  EXPECT_DOUBLE_EQ(m.nodes(300), cfg.L);
  EXPECT_TRUE(((m.nodes.array() - 1.0).abs() < 1e-14).any());
}

TEST(Models1d, FemEigenvalueApproachesRoot) {
  ObstacleConfig cfg;
  cfg.n_elems = 1500;
  const FormPair p = build_obstacle(cfg);
  const double lh = geig_lowest(SymPencil{p.B + 100.0 * p.E, p.M}, 1).values(0);
  EXPECT_NEAR(lh / 8.135854282835138, 1.0, 2e-5);
  EXPECT_GT(lh, 8.135854282835138);  // conforming elements bound from above
}

TEST(Models1d, IntervalFamiliesShareLimit) {
  const FormPair r = build_regular(200), s = build_singular(200);
  const LimitSpectrum lr = limit_spectrum(r, 1e-8, 2), ls = limit_spectrum(s, 1e-8, 2);
  EXPECT_NEAR(lr.values(0), ls.values(0), 1e-10);
  EXPECT_NEAR(lr.values(0) / kPi2, 1.0, 2e-4);
  EXPECT_THROW(build_regular(201), ValidationError);
}
