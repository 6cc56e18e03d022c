#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "stiffspec/forms.hpp"
#include "stiffspec/models_arch.hpp"

using namespace stiffspec;

TEST(ModelsArch, InfSupBoundFromGeometry) {
  ArchConfig cfg;
  EXPECT_NEAR(lbb_theoretical(cfg), std::sqrt(2.0), 1e-15);
  cfg.R = std::numeric_limits<double>::infinity();
  EXPECT_EQ(lbb_theoretical(cfg), 1.0);
}

TEST(ModelsArch, DiscreteInfSupBelowBound) {
  ArchConfig cfg;
  cfg.n_elems = 16;
  const LbbEstimate l = lbb_constant(build_arch(cfg));
  EXPECT_LE(l.kappa_frak, std::sqrt(2.0) + 1e-6);
  EXPECT_GT(l.kappa_frak, 1.0);
}

TEST(ModelsArch, PhysicalPairIsRescaled) {
  ArchConfig cfg;
  cfg.n_elems = 8;
  const double eps = 0.1;
  const FormPair u = build_arch(cfg), p = build_arch_physical(cfg, eps);
  EXPECT_LT((p.B - std::pow(eps, 4) * u.B).norm(), 1e-13 * p.B.norm());
  EXPECT_LT((p.E - eps * eps * u.E).norm(), 1e-13 * p.E.norm());
  EXPECT_EQ(p.M, u.M);
}

TEST(ModelsArch, Validation) {
  ArchConfig cfg;
  cfg.l = 4.0;  // more than half of the unit circle
  EXPECT_THROW(build_arch(cfg), ValidationError);
  cfg = ArchConfig{};
  cfg.n_elems = 2;
  EXPECT_THROW(build_arch(cfg), ValidationError);
  EXPECT_THROW(build_arch_physical(ArchConfig{}, 0.0), ValidationError);
}

TEST(ModelsArch, ReferenceCouplingReadings) {
  EXPECT_DOUBLE_EQ(arch_reference_kappa(0.1), 100.0);
  EXPECT_DOUBLE_EQ(arch_reference_kappa(0.1, ArchReferenceReading::Inverse), 10.0);
}

TEST(ModelsArch, ThresholdRelations) {
  ArchConfig cfg;
  cfg.n_elems = 16;
  const LimitSpectrum l = curved_rod_spectrum(cfg);
  const ArchThresholds th = eps_thresholds(cfg, l, 3);
  EXPECT_NEAR(th.c, 2.0, 1e-14);
  EXPECT_NEAR(th.gamma, (l.values(1) - l.values(0)) / (l.values(1) + l.values(0)), 1e-15);
  EXPECT_NEAR(th.eps0, std::sqrt(3.0) / 6.0 * std::sqrt(th.c * th.gamma), 1e-15);
  EXPECT_DOUBLE_EQ(th.eps1, th.eps0 / 2.0);
  EXPECT_FALSE(arch_upper(th, 2.0 * th.eps2).valid);
  EXPECT_TRUE(arch_upper(th, 0.5 * th.eps2).valid);
}

TEST(ModelsArch, CurvedRodLimitConvergesAtLeastQuadratically) {
  ArchConfig cfg;
  cfg.l = std::numbers::pi / 2.0;
  auto lowest = [&](Index n) {
    cfg.n_elems = n;
    return curved_rod_spectrum(cfg).values(0);
  };
  const double ref = lowest(64);
  const double e4 = std::abs(lowest(4) - ref), e8 = std::abs(lowest(8) - ref), e16 = std::abs(lowest(16) - ref);
  EXPECT_GE(std::log2(e4 / e8), 2.0);
  EXPECT_GE(std::log2(e8 / e16), 2.0);
}
