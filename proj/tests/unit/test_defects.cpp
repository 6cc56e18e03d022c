#include <gtest/gtest.h>

#include "stiffspec/defects.hpp"
#include "stiffspec/models_1d.hpp"
#include "stiffspec/models_abstract.hpp"

using namespace stiffspec;

TEST(Defects, ObstacleMatchesClosedForm) {
  const FormPair p = build_obstacle(ObstacleConfig{});
  const LimitSpectrum l = limit_spectrum(p, 1e-8, 2);
  for (double k : {5.0, 10.0}) {
    const DefectSet d = defects_kappa(p, k, l, IndexRange{0, 1});
    ASSERT_EQ(d.etas.size(), 1);
    EXPECT_NEAR(d.etas(0) * d.etas(0), 2.0 / (3.0 + k), 2e-3 * 2.0 / (3.0 + k)) << "kappa " << k;
    EXPECT_FALSE(d.clamped);
  }
}

TEST(Defects, AscendingAndBelowOne) {
  const FormPair p = build_singular(200);
  const LimitSpectrum l = limit_spectrum(p, 1e-8, 4);
  const DefectSet d = defects_kappa(p, 20.0, l, IndexRange{0, 3});
  ASSERT_EQ(d.etas.size(), 3);
  for (Index i = 0; i < 3; ++i) {
    EXPECT_GE(d.etas(i), 0.0);
    EXPECT_LT(d.etas(i), 1.0);
    if (i > 0) EXPECT_GE(d.etas(i), d.etas(i - 1));
  }
}

TEST(Defects, ExactEigenspaceHasZeroDefect) {
  const ClusteredPencil cp = clustered_pencil(20, 3, 2, 5);
  const DefectSet d = defects_general(cp.pencil, cp.eig.vectors.middleCols(3, 2));
  EXPECT_LT(d.etas.maxCoeff(), 1e-6);
}

TEST(Defects, SchurResidualOnRotatedBasis) {
  const ClusteredPencil cp = clustered_pencil(24, 4, 3, 9);
  const Mat V = rotated_basis(cp, 0.05);
  EXPECT_LT(schur_residual(cp.pencil, V, cp.lambda_q), 1e-10);
}

TEST(Defects, RangeOutsideLimitSpectrumThrows) {
  const FormPair p = build_regular(40);
  const LimitSpectrum l = limit_spectrum(p, 1e-8, 2);
  EXPECT_THROW(defects_kappa(p, 5.0, l, IndexRange{1, 5}), ValidationError);
}
