#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "stiffspec/forms.hpp"
#include "stiffspec/models_1d.hpp"

using namespace stiffspec;

TEST(Forms, CoupledPencilIsBPlusKappaSquaredE) {
  const FormPair p = build_regular(20);
  const SymPencil s = assemble_coupled(p, 7.0);
  EXPECT_NEAR((s.A - (p.B + 49.0 * p.E)).norm(), 0.0, 1e-12 * s.A.norm());
  EXPECT_EQ(s.M, p.M);
}

TEST(Forms, RegularLimitIsPiSquared) {
  const FormPair p = build_regular(400);
  const LimitSpectrum l = limit_spectrum(p, 1e-8, 3);
  ASSERT_GE(l.values.size(), 2);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  EXPECT_NEAR(l.values(0) / pi2, 1.0, 1e-4);
  EXPECT_NEAR(l.values(1) / (4.0 * pi2), 1.0, 1e-3);
  const Mat& V = l.vectors;
  EXPECT_NEAR((V.transpose() * p.M * V - Mat::Identity(V.cols(), V.cols())).norm(), 0.0, 1e-10);
  // Limit vectors lie in the kernel of E.
  EXPECT_LT((p.E * V).norm(), 1e-8 * p.E.norm());
}

TEST(Forms, ResolventMatchesSolve) {
  const FormPair p = build_singular(40);
  const Vec f = Vec::LinSpaced(p.n, -1.0, 1.0);
  const Vec x = resolvent_apply(p, 3.0, f);
  const Vec mf = p.M * f;
  EXPECT_LT(((p.B + 9.0 * p.E) * x - mf).norm(), 1e-10 * mf.norm());
}

TEST(Forms, TextRoundTrip) {
  const FormPair p = build_regular(8);
  std::stringstream ss;
  write_form_pair(ss, p);
  const FormPair q = read_form_pair(ss);
  EXPECT_EQ(q.n, p.n);
  EXPECT_EQ(q.B, p.B);
  EXPECT_EQ(q.E, p.E);
  EXPECT_EQ(q.M, p.M);
}

TEST(Forms, ReadRejectsTruncatedInput) {
  std::stringstream ss("3\n1 2\n");
  EXPECT_ANY_THROW(read_form_pair(ss));
}
