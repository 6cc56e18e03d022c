#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "stiffspec/harness.hpp"

using namespace stiffspec;

namespace {

std::vector<SweepRecord> small_regular_sweep() {
  Problem p;
  p.model = Model::Regular;
  p.interval_elems = 100;
  p.m = 1;
  return kappa_sweep(p, {5.0, 10.0, 20.0});
}

}  // namespace

TEST(Harness, MakeCheckSlackAndValidity) {
  EXPECT_EQ(make_check("t", 0.0, 1.0 + 0.5 * kBracketSlack, 1.0, true).ok, 1);
  EXPECT_EQ(make_check("t", 0.0, 1.0 + 2.0 * kBracketSlack, 1.0, true).ok, 0);
  EXPECT_EQ(make_check("t", NAN, -5.0, 1.0, true).ok, 1);
  EXPECT_EQ(make_check("t", 0.0, 9.0, 1.0, false).ok, -1);
  EXPECT_EQ(make_check("t", 0.0, NAN, 1.0, true).ok, 0);
}

TEST(Harness, SyntheticSlope) {
  std::vector<double> x, y;
  for (double k : {5.0, 10.0, 20.0, 50.0}) {
    x.push_back(k);
    y.push_back(3.0 * std::pow(k, -2.0));
  }
  const RateFit f = fit_loglog_slope(x, y);
  EXPECT_NEAR(f.slope, -2.0, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_EQ(f.points_used, 4);
  y[1] = 0.0;
  EXPECT_THROW(fit_loglog_slope(x, y), ValidationError);
  EXPECT_THROW(fit_loglog_slope({1.0, 2.0}, {1.0, 2.0}), ValidationError);
}

TEST(Harness, CsvRoundTrip) {
  const auto recs = small_regular_sweep();
  std::stringstream ss;
  emit(recs, Format::Csv, ss);
  const CsvTable t = parse_csv(ss);
  ASSERT_GE(t.header.size(), 5u);
  EXPECT_EQ(t.header[0], "grid_value");
  auto col = [&](const std::string& name) {
    for (size_t j = 0; j < t.header.size(); ++j)
      if (t.header[j] == name) return static_cast<long>(j);
    return -1L;
  };
  for (const char* name : {"lambda_1", "lambda_inf_1", "eta_1", "rel_err_1", "regular-defect_lower",
                           "regular-defect_upper", "regular-defect_ok"})
    EXPECT_GE(col(name), 0) << name;
  ASSERT_EQ(t.rows.size(), recs.size());
  for (size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(t.rows[i][0], recs[i].grid_value);
    EXPECT_EQ(t.rows[i][static_cast<size_t>(col("lambda_1"))], recs[i].eigenvalues(0));
    EXPECT_EQ(t.rows[i][static_cast<size_t>(col("eta_1"))], recs[i].defects.etas(0));
  }
}

TEST(Harness, JsonWritesNullForMissingSides) {
  auto recs = small_regular_sweep();
  recs[0].checks.push_back(make_check("one-sided", NAN, 0.5, 1.0, true));
  std::stringstream ss;
  emit(recs, Format::Json, ss);
  const std::string s = ss.str();
  EXPECT_NE(s.find("one-sided"), std::string::npos);
  EXPECT_NE(s.find("null"), std::string::npos);
  EXPECT_EQ(s.find("nan"), std::string::npos);
}

TEST(Harness, InjectedViolationIsReportedWithTag) {
  auto recs = small_regular_sweep();
  ASSERT_TRUE(verify_brackets(recs).success());
  recs[1].checks.push_back(make_check("injected", 0.0, 2.0, 1.0, true));
  const BracketSummary s = verify_brackets(recs);
  EXPECT_EQ(s.failures, 1);
  ASSERT_EQ(s.failure_lines.size(), 1u);
  EXPECT_EQ(s.failure_lines[0].rfind("injected at 10", 0), 0u);
  EXPECT_FALSE(recs[1].bracket_ok());
}

TEST(Harness, AllInvalidGivesNote) {
  auto recs = small_regular_sweep();
  for (auto& r : recs)
    for (auto& c : r.checks) c = make_check(c.tag, c.lower, c.measured, c.upper, false);
  const BracketSummary s = verify_brackets(recs);
  EXPECT_EQ(s.valid_checks, 0);
  EXPECT_EQ(s.note, "no valid bounds");
  EXPECT_TRUE(s.success());
}

TEST(Harness, RecordFields) {
  const auto recs = small_regular_sweep();
  EXPECT_EQ(record_field(recs[0], "kappa"), 5.0);
  EXPECT_EQ(record_field(recs[0], "rel_err_1"), recs[0].true_rel_errors(0));
  EXPECT_THROW(record_field(recs[0], "rel_err_2"), ValidationError);
  EXPECT_THROW(record_field(recs[0], "bogus"), ValidationError);
}

TEST(Harness, SweepValidatesGrid) {
  Problem p;
  p.model = Model::Regular;
  p.interval_elems = 40;
  EXPECT_THROW(kappa_sweep(p, {10.0, 5.0}), ValidationError);
  EXPECT_THROW(kappa_sweep(p, {-1.0, 5.0}), ValidationError);
}

TEST(Harness, ParallelMatchesSequential) {
  Problem p;
  p.model = Model::Singular;
  p.interval_elems = 60;
  const std::vector<double> grid = {5.0, 10.0, 20.0, 40.0};
  SweepOptions par;
  par.parallel = true;
  par.threads = 3;
  const auto a = kappa_sweep(p, grid), b = kappa_sweep(p, grid, par);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].eigenvalues, b[i].eigenvalues);
}

TEST(Harness, NamesParse) {
  EXPECT_EQ(parse_model("arch"), Model::Arch);
  EXPECT_EQ(model_name(Model::Cluster), "cluster");
  EXPECT_THROW(parse_model("plate"), ValidationError);
  EXPECT_EQ(parse_format("json"), Format::Json);
  EXPECT_THROW(parse_format("xml"), ValidationError);
}

TEST(Harness, SchurCheckSmall) {
  const SchurSummary s = schur_check(12, 2, 5, 3);
  EXPECT_EQ(s.trials, 5);
  EXPECT_LT(s.max_residual, 1e-10);
  EXPECT_LT(s.max_sv_mismatch, 1e-10);
  EXPECT_EQ(s.ritz_failed, 0);
}
