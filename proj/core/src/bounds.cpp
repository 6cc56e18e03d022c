#include "stiffspec/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stiffspec {

namespace {

double rel_gap(double a, double b) { return (a - b) / (a + b); }

double eta_factor(double eta) { return eta / std::sqrt(1.0 - eta); }

BoundReport make(const char* tag) {
  BoundReport r;
  r.tag = tag;
  return r;
}

void gate(BoundReport& r, bool ok, const std::string& why) {
  if (!ok) {
    r.valid = false;
    if (!r.note.empty()) r.note += "; ";
    r.note += why;
  }
}

void check_eta(double eta, const char* who) {
  if (!(eta >= 0.0 && eta < 1.0)) throw ValidationError(std::string(who) + ": defect must lie in [0, 1)");
}

// Denominator of the upper regular bound for the reference form of lbb.
double reference_denominator(const LbbEstimate& lbb, double kappa) {
  return lbb.reference == LbbReference::Base ? kappa * kappa : kappa * kappa - 1.0;
}

double reference_kappa(const LbbEstimate& lbb) { return lbb.reference == LbbReference::Base ? 0.0 : 1.0; }

}  // namespace

GapData relative_gaps(const Vec& values, Index q, Index m, double eta_m, const std::optional<Vec>& mu_in) {
  const Index n = values.size();
  if (q < 0 || m < 1 || q + m > n) throw ValidationError("relative_gaps: cluster outside the spectrum");
  if (!(values.minCoeff() > 0.0)) throw ValidationError("relative_gaps: spectrum must be positive");
  if (!(eta_m >= 0.0 && eta_m < 1.0)) throw ValidationError("relative_gaps: zeta = eta_m must lie in [0, 1)");
  const Vec mu = mu_in ? *mu_in : Vec(values.segment(q, m));
  if (mu.size() != m) throw ValidationError("relative_gaps: Ritz value count differs from m");

  const bool has_lo = q > 0, has_hi = q + m < n;
  const double lo = has_lo ? values(q - 1) : 0.0;
  const double hi = has_hi ? values(q + m) : 0.0;
  const double mu1 = mu(0), mum = mu(m - 1), lq = values(q);

  GapData g;
  g.gamma_q = 1.0;
  if (has_hi) g.gamma_q = std::min(g.gamma_q, rel_gap(hi, mum));
  if (has_lo) g.gamma_q = std::min(g.gamma_q, rel_gap(mu1, lo));
  g.gamma_1 = has_hi ? rel_gap(hi, mum) : 1.0;

  if (q == 0) {
    g.g_q_zeta = g.g_q_zeta_max = g.gamma_1;
  } else {
    const double z = eta_m, t = z / (1.0 - z);
    const double below = (mu1 * (1.0 - z) - (1.0 + t) * lo) / ((1.0 + t) * lo);
    g.g_q_zeta = g.g_q_zeta_max = below;
    if (has_hi) {
      const double above = ((1.0 - t) * hi - (1.0 + z) * mum) / ((1.0 - t) * hi);
      g.g_q_zeta = std::min(below, above);
      g.g_q_zeta_max = std::max(below, above);
    }
  }

  g.gamma_s = 1.0;
  if (has_hi) g.gamma_s = std::min(g.gamma_s, rel_gap(hi, lq));
  if (has_lo) g.gamma_s = std::min(g.gamma_s, rel_gap(lq, lo));
  return g;
}

double diag_norm(const Vec& d, MatrixNorm norm) {
  switch (norm) {
    case MatrixNorm::Spectral: return d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
    case MatrixNorm::Trace: return d.cwiseAbs().sum();
    case MatrixNorm::HilbertSchmidt: return d.norm();
  }
  return 0.0;
}

BoundReport ritz_value_bound(const DefectSet& defects, const GapData& gaps, const Vec& mu, MatrixNorm norm) {
  BoundReport r = make("ritz-value");
  const double eta = defects.eta_max();
  check_eta(eta, "ritz_value_bound");
  if (mu.size() != defects.m) throw ValidationError("ritz_value_bound: Ritz value count differs from m");
  r.inputs = {{"eta_m", eta}, {"g_q_zeta", gaps.g_q_zeta}, {"gamma_q", gaps.gamma_q}};
  gate(r, eta / (1.0 - eta) < gaps.gamma_q, "eta_m/(1-eta_m) >= gamma_q");
  gate(r, gaps.g_q_zeta > 0.0, "nonpositive gap g_q_zeta");
  r.upper = {eta / gaps.g_q_zeta * diag_norm(defects.etas, norm)};
  if (eta == 0.0) r.upper = {0.0};
  return r;
}

BoundReport projection_bound(double d, double lambda_m, const DefectSet& defects, ProjectionVariant variant,
                             const ProjectionExtra& extra) {
  const double eta = defects.eta_max();
  check_eta(eta, "projection_bound");
  BoundReport r;
  double coef = 0.0;
  switch (variant) {
    case ProjectionVariant::Sweep: {
      r = make("projector-sweep");
      if (d == lambda_m) throw ValidationError("projection_bound: D coincides with lambda_m");
      coef = std::sqrt(d * lambda_m) / std::abs(d - lambda_m);
      gate(r, d > lambda_m, "D must exceed lambda_m");
      gate(r, eta <= 0.5 * std::abs(d - lambda_m) / (d + lambda_m), "eta_m > (D - lambda_m)/(2(D + lambda_m))");
      r.inputs = {{"D", d}, {"lambda_m", lambda_m}, {"eta_m", eta}};
      break;
    }
    case ProjectionVariant::SingleOperator: {
      r = make("projector-single");
      const double ln = extra.lambda_next;
      if (ln == lambda_m) throw ValidationError("projection_bound: lambda_{m+1} coincides with mu_m");
      coef = std::sqrt(ln * lambda_m) / std::abs(ln - lambda_m);
      gate(r, ln > lambda_m, "lambda_{m+1} must exceed mu_m");
      gate(r, eta / (1.0 - eta) < (ln - lambda_m) / (extra.lambda_m + lambda_m),
           "eta_m/(1-eta_m) >= (lambda_{m+1} - mu_m)/(lambda_m + mu_m)");
      r.inputs = {{"lambda_next", ln}, {"mu_m", lambda_m}, {"lambda_m", extra.lambda_m}, {"eta_m", eta}};
      break;
    }
    case ProjectionVariant::Interval: {
      r = make("projector-interval");
      const double dm = extra.d_minus, l1 = extra.lambda_1;
      if (d == lambda_m || dm == l1) throw ValidationError("projection_bound: interval end coincides with an eigenvalue");
      coef = std::sqrt(d * lambda_m) / std::abs(d - lambda_m) + std::sqrt(l1 * dm) / std::abs(l1 - dm);
      gate(r, dm < l1 && l1 <= lambda_m && lambda_m < d, "need D- < lambda_1 <= lambda_m < D+");
      gate(r, eta <= 0.5 * std::min(std::abs(d - lambda_m) / (d + lambda_m), std::abs(l1 - dm) / (l1 + dm)),
           "eta_m above half the relative distance to the interval ends");
      r.inputs = {{"D_plus", d}, {"D_minus", dm}, {"lambda_1", l1}, {"lambda_m", lambda_m}, {"eta_m", eta}};
      break;
    }
  }
  r.inputs["coefficient"] = coef;
  r.upper = {coef * eta_factor(eta)};
  return r;
}

BoundReport trace_bracket(const DefectSet& defects, const Vec& mu, double gap_min, double gate_gap,
                          bool drop_lower_constant) {
  BoundReport r = make("trace");
  const double eta = defects.eta_max();
  check_eta(eta, "trace_bracket");
  if (mu.size() != defects.m) throw ValidationError("trace_bracket: Ritz value count differs from m");
  const double s = defects.etas.squaredNorm();
  const bool drop = drop_lower_constant || defects.m == 1;
  const double c = drop ? 1.0 : mu(0) / (2.0 * mu(defects.m - 1));
  gate(r, eta / (1.0 - eta) < gate_gap, "eta_m/(1-eta_m) >= gap precondition");
  gate(r, gap_min > 0.0, "nonpositive minimal gap");
  r.lower = {c * s};
  r.upper = {s == 0.0 ? 0.0 : s / gap_min};
  r.inputs = {{"sum_eta_sq", s}, {"gap_min", gap_min}, {"lower_constant", c}};
  return r;
}

BoundReport eigenvector_bound(const DefectSet& defects, const Vec& spectrum, Index i, double mu_i, double gate_gap) {
  BoundReport r = make("eigenvector");
  const double eta = defects.eta_max();
  check_eta(eta, "eigenvector_bound");
  if (i < 0 || i >= spectrum.size()) throw ValidationError("eigenvector_bound: index out of range");
  double worst = 0.0;
  for (Index j = 0; j < spectrum.size(); ++j) {
    if (j == i) continue;
    const double lam = spectrum(j);
    if (lam == spectrum(i)) continue;
    const double gap = std::abs(lam - mu_i);
    if (gap <= 1e-14 * std::abs(mu_i)) throw NumericalError("eigenvector_bound: mu_i hits another eigenvalue");
    worst = std::max(worst, std::sqrt(2.0 * lam * mu_i) / gap);
  }
  gate(r, eta / (1.0 - eta) < gate_gap, "eta_m/(1-eta_m) >= gap precondition");
  r.upper = {worst * eta_factor(eta)};
  r.inputs = {{"max_coefficient", worst}, {"eta_m", eta}, {"mu_i", mu_i}};
  return r;
}

double energy_identity_check(const EnergyTerms& t) {
  return std::abs(t.h_diff / t.h_v - t.dist_sq - (t.mu - t.lambda) / t.lambda);
}

EnergyTerms energy_terms(const SymPencil& pencil, const Vec& v, const Vec& psi) {
  EnergyTerms t;
  const Vec d = psi - v;
  t.h_diff = d.dot(pencil.A * d);
  t.h_v = v.dot(pencil.A * v);
  t.dist_sq = d.dot(pencil.M * d);
  t.lambda = t.h_v / v.dot(pencil.M * v);
  t.mu = psi.dot(pencil.A * psi) / psi.dot(pencil.M * psi);
  return t;
}

BoundReport defect_eigenvalue_bound(const DefectSet& defects, double d, double lambda_m) {
  BoundReport r = make("defect-eigenvalue");
  const double eta = defects.eta_max();
  check_eta(eta, "defect_eigenvalue_bound");
  gate(r, d > lambda_m, "D must exceed lambda_m");
  gate(r, eta <= 0.5 * (d - lambda_m) / (d + lambda_m), "eta_m > (D - lambda_m)/(2(D + lambda_m))");
  r.upper.assign(static_cast<size_t>(defects.m), eta);
  r.inputs = {{"D", d}, {"lambda_m", lambda_m}, {"eta_m", eta}};
  return r;
}

double kappa0_threshold(const Vec& limit_values, Index m) {
  if (m < 1 || m >= limit_values.size()) throw ValidationError("kappa0: need lambda_m and lambda_{m+1}");
  const double a = limit_values(m - 1), b = limit_values(m);
  return (b - a) / (3.0 * (b + a));
}

Kappa0Result kappa0_criterion(const std::function<double(double)>& eta_m, const std::vector<double>& grid,
                              const Vec& limit_values, Index m) {
  Kappa0Result out;
  out.threshold = kappa0_threshold(limit_values, m);
  for (size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw ValidationError("kappa0_criterion: grid must be ascending");
  for (size_t k = 0; k < grid.size(); ++k) {
    if (eta_m(grid[k]) < out.threshold) {
      out.reached = true;
      out.kappa0 = grid[k];
      out.index = static_cast<Index>(k);
      return out;
    }
  }
  out.note = "not reached on grid";
  return out;
}

Kappa0Result kappa0_crossing(const std::function<double(double)>& eta_m, double lo, double hi,
                             const Vec& limit_values, Index m) {
  Kappa0Result out;
  out.threshold = kappa0_threshold(limit_values, m);
  const double t = out.threshold;
  if (!(eta_m(lo) >= t) || !(eta_m(hi) < t)) {
    out.note = "no crossing in the bracket";
    return out;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (eta_m(mid) < t ? hi : lo) = mid;
  }
  out.reached = true;
  out.kappa0 = 0.5 * (lo + hi);
  return out;
}

BoundReport simple_sharp_bound(double eta_1, std::optional<double> lambda_prev, double lambda_q,
                               double lambda_next, double gate_gap) {
  BoundReport r = make("simple-sharp");
  check_eta(eta_1, "simple_sharp_bound");
  double g = rel_gap(lambda_next, lambda_q);
  if (lambda_prev) g = std::min(g, rel_gap(lambda_q, *lambda_prev));
  gate(r, g > 0.0, "limit eigenvalue is not simple");
  gate(r, eta_1 / (1.0 - eta_1) < gate_gap, "eta_1/(1-eta_1) >= gap precondition");
  r.upper = {eta_1 == 0.0 ? 0.0 : 3.0 * eta_1 * eta_1 / g};
  r.inputs = {{"eta_1", eta_1}, {"gap", g}};
  return r;
}

BoundReport cluster_bound(double eta_m, double gamma_s, double lambda_q_inf) {
  BoundReport r = make("cluster");
  check_eta(eta_m, "cluster_bound");
  const double t = 3.0 * eta_m / gamma_s;
  gate(r, gamma_s > 0.0 && t < 1.0, "3 eta_m / gamma_s >= 1");
  r.upper = {t < 1.0 ? eta_m * t / (1.0 - t) : INFINITY};
  r.inputs = {{"eta_m", eta_m}, {"gamma_s", gamma_s}, {"lambda_q_inf", lambda_q_inf}};
  return r;
}

BoundReport regular_bracket(const Vec& eta_sq_1, const Vec& eta_sq_ref, const LbbEstimate& lbb, double kappa) {
  BoundReport r = make("regular-defect");
  if (eta_sq_1.size() != eta_sq_ref.size()) throw ValidationError("regular_bracket: size mismatch");
  const double den = reference_denominator(lbb, kappa);
  gate(r, kappa >= 1.0, "kappa < 1");
  gate(r, den > 0.0, "reference coupling not below kappa");
  const double k2 = lbb.kappa_frak * lbb.kappa_frak;
  for (Index i = 0; i < eta_sq_1.size(); ++i) {
    r.lower.push_back(eta_sq_1(i) / (kappa * kappa));
    r.upper.push_back(den > 0.0 ? k2 * eta_sq_ref(i) / den : INFINITY);
  }
  r.inputs = {{"kappa", kappa}, {"kappa_frak", lbb.kappa_frak}, {"reference_kappa", reference_kappa(lbb)}};
  return r;
}

Vec normalized_defect_sq(const FormPair& pair, double kappa, const LimitSpectrum& limit, IndexRange range) {
  const DefectGram g = defect_gram(pair, kappa, limit, range);
  const Vec s = g.lambda.cwiseSqrt();
  const Mat S = s.asDiagonal() * g.excess * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseMax(0.0);
}

BoundReport moment_bracket(const FormPair& pair, const LimitSpectrum& limit, IndexRange range, const Vec& c,
                           const LbbEstimate& lbb, double kappa) {
  BoundReport r = make("regular-moment");
  if (c.size() != range.count) throw ValidationError("moment_bracket: coefficient size differs from range");
  const double den = reference_denominator(lbb, kappa);
  gate(r, kappa >= 1.0, "kappa < 1");
  gate(r, den > 0.0, "reference coupling not below kappa");
  const double measured = c.dot(defect_gram(pair, kappa, limit, range).excess * c);
  const double at1 = c.dot(defect_gram(pair, 1.0, limit, range).excess * c);
  const double atref = c.dot(defect_gram(pair, reference_kappa(lbb), limit, range).excess * c);
  r.lower = {at1 / (kappa * kappa)};
  r.upper = {den > 0.0 ? lbb.kappa_frak * lbb.kappa_frak * atref / den : INFINITY};
  r.inputs = {{"measured", measured}, {"kappa", kappa}, {"kappa_frak", lbb.kappa_frak}};
  return r;
}

}  // namespace stiffspec
