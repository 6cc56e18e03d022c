// Bound calculators. All indices are 0-based: q = 0 is the lowest eigenvalue.
// Reports with valid = false are returned, never thrown.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stiffspec/defects.hpp"
#include "stiffspec/forms.hpp"
#include "stiffspec/linalg.hpp"

namespace stiffspec {

struct GapData {
  double gamma_q = 1.0;
  // For q > 0 the smaller of the lower and upper branch. The larger one is
  // kept in g_q_zeta_max; it does not tend to the minimal relative gap as
  // zeta -> 0 and is reported for comparison only.
  double g_q_zeta = 1.0;
  double g_q_zeta_max = 1.0;
  double gamma_s = 1.0;
  double gamma_1 = 1.0;
};

struct BoundReport {
  std::string tag;
  std::vector<double> lower;  // empty when the bound is one-sided
  std::vector<double> upper;
  bool valid = true;
  std::string note;           // violated precondition when !valid
  std::map<std::string, double> inputs;
};

// values: ascending spectrum. Cluster occupies q .. q+m-1. mu defaults to the
// cluster's own values. Missing neighbours drop their branch.
GapData relative_gaps(const Vec& values, Index q, Index m, double eta_m, const std::optional<Vec>& mu = {});

enum class MatrixNorm { Spectral, Trace, HilbertSchmidt };

double diag_norm(const Vec& d, MatrixNorm norm);

// Upper bound (eta_m / g) * ||diag(eta)|| on ||diag(|lambda_q - mu_i| / mu_i)||.
BoundReport ritz_value_bound(const DefectSet& defects, const GapData& gaps, const Vec& mu,
                             MatrixNorm norm = MatrixNorm::Spectral);

enum class ProjectionVariant {
  Sweep,           // one-sided spectral family, cut at D
  SingleOperator,  // distance of a test space to E(mu_m)
  Interval,        // spectral interval [D-, D+]
};

struct ProjectionExtra {
  double lambda_1 = 0.0;     // interval: lowest eigenvalue in the interval
  double d_minus = 0.0;      // interval: lower cut
  double lambda_next = 0.0;  // single operator: lambda_{m+1}
  double lambda_m = 0.0;     // single operator: lambda_m, for the gate
};

// d: the cut D (Sweep), D+ (Interval) or ignored (SingleOperator).
// lambda_m: lambda_m^inf (Sweep, Interval) or mu_m (SingleOperator).
BoundReport projection_bound(double d, double lambda_m, const DefectSet& defects, ProjectionVariant variant,
                             const ProjectionExtra& extra = {});

// Two-sided bracket for sum |lambda_i - mu_i| / mu_i. gate_gap is the right
// side of the eta_m / (1 - eta_m) precondition.
BoundReport trace_bracket(const DefectSet& defects, const Vec& mu, double gap_min,
                          double gate_gap = 1.0, bool drop_lower_constant = false);

// Upper bound on ||v_i - psi_i||. spectrum: every eigenvalue; i: index of lambda_i.
BoundReport eigenvector_bound(const DefectSet& defects, const Vec& spectrum, Index i, double mu_i,
                              double gate_gap = 1.0);

struct EnergyTerms {
  double h_diff = 0.0;   // h[psi - v]
  double h_v = 0.0;      // h[v]
  double dist_sq = 0.0;  // ||v - psi||^2
  double mu = 0.0;
  double lambda = 0.0;
};

double energy_identity_check(const EnergyTerms& t);
// Terms for an eigenvector v and a unit vector psi of the pencil.
EnergyTerms energy_terms(const SymPencil& pencil, const Vec& v, const Vec& psi);

// Upper bound eta_m on the relative eigenvalue errors at coupling kappa.
BoundReport defect_eigenvalue_bound(const DefectSet& defects, double d, double lambda_m);

struct Kappa0Result {
  bool reached = false;
  double kappa0 = 0.0;
  Index index = -1;
  double threshold = 0.0;
  std::string note;
};

// Threshold (1/3)(lambda_{m+1} - lambda_m) / (lambda_{m+1} + lambda_m), m >= 1 counted from 1.
double kappa0_threshold(const Vec& limit_values, Index m);
// First grid point where eta_m(kappa) < threshold.
Kappa0Result kappa0_criterion(const std::function<double(double)>& eta_m, const std::vector<double>& grid,
                              const Vec& limit_values, Index m);
// Crossing point of eta_m(kappa) = threshold by bisection on [lo, hi].
Kappa0Result kappa0_crossing(const std::function<double(double)>& eta_m, double lo, double hi,
                             const Vec& limit_values, Index m);

// 3 eta_1^2 / min(relative gaps). lambda_prev is absent for the lowest value.
BoundReport simple_sharp_bound(double eta_1, std::optional<double> lambda_prev, double lambda_q,
                               double lambda_next, double gate_gap = 1.0);

BoundReport cluster_bound(double eta_m, double gamma_s, double lambda_q_inf);

// eta_i(kappa)^2 bracket. eta_sq_1: squared defects at kappa = 1; eta_sq_ref:
// squared (or normalized) defects at the reference coupling of lbb (0 for Base,
// 1 for H1, where kappa^2 - 1 replaces kappa^2 in the upper bound).
BoundReport regular_bracket(const Vec& eta_sq_1, const Vec& eta_sq_ref, const LbbEstimate& lbb, double kappa);

// Squared defects normalized by Lambda^-1 instead of X: eigenvalues of
// (X - Lambda^-1, Lambda^-1). Always at least the plain squared defects.
Vec normalized_defect_sq(const FormPair& pair, double kappa, const LimitSpectrum& limit, IndexRange range);

// Moment bracket for f = V c in the span of the selected limit vectors:
// lower/upper on (f, H_kappa^-1 f) - (f, H_inf^+ f), measured in inputs["measured"].
BoundReport moment_bracket(const FormPair& pair, const LimitSpectrum& limit, IndexRange range, const Vec& c,
                           const LbbEstimate& lbb, double kappa);

}  // namespace stiffspec
