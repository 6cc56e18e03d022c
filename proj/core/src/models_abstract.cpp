#include "stiffspec/models_abstract.hpp"

#include <cmath>
#include <numbers>

namespace stiffspec {

double Rng::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

Mat Rng::normal_matrix(Index rows, Index cols) {
  Mat G(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) G(i, j) = normal();
  return G;
}

Mat random_orthogonal(Index n, Rng& rng) {
  const Mat G = rng.normal_matrix(n, n);
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ() * Mat::Identity(n, n);
  // Fix the column signs by the diagonal of R so the map from G is unique.
  const Mat& R = qr.matrixQR();
  for (Index j = 0; j < n; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  return Q;
}

namespace {

Mat sym(const Mat& A) { return 0.5 * (A + A.transpose()); }

Mat random_spd(Index n, double lo, double hi, Rng& rng) {
  const Mat O = random_orthogonal(n, rng);
  Vec d(n);
  for (Index i = 0; i < n; ++i) d(i) = rng.uniform(lo, hi);
  return sym(O * d.asDiagonal() * O.transpose());
}

// Columns M-orthonormal: L^-T O with M = L L'.
Mat m_orthonormal_frame(const Mat& M, Rng& rng) {
  Eigen::LLT<Mat> llt(M);
  return llt.matrixU().solve(random_orthogonal(M.rows(), rng));
}

}  // namespace

ProjectionFamily make_projection_family(Index n, Index rank, std::uint64_t seed) {
  if (n < 2 || rank < 1 || rank >= n) throw ValidationError("projection family: need 1 <= rank < n");
  Rng rng(seed);
  ProjectionFamily fam;
  fam.H = random_spd(n, 1.0, 10.0, rng);
  const Mat O = random_orthogonal(n, rng);
  fam.P = sym(O.leftCols(rank) * O.leftCols(rank).transpose());
  return fam;
}

FormPair projection_family_pair(const ProjectionFamily& fam) {
  const Index n = fam.H.rows();
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(fam.H));
  const Mat S = es.operatorSqrt();
  FormPair p;
  p.n = n;
  p.B = sym(fam.H);
  p.E = sym(S * fam.P * S);
  p.M = Mat::Identity(n, n);
  p.b_definite = true;
  p.label = "projection";
  return p;
}

ProjectionErrors projection_family_errors(const ProjectionFamily& fam, double kappa, const Vec& f, bool with_bracket) {
  const Index n = fam.H.rows();
  if (f.size() != n) throw ValidationError("projection_family_errors: size mismatch");
  if (!(kappa >= 0.0)) throw ValidationError("projection_family_errors: kappa must be nonnegative");
  if (with_bracket && kappa == 0.0) throw ValidationError("projection_family_errors: bracket undefined at kappa = 0");

  Eigen::SelfAdjointEigenSolver<Mat> es(sym(fam.H));
  const Mat Hm12 = es.operatorInverseSqrt();
  const Mat I = Mat::Identity(n, n);
  const double s = 1.0 / (1.0 + kappa * kappa);
  const Mat Rk = Hm12 * (I - fam.P + s * fam.P) * Hm12;
  // Both differences against the limit pseudo-inverse H^-1/2 (I - P) H^-1/2,
  // taken in closed form.
  const Mat Dk = Hm12 * (s * fam.P) * Hm12;
  const Mat Db = Hm12 * fam.P * Hm12;

  ProjectionErrors out;
  const Vec u = Hm12 * f;
  if ((fam.P * u).norm() <= 1e-14 * u.norm()) {
    out.zero_residual = true;
  } else {
    out.exact_ratio = f.dot(Dk * f) / f.dot(Db * f);
  }
  if (with_bracket) {
    out.lower = 1.0 / (2.0 * kappa * kappa);
    out.upper = 1.0 / (kappa * kappa);
  }
  const FormPair p = projection_family_pair(fam);
  const Vec xs = SpdSolver(p.B + kappa * kappa * p.E).solve(f);
  const Vec xc = Rk * f;
  out.solve_mismatch = (xs - xc).norm() / xc.norm();
  return out;
}

FormPair random_spd_pair(Index n, Index r, std::uint64_t seed) {
  if (r < 1 || r >= n) throw ValidationError("random_spd_pair: need 1 <= r < n");
  Rng rng(seed);
  FormPair p;
  p.n = n;
  p.M = random_spd(n, 0.5, 2.0, rng);
  const Mat Q = m_orthonormal_frame(p.M, rng);
  Vec d = Vec::Zero(n);
  for (Index i = r; i < n; ++i) d(i) = rng.uniform(1.0, 3.0);
  const Mat MQ = p.M * Q;
  p.E = sym(MQ * d.asDiagonal() * MQ.transpose());
  p.B = random_spd(n, 1.0, 10.0, rng);
  p.b_definite = true;
  p.label = "random";
  return p;
}

ClusterPair degenerate_cluster_pair(Index n, Index m, std::uint64_t seed) {
  if (m < 2 || n < m + 2) throw ValidationError("degenerate_cluster_pair: need m >= 2 and n >= m + 2");
  Rng rng(seed);
  ClusterPair cp;
  cp.m = m;
  cp.q = 1;
  cp.value = 1.0;
  const Index r = n >= m + 3 ? m + 2 : m + 1;
  const Index y = n - r;
  Vec lam(r);
  lam(0) = 0.4;
  for (Index i = 0; i < m; ++i) lam(1 + i) = cp.value;
  if (r == m + 2) lam(r - 1) = 3.0;

  FormPair& p = cp.pair;
  p.n = n;
  p.M = random_spd(n, 0.5, 2.0, rng);
  const Mat Q = m_orthonormal_frame(p.M, rng);
  const Mat C = 0.5 * rng.normal_matrix(r, y);
  Mat Bh = Mat::Zero(n, n);
  Bh.topLeftCorner(r, r) = lam.asDiagonal();
  Bh.topRightCorner(r, y) = C;
  Bh.bottomLeftCorner(y, r) = C.transpose();
  Vec w(y), e(n);
  for (Index i = 0; i < y; ++i) w(i) = rng.uniform(5.0, 10.0);
  Bh.bottomRightCorner(y, y) = Mat(w.asDiagonal()) + C.transpose() * lam.cwiseInverse().asDiagonal() * C;
  e.setZero();
  for (Index i = r; i < n; ++i) e(i) = rng.uniform(1.0, 2.0);
  const Mat MQ = p.M * Q;
  p.B = sym(MQ * Bh * MQ.transpose());
  p.E = sym(MQ * e.asDiagonal() * MQ.transpose());
  p.b_definite = true;
  p.label = "cluster";
  return cp;
}

ClusteredPencil clustered_pencil(Index n, Index q, Index m, std::uint64_t seed) {
  if (m < 1 || q < 0 || q + m > n || n < 2) throw ValidationError("clustered_pencil: cluster outside the spectrum");
  const FormPair base = random_spd_pair(n, std::max<Index>(1, n / 2), seed);
  const EigDecomp e = geig_sym(SymPencil{base.B, base.M});
  Vec lam(n);
  for (Index k = 0; k < n; ++k) lam(k) = std::pow(1.25, static_cast<double>(k));
  const double mean = lam.segment(q, m).mean();
  lam.segment(q, m).setConstant(mean);
  ClusteredPencil cp;
  const Mat MU = base.M * e.vectors;
  cp.pencil = SymPencil{sym(MU * lam.asDiagonal() * MU.transpose()), base.M};
  cp.eig = EigDecomp{lam, e.vectors};
  cp.q = q;
  cp.m = m;
  cp.lambda_q = mean;
  return cp;
}

Mat rotated_basis(const ClusteredPencil& cp, double theta) {
  const Index n = cp.eig.vectors.rows();
  Mat V(n, cp.m);
  for (Index i = 0; i < cp.m; ++i) {
    Index j = cp.q + cp.m + i;
    if (j >= n) j = cp.q - 1 - (j - n);
    if (j < 0) throw ValidationError("rotated_basis: not enough eigenvectors outside the cluster");
    V.col(i) = std::cos(theta) * cp.eig.vectors.col(cp.q + i) + std::sin(theta) * cp.eig.vectors.col(j);
  }
  return V;
}

}  // namespace stiffspec
