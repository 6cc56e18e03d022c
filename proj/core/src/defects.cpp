#include "stiffspec/defects.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stiffspec {

namespace {

void check_basis(const SymPencil& p, const Mat& V, const char* who) {
  if (V.rows() != p.A.rows()) throw ValidationError(std::string(who) + ": basis has wrong row count");
  if (V.cols() == 0) throw ValidationError(std::string(who) + ": empty basis");
  if (V.cols() > V.rows()) throw ValidationError(std::string(who) + ": more basis vectors than dimension");
  const Mat G = V.transpose() * p.M * V;
  const double err = (G - Mat::Identity(V.cols(), V.cols())).cwiseAbs().maxCoeff();
  if (!(err <= 1e-8)) {
    std::ostringstream os;
    os << who << ": basis is not M-orthonormal (error " << err << ")";
    throw ValidationError(os.str());
  }
}

Mat sym(const Mat& A) { return 0.5 * (A + A.transpose()); }

Mat spd_inverse(const Mat& S, const char* who) {
  Eigen::LLT<Mat> llt(sym(S));
  if (llt.info() != Eigen::Success) throw NumericalError(std::string(who) + ": Ritz matrix is not positive definite");
  return sym(llt.solve(Mat::Identity(S.rows(), S.cols())));
}

// eta^2 as eigenvalues of (N, X), clamped into [0, 1).
DefectSet pencil_defects(const Mat& N, const Mat& X, const char* who) {
  Eigen::LLT<Mat> llt(sym(X));
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(X), Eigen::EigenvaluesOnly);
    std::ostringstream os;
    os << who << ": resolvent Gram matrix is not positive definite (eigenvalues in ["
       << es.eigenvalues().minCoeff() << ", " << es.eigenvalues().maxCoeff() << "])";
    throw NumericalError(os.str());
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(sym(N), sym(X), Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw NumericalError(std::string(who) + ": defect eigensolve failed");
  DefectSet d;
  d.m = N.rows();
  d.etas.resize(d.m);
  const double top = 1.0 - 1e-15;
  for (Index i = 0; i < d.m; ++i) {
    double e2 = es.eigenvalues()(i);
    double excess = 0.0;
    if (e2 < 0.0) {
      excess = -e2;
      e2 = 0.0;
    } else if (e2 > top) {
      excess = e2 - top;
      e2 = top;
    }
    if (excess > 1e-10) d.clamped = true;
    d.clamp_excess = std::max(d.clamp_excess, excess);
    d.etas(i) = std::sqrt(e2);
  }
  std::sort(d.etas.data(), d.etas.data() + d.m);
  return d;
}

// Xi^-1 R' A^-1 R Xi^-1, the excess of the resolvent Gram matrix over Xi^-1.
Mat resolvent_excess(const SpdSolver& solver, const Mat& R, const Mat& Xi_inv) {
  const Mat Y = solver.solve(R);
  return sym(Xi_inv * sym(R.transpose() * Y) * Xi_inv);
}

}  // namespace

Mat ritz_matrix(const SymPencil& pencil, const Mat& V) {
  check_basis(pencil, V, "ritz_matrix");
  return sym(V.transpose() * pencil.A * V);
}

DefectSet defects_general(const SymPencil& pencil, const Mat& V0, const std::string& label) {
  check_basis(pencil, V0, "defects_general");
  const Mat V = m_orthonormalize(V0, pencil.M);
  const SpdSolver solver(pencil.A);
  if (!solver.ok()) throw ValidationError("defects_general: A is not positive definite");
  const Mat AV = pencil.A * V;
  const Mat Xi = sym(V.transpose() * AV);
  const Mat Xi_inv = spd_inverse(Xi, "defects_general");
  const Mat R = AV - pencil.M * V * Xi;
  const Mat G = resolvent_excess(solver, R, Xi_inv);
  DefectSet d = pencil_defects(G, Xi_inv + G, "defects_general");
  d.test_label = label;
  return d;
}

DefectGram defect_gram(const FormPair& pair, double kappa, const LimitSpectrum& limit, IndexRange range) {
  if (range.count < 1 || range.first < 0 || range.first + range.count > limit.vectors.cols())
    throw ValidationError("defect_gram: index range exceeds the computed limit pairs");
  const SymPencil p = assemble_coupled(pair, kappa);
  const Mat V = limit.vectors.middleCols(range.first, range.count);
  const SpdSolver solver(p.A);
  if (!solver.ok()) throw ValidationError("defect_gram: B + kappa^2 E is not positive definite");
  const Mat AV = p.A * V;
  const Mat Xi = sym(V.transpose() * AV);
  const Mat Xi_inv = spd_inverse(Xi, "defect_gram");
  const Mat R = AV - p.M * V * Xi;
  const Mat G = resolvent_excess(solver, R, Xi_inv);
  DefectGram g;
  g.lambda = limit.values.segment(range.first, range.count);
  const Mat Lam_inv = g.lambda.cwiseInverse().asDiagonal();
  g.X = Xi_inv + G;
  g.excess = sym((Xi_inv - Lam_inv) + G);
  return g;
}

DefectSet defects_kappa(const FormPair& pair, double kappa, const LimitSpectrum& limit, IndexRange range) {
  const DefectGram g = defect_gram(pair, kappa, limit, range);
  DefectSet d = pencil_defects(g.excess, g.X, "defects_kappa");
  d.kappa = kappa;
  d.plain = false;
  std::ostringstream os;
  os << pair.label << " limit[" << range.first << ":" << range.first + range.count << ")";
  d.test_label = os.str();
  return d;
}

BlockSplit gamma_block(const SymPencil& pencil, const Mat& V0, Index max_dim) {
  const Index n = pencil.A.rows();
  if (n > max_dim) {
    std::ostringstream os;
    os << "gamma_block: dimension " << n << " exceeds the dense completion cap " << max_dim;
    throw ValidationError(os.str());
  }
  check_basis(pencil, V0, "gamma_block");
  const Mat V = m_orthonormalize(V0, pencil.M);
  const Index m = V.cols();

  Eigen::LLT<Mat> llt(sym(pencil.M));
  if (llt.info() != Eigen::Success) throw ValidationError("gamma_block: M is not positive definite");
  const Mat Vt = llt.matrixU() * V;
  Eigen::HouseholderQR<Mat> qr(Vt);
  const Mat Qh = qr.householderQ() * Mat::Identity(n, n);
  const Mat Vp = llt.matrixU().solve(Mat(Qh.rightCols(n - m)));

  const Mat AV = pencil.A * V;
  BlockSplit s;
  s.Xi = sym(V.transpose() * AV);
  const Mat W = sym(Vp.transpose() * pencil.A * Vp);
  const Mat A21 = Vp.transpose() * AV;

  Eigen::SelfAdjointEigenSolver<Mat> ex(s.Xi);
  if (ex.info() != Eigen::Success || !(ex.eigenvalues().minCoeff() > 0.0))
    throw NumericalError("gamma_block: Ritz matrix is not positive definite");
  s.mu = ex.eigenvalues();
  const Mat Xi_m12 = ex.eigenvectors() * s.mu.cwiseSqrt().cwiseInverse().asDiagonal() * ex.eigenvectors().transpose();

  if (n == m) {
    s.Gamma.resize(0, m);
    return s;
  }
  Eigen::SelfAdjointEigenSolver<Mat> ew(W);
  if (ew.info() != Eigen::Success || !(ew.eigenvalues().minCoeff() > 0.0))
    throw NumericalError("gamma_block: complementary block is not positive definite");
  s.W_values = ew.eigenvalues();
  s.W_vectors = ew.eigenvectors();
  const Mat W_m12 = s.W_vectors * s.W_values.cwiseSqrt().cwiseInverse().asDiagonal() * s.W_vectors.transpose();
  s.Gamma = W_m12 * A21 * Xi_m12;
  return s;
}

double schur_residual(const SymPencil& pencil, const Mat& V, double lambda_q) {
  check_basis(pencil, V, "schur_residual");
  const Index m = V.cols();
  const Vec lam = geig_sym(pencil).values;
  const double tol = 1e-8 * std::abs(lambda_q);
  Index q = -1, count = 0;
  for (Index i = 0; i < lam.size(); ++i)
    if (std::abs(lam(i) - lambda_q) <= tol) {
      if (q < 0) q = i;
      ++count;
    }
  if (count != m) {
    std::ostringstream os;
    os << "schur_residual: lambda_q has multiplicity " << count << " but the subspace has dimension " << m;
    throw ValidationError(os.str());
  }

  const BlockSplit s = gamma_block(pencil, V);
  const DefectSet d = defects_general(pencil, V);
  const double eta = d.eta_max();
  double gap = 1.0;
  if (q + m < lam.size()) gap = std::min(gap, (lam(q + m) - s.mu(m - 1)) / (lam(q + m) + s.mu(m - 1)));
  if (q > 0) gap = std::min(gap, (s.mu(0) - lam(q - 1)) / (s.mu(0) + lam(q - 1)));
  if (!(eta / (1.0 - eta) < gap))
    throw ValidationError("schur_residual: gap condition eta/(1 - eta) < gamma_q fails");

  const Vec& w = s.W_values;
  for (Index i = 0; i < w.size(); ++i)
    if (std::abs(w(i) - lambda_q) <= 1e-12 * std::abs(lambda_q))
      throw NumericalError("schur_residual: lambda_q lies in the spectrum of the complementary block");

  Eigen::SelfAdjointEigenSolver<Mat> ex(s.Xi);
  const Mat Xi_inv = ex.eigenvectors() * s.mu.cwiseInverse().asDiagonal() * ex.eigenvectors().transpose();
  const Mat lhs = Mat::Identity(m, m) - lambda_q * Xi_inv;
  Mat t1 = Mat::Zero(m, m), t2 = Mat::Zero(m, m);
  if (w.size() > 0) {
    const Mat Gt = s.W_vectors.transpose() * s.Gamma;
    Vec f1(w.size()), f2(w.size());
    for (Index i = 0; i < w.size(); ++i) {
      f1(i) = w(i) / (w(i) - lambda_q);
      f2(i) = 1.0 / (w(i) - lambda_q);
    }
    t1 = Gt.transpose() * f1.asDiagonal() * Gt;
    t2 = s.Gamma.transpose() * s.Gamma + lambda_q * (Gt.transpose() * f2.asDiagonal() * Gt);
  }
  auto norm2 = [](const Mat& X) { return Eigen::JacobiSVD<Mat>(X).singularValues()(0); };
  return std::max(norm2(lhs - t1), norm2(lhs - t2));
}

std::pair<double, double> residual_defect_identity(const FormPair& pair, double kappa, const LimitSpectrum& limit,
                                                   Index q) {
  if (q < 0 || q >= limit.vectors.cols()) throw ValidationError("residual_defect_identity: index out of range");
  const Vec& lv = limit.values;
  const double lq = lv(q);
  const double tol = 1e-8 * std::abs(lq);
  if ((q > 0 && std::abs(lv(q - 1) - lq) <= tol) || (q + 1 < lv.size() && std::abs(lv(q + 1) - lq) <= tol))
    throw ValidationError("residual_defect_identity: limit eigenvalue is not simple");

  const SymPencil p = assemble_coupled(pair, kappa);
  const SpdSolver solver(p.A);
  if (!solver.ok()) throw ValidationError("residual_defect_identity: B + kappa^2 E is not positive definite");
  const Vec v = limit.vectors.col(q);
  const Vec w = p.M * v;
  const Vec av = p.A * v;
  const double mu = v.dot(av);
  const Vec u = av - mu * w;

  // Block-diagonal part A - (w u' + u w'), inverted by Woodbury.
  Mat U(v.size(), 2);
  U.col(0) = w;
  U.col(1) = u;
  const Mat Y = solver.solve(U);
  Mat C(2, 2);
  C << 0.0, 1.0, 1.0, 0.0;
  const Mat S = C - U.transpose() * Y;
  const Vec yu = Y.transpose() * u;
  const double lhs = u.dot(Y.col(1)) + yu.dot(S.fullPivLu().solve(yu));

  const DefectSet d = defects_kappa(pair, kappa, limit, IndexRange{q, 1});
  const double rhs = lq * d.etas(0) * d.etas(0);
  return {lhs, rhs};
}

}  // namespace stiffspec
