#include "stiffspec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tridiag.hpp"

namespace stiffspec {

bool is_symmetric(const Mat& A, double rel_tol) {
  if (A.rows() != A.cols()) return false;
  const double scale = A.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return (A - A.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool is_tridiagonal(const Mat& A) {
  const Index n = A.rows();
  if (A.cols() != n) return false;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if ((i > j + 1 || j > i + 1) && A(i, j) != 0.0) return false;
  return true;
}

void validate_pencil(const SymPencil& p) {
  const Index n = p.A.rows();
  if (n == 0) throw ValidationError("pencil: empty matrices");
  if (p.A.cols() != n || p.M.rows() != n || p.M.cols() != n)
    throw ValidationError("pencil: A and M must be square of equal size");
  if (!p.A.allFinite() || !p.M.allFinite()) throw ValidationError("pencil: non-finite entries");
  if (!is_symmetric(p.A)) throw ValidationError("pencil: A is not symmetric");
  if (!is_symmetric(p.M)) throw ValidationError("pencil: M is not symmetric");
  SpdSolver chol(p.M);
  if (!chol.ok()) throw ValidationError("pencil: M is not positive definite");
}

namespace {

// validate_pencil for matrices already known to be tridiagonal: only the band
// is read, so the check stays O(n).
void validate_tri_pencil(const SymPencil& p) {
  const Index n = p.A.rows();
  if (n == 0) throw ValidationError("pencil: empty matrices");
  if (p.M.rows() != n) throw ValidationError("pencil: A and M must be square of equal size");
  auto band_ok = [n](const Mat& X, const char* name) {
    double scale = 0.0, asym = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (!std::isfinite(X(i, i))) throw ValidationError("pencil: non-finite entries");
      scale = std::max(scale, std::abs(X(i, i)));
      if (i + 1 < n) {
        if (!std::isfinite(X(i + 1, i)) || !std::isfinite(X(i, i + 1)))
          throw ValidationError("pencil: non-finite entries");
        scale = std::max({scale, std::abs(X(i + 1, i)), std::abs(X(i, i + 1))});
        asym = std::max(asym, std::abs(X(i + 1, i) - X(i, i + 1)));
      }
    }
    if (asym > 1e-12 * scale) throw ValidationError(std::string("pencil: ") + name + " is not symmetric");
  };
  band_ok(p.A, "A");
  band_ok(p.M, "M");
  Vec ld, ls;
  if (!detail::tri_cholesky(detail::to_tri(p.M), ld, ls)) throw ValidationError("pencil: M is not positive definite");
}

}  // namespace

void normalize_signs(Mat& V) {
  for (Index j = 0; j < V.cols(); ++j) {
    Index imax = 0;
    V.col(j).cwiseAbs().maxCoeff(&imax);
    if (V(imax, j) < 0) V.col(j) *= -1.0;
  }
}

EigDecomp geig_sym(const SymPencil& pencil) {
  validate_pencil(pencil);
  const Mat A = 0.5 * (pencil.A + pencil.A.transpose());
  const Mat M = 0.5 * (pencil.M + pencil.M.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(A, M, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw NumericalError("geig_sym: eigensolver did not converge");
  EigDecomp out{es.eigenvalues(), es.eigenvectors()};
  for (Index j = 0; j < out.vectors.cols(); ++j) {
    const double nrm = std::sqrt(out.vectors.col(j).dot(M * out.vectors.col(j)));
    out.vectors.col(j) /= nrm;
  }
  normalize_signs(out.vectors);
  return out;
}

EigDecomp geig_lowest(const SymPencil& pencil, Index k) {
  const Index n = pencil.A.rows();
  if (k < 0) throw ValidationError("geig_lowest: negative count");
  k = std::min(k, n);
  if (is_tridiagonal(pencil.A) && is_tridiagonal(pencil.M)) {
    validate_tri_pencil(pencil);
    return detail::tri_lowest(detail::to_tri(pencil.A), detail::to_tri(pencil.M), k);
  }
  EigDecomp all = geig_sym(pencil);
  return EigDecomp{all.values.head(k), all.vectors.leftCols(k)};
}

Index count_below(const SymPencil& pencil, double sigma) {
  if (is_tridiagonal(pencil.A) && is_tridiagonal(pencil.M)) {
    validate_tri_pencil(pencil);
    return detail::sturm_count(detail::to_tri(pencil.A), detail::to_tri(pencil.M), sigma);
  }
  const EigDecomp all = geig_sym(pencil);
  return static_cast<Index>((all.values.array() < sigma).count());
}

Vec pinv_apply(const Mat& A, const Vec& x, double tol) {
  if (A.rows() != A.cols() || A.rows() != x.size()) throw ValidationError("pinv_apply: size mismatch");
  if (!is_symmetric(A)) throw ValidationError("pinv_apply: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError("pinv_apply: eigensolver did not converge");
  const Vec& w = es.eigenvalues();
  const double lmax = w.size() ? w.maxCoeff() : 0.0;
  Vec y = Vec::Zero(x.size());
  if (!(lmax > 0.0)) return y;
  const double cut = tol * lmax;
  const Vec c = es.eigenvectors().transpose() * x;
  for (Index i = 0; i < w.size(); ++i)
    if (w(i) > cut) y += (c(i) / w(i)) * es.eigenvectors().col(i);
  return y;
}

Mat m_orthonormalize(const Mat& V, const Mat& M) {
  if (V.rows() != M.rows() || M.rows() != M.cols()) throw ValidationError("m_orthonormalize: size mismatch");
  Mat W = V;
  for (Index j = 0; j < W.cols(); ++j) {
    const double n0 = std::sqrt(std::max(0.0, W.col(j).dot(M * W.col(j))));
    if (!(n0 > 0.0))
      throw ValidationError("m_orthonormalize: column " + std::to_string(j) + " is zero");
    for (int pass = 0; pass < 2; ++pass) {
      const Vec mw = M * W.col(j);
      for (Index p = 0; p < j; ++p) W.col(j) -= W.col(p).dot(mw) * W.col(p);
    }
    const double n1 = std::sqrt(std::max(0.0, W.col(j).dot(M * W.col(j))));
    if (!(n1 > 1e-10 * n0))
      throw ValidationError("m_orthonormalize: column " + std::to_string(j) +
                            " is linearly dependent on the preceding columns");
    W.col(j) /= n1;
  }
  return W;
}

namespace {

void require_orthonormal(const Mat& U, const Mat& M, const char* name) {
  const Mat G = U.transpose() * M * U;
  const double err = (G - Mat::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff();
  if (!(err <= 1e-8))
    throw ValidationError(std::string("proj_distance: ") + name + " is not M-orthonormal (error " +
                          std::to_string(err) + ")");
}

// ||(I - P_V) U|| in the M norm, with U and V M-orthonormal.
double residual_sine(const Mat& U, const Mat& V, const Mat& M) {
  const Mat MU = M * U;
  const Mat R = U - V * (V.transpose() * MU);
  const Mat G = R.transpose() * M * R;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (G + G.transpose()), Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().size() ? es.eigenvalues().maxCoeff() : 0.0;
  return std::sqrt(std::clamp(top, 0.0, 1.0));
}

}  // namespace

double proj_distance(const Mat& U, const Mat& V, const Mat& M) {
  if (U.rows() != M.rows() || V.rows() != M.rows()) throw ValidationError("proj_distance: size mismatch");
  require_orthonormal(U, M, "U");
  require_orthonormal(V, M, "V");
  if (U.cols() != V.cols()) return 1.0;
  if (U.cols() == 0) return 0.0;
  return std::max(residual_sine(U, V, M), residual_sine(V, U, M));
}

SpdSolver::SpdSolver(const Mat& A) : n_(A.rows()) {
  if (A.rows() != A.cols() || n_ == 0) {
    ok_ = false;
    return;
  }
  tri_ = is_tridiagonal(A);
  if (tri_) {
    ok_ = detail::tri_cholesky(detail::to_tri(A), ld_, ls_);
  } else {
    llt_.compute(0.5 * (A + A.transpose()));
    ok_ = llt_.info() == Eigen::Success;
  }
}

Vec SpdSolver::solve(const Vec& b) const {
  if (!ok_) throw NumericalError("SpdSolver: matrix is not positive definite");
  if (b.size() != n_) throw ValidationError("SpdSolver: size mismatch");
  if (tri_) {
    Vec x = b;
    detail::tri_cholesky_solve(ld_, ls_, x);
    return x;
  }
  return llt_.solve(b);
}

Mat SpdSolver::solve(const Mat& B) const {
  if (!ok_) throw NumericalError("SpdSolver: matrix is not positive definite");
  if (B.rows() != n_) throw ValidationError("SpdSolver: size mismatch");
  if (tri_) {
    Mat X = B;
    for (Index j = 0; j < X.cols(); ++j) {
      Vec c = X.col(j);
      detail::tri_cholesky_solve(ld_, ls_, c);
      X.col(j) = c;
    }
    return X;
  }
  return llt_.solve(B);
}

}  // namespace stiffspec
