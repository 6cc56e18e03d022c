#include "stiffspec/forms.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "tridiag.hpp"

namespace stiffspec {

namespace {

// Smallest eigenvalue of a symmetric matrix, sign-aware and cheap for
// tridiagonal input.
bool is_semidefinite(const Mat& E, double rel_tol) {
  const double scale = E.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  const double shift = -rel_tol * scale;
  if (is_tridiagonal(E)) {
    detail::Tri t = detail::to_tri(E);
    detail::Tri id{Vec::Ones(E.rows()), Vec::Zero(std::max<Index>(E.rows() - 1, 0))};
    return detail::sturm_count(t, id, shift) == 0;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (E + E.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= shift;
}

Mat principal(const Mat& A, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  Mat S(rows.size(), cols.size());
  for (size_t j = 0; j < cols.size(); ++j)
    for (size_t i = 0; i < rows.size(); ++i) S(i, j) = A(rows[i], cols[j]);
  return S;
}

// Zero rows of E forming one contiguous block at either end, and the
// complement. Empty result when the pattern does not apply.
bool coordinate_split(const FormPair& pair, std::vector<Index>& z, std::vector<Index>& y, bool& prefix) {
  const Index n = pair.n;
  std::vector<bool> zero(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) zero[static_cast<size_t>(i)] = pair.E.row(i).cwiseAbs().maxCoeff() == 0.0;
  Index r = 0;
  while (r < n && zero[static_cast<size_t>(r)]) ++r;
  Index s = 0;
  while (s < n && zero[static_cast<size_t>(n - 1 - s)]) ++s;
  const Index total = static_cast<Index>(std::count(zero.begin(), zero.end(), true));
  z.clear();
  y.clear();
  if (total == 0 || total == n) return false;
  if (r == total) {
    prefix = true;
  } else if (s == total) {
    prefix = false;
  } else {
    return false;
  }
  for (Index i = 0; i < n; ++i) (zero[static_cast<size_t>(i)] ? z : y).push_back(i);
  return true;
}

bool try_coordinate_limit(const FormPair& pair, double tol, Index max_pairs, LimitSpectrum& out) {
  if (!(is_tridiagonal(pair.B) && is_tridiagonal(pair.E) && is_tridiagonal(pair.M))) return false;
  std::vector<Index> z, y;
  bool prefix = true;
  if (!coordinate_split(pair, z, y, prefix)) return false;

  const Index r = static_cast<Index>(z.size());
  const detail::Tri Mzz = detail::to_tri(principal(pair.M, z, z));
  Vec ld, ls;
  if (!detail::tri_cholesky(Mzz, ld, ls)) return false;

  // Schur complement of M_zz in M; a single corner entry changes.
  detail::Tri S = detail::to_tri(principal(pair.M, y, y));
  const Index zb = prefix ? r - 1 : 0;
  const Index yb = prefix ? 0 : static_cast<Index>(y.size()) - 1;
  const double m_cross = pair.M(y[static_cast<size_t>(yb)], z[static_cast<size_t>(zb)]);
  Vec eb = Vec::Zero(r);
  eb(zb) = 1.0;
  detail::tri_cholesky_solve(ld, ls, eb);
  S.d(yb) -= m_cross * m_cross * eb(zb);

  const detail::Tri Eyy = detail::to_tri(principal(pair.E, y, y));
  double lo, hi;
  detail::spectrum_bounds(Eyy, S, lo, hi);
  const Index ny = static_cast<Index>(y.size());
  const double emin = detail::bisect_eigenvalue(Eyy, S, 0, lo, hi);
  const double emax = detail::bisect_eigenvalue(Eyy, S, ny - 1, lo, hi);
  if (!(emin > tol * emax)) return false;

  out.coordinate_kernel = true;
  out.kernel_index = z;
  out.kernel_dim = r;
  out.e_lambda_max = emax;

  // Z = P_z L^{-T}, with M_zz = L L^T bidiagonal.
  out.Z = Mat::Zero(pair.n, r);
  Mat Linv_t = Mat::Zero(r, r);
  for (Index j = 0; j < r; ++j) {
    Linv_t(j, j) = 1.0 / ld(j);
    for (Index i = j - 1; i >= 0; --i) Linv_t(i, j) = -ls(i) * Linv_t(i + 1, j) / ld(i);
  }
  for (Index i = 0; i < r; ++i) out.Z.row(z[static_cast<size_t>(i)]) = Linv_t.row(i);

  const Index k = max_pairs < 0 ? r : std::min(max_pairs, r);
  const EigDecomp sub = detail::tri_lowest(detail::to_tri(principal(pair.B, z, z)), Mzz, k);
  out.values = sub.values;
  out.vectors = Mat::Zero(pair.n, k);
  for (Index i = 0; i < r; ++i) out.vectors.row(z[static_cast<size_t>(i)]) = sub.vectors.row(i);
  return true;
}

}  // namespace

void validate(const FormPair& pair) {
  const Index n = pair.n;
  if (n <= 0) throw ValidationError("form pair: dimension must be positive");
  for (const Mat* m : {&pair.B, &pair.E, &pair.M})
    if (m->rows() != n || m->cols() != n) throw ValidationError("form pair: matrix size differs from n");
  if (!pair.B.allFinite() || !pair.E.allFinite() || !pair.M.allFinite())
    throw ValidationError("form pair: non-finite entries");
  if (!is_symmetric(pair.B)) throw ValidationError("form pair: B is not symmetric");
  if (!is_symmetric(pair.E)) throw ValidationError("form pair: E is not symmetric");
  if (!is_symmetric(pair.M)) throw ValidationError("form pair: M is not symmetric");
  if (!SpdSolver(pair.M).ok()) throw ValidationError("form pair: M is not positive definite");
  if (!is_semidefinite(pair.E, 1e-12)) throw ValidationError("form pair: E is not positive semidefinite");
  if (!SpdSolver(pair.B + pair.E).ok()) throw ValidationError("form pair: B + E is not positive definite");
}

SymPencil assemble_coupled(const FormPair& pair, double kappa) {
  if (!(kappa >= 0.0)) throw ValidationError("assemble_coupled: kappa must be nonnegative");
  return SymPencil{pair.B + (kappa * kappa) * pair.E, pair.M};
}

LimitSpectrum limit_spectrum(const FormPair& pair, double tol, Index max_pairs) {
  if (!(tol > 0.0)) throw ValidationError("limit_spectrum: tol must be positive");
  LimitSpectrum out;
  if (try_coordinate_limit(pair, tol, max_pairs, out)) return out;

  const EigDecomp em = geig_sym(SymPencil{pair.E, pair.M});
  const double lmax = em.values.maxCoeff();
  out.e_lambda_max = std::max(lmax, 0.0);
  std::vector<Index> ker;
  for (Index i = 0; i < em.values.size(); ++i)
    if (!(lmax > 0.0) || em.values(i) < tol * lmax) ker.push_back(i);
  if (ker.empty()) throw ValidationError("limit_spectrum: inhibited family (kernel of E is trivial)");

  const Index r = static_cast<Index>(ker.size());
  out.kernel_dim = r;
  out.Z.resize(pair.n, r);
  for (Index j = 0; j < r; ++j) out.Z.col(j) = em.vectors.col(ker[static_cast<size_t>(j)]);

  const Mat Br = out.Z.transpose() * pair.B * out.Z;
  const Mat Mr = out.Z.transpose() * pair.M * out.Z;
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(0.5 * (Br + Br.transpose()), 0.5 * (Mr + Mr.transpose()),
                                                   Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw NumericalError("limit_spectrum: restricted eigensolve failed");
  const Index k = max_pairs < 0 ? r : std::min(max_pairs, r);
  out.values = es.eigenvalues().head(k);
  out.vectors = out.Z * es.eigenvectors().leftCols(k);
  for (Index j = 0; j < k; ++j)
    out.vectors.col(j) /= std::sqrt(out.vectors.col(j).dot(pair.M * out.vectors.col(j)));
  normalize_signs(out.vectors);
  return out;
}

Resolvent::Resolvent(const FormPair& pair, double kappa) : pair_(&pair), kappa_(kappa) {
  if (!(kappa >= 0.0)) throw ValidationError("resolvent: kappa must be nonnegative");
  solver_ = SpdSolver(pair.B + (kappa * kappa) * pair.E);
  if (!solver_.ok()) {
    if (kappa == 0.0 && !pair.b_definite)
      throw NumericalError("resolvent: B is singular at kappa = 0; use the definite form B + E (kappa = 1)");
    throw NumericalError("resolvent: B + kappa^2 E is not positive definite");
  }
}

Vec Resolvent::apply(const Vec& f) const { return solver_.solve(Vec(pair_->M * f)); }
Mat Resolvent::apply(const Mat& F) const { return solver_.solve(Mat(pair_->M * F)); }
Vec Resolvent::solve(const Vec& rhs) const { return solver_.solve(rhs); }
Mat Resolvent::solve(const Mat& rhs) const { return solver_.solve(rhs); }
double Resolvent::moment(const Vec& f) const { return f.dot(pair_->M * apply(f)); }

Vec resolvent_apply(const FormPair& pair, double kappa, const Vec& f) {
  if (f.size() != pair.n) throw ValidationError("resolvent_apply: size mismatch");
  return Resolvent(pair, kappa).apply(f);
}

Vec limit_pinv_apply(const FormPair& pair, const LimitSpectrum& limit, const Vec& f) {
  if (f.size() != pair.n) throw ValidationError("limit_pinv_apply: size mismatch");
  const Vec mf = pair.M * f;
  if (limit.coordinate_kernel) {
    const auto& z = limit.kernel_index;
    Vec rhs(z.size());
    for (size_t i = 0; i < z.size(); ++i) rhs(i) = mf(z[i]);
    const SpdSolver sub(principal(pair.B, z, z));
    const Vec xz = sub.solve(rhs);
    Vec x = Vec::Zero(pair.n);
    for (size_t i = 0; i < z.size(); ++i) x(z[i]) = xz(i);
    return x;
  }
  const Mat Br = limit.Z.transpose() * pair.B * limit.Z;
  return limit.Z * pinv_apply(0.5 * (Br + Br.transpose()), limit.Z.transpose() * mf);
}

LbbEstimate lbb_constant(const FormPair& pair, double tol, LbbReference ref) {
  if (ref == LbbReference::Base && !pair.b_definite)
    throw ValidationError("lbb_constant: base reference requires a definite B");
  const Mat R = ref == LbbReference::H1 ? Mat(pair.B + pair.E) : pair.B;

  Mat Z, Y;
  std::vector<Index> z, y;
  bool prefix = true;
  LimitSpectrum probe;
  if (is_tridiagonal(pair.E) && is_tridiagonal(pair.M) && is_tridiagonal(pair.B) &&
      coordinate_split(pair, z, y, prefix)) {
    Z = Mat::Zero(pair.n, static_cast<Index>(z.size()));
    Y = Mat::Zero(pair.n, static_cast<Index>(y.size()));
    for (size_t i = 0; i < z.size(); ++i) Z(z[i], static_cast<Index>(i)) = 1.0;
    for (size_t i = 0; i < y.size(); ++i) Y(y[i], static_cast<Index>(i)) = 1.0;
  } else {
    const EigDecomp em = geig_sym(SymPencil{pair.E, pair.M});
    const double lmax = em.values.maxCoeff();
    std::vector<Index> ker, rest;
    for (Index i = 0; i < em.values.size(); ++i)
      (!(lmax > 0.0) || em.values(i) < tol * lmax ? ker : rest).push_back(i);
    Z.resize(pair.n, static_cast<Index>(ker.size()));
    Y.resize(pair.n, static_cast<Index>(rest.size()));
    for (size_t i = 0; i < ker.size(); ++i) Z.col(static_cast<Index>(i)) = em.vectors.col(ker[i]);
    for (size_t i = 0; i < rest.size(); ++i) Y.col(static_cast<Index>(i)) = em.vectors.col(rest[i]);
  }
  LbbEstimate out;
  out.reference = ref;
  if (Y.cols() == 0) throw ValidationError("lbb_constant: E vanishes identically");

  const Mat Eyy = Y.transpose() * pair.E * Y;
  Mat S = Y.transpose() * R * Y;
  if (Z.cols() > 0) {
    const Mat Rzz = Z.transpose() * R * Z;
    const Mat Rzy = Z.transpose() * R * Y;
    Eigen::LLT<Mat> llt(0.5 * (Rzz + Rzz.transpose()));
    if (llt.info() != Eigen::Success) throw NumericalError("lbb_constant: reference form singular on the kernel");
    S -= Rzy.transpose() * llt.solve(Rzy);
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(0.5 * (Eyy + Eyy.transpose()), 0.5 * (S + S.transpose()),
                                                   Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw NumericalError("lbb_constant: eigensolve failed");
  const Vec& w = es.eigenvalues();
  const double cut = tol * w.maxCoeff();
  double smin = w.maxCoeff();
  for (Index i = 0; i < w.size(); ++i)
    if (w(i) > cut) smin = std::min(smin, w(i));
  out.sigma_min = smin;
  out.kappa_frak = 1.0 / std::sqrt(smin);
  return out;
}

void write_form_pair(std::ostream& os, const FormPair& pair) {
  os << "stiffspec-formpair 1\n";
  os << "n " << pair.n << "\n";
  os << "label " << pair.label << "\n";
  os << "b_definite " << (pair.b_definite ? 1 : 0) << "\n";
  os << std::setprecision(17);
  const char* names[3] = {"B", "E", "M"};
  const Mat* mats[3] = {&pair.B, &pair.E, &pair.M};
  for (int k = 0; k < 3; ++k) {
    os << names[k] << "\n";
    for (Index i = 0; i < pair.n; ++i) {
      for (Index j = 0; j < pair.n; ++j) os << (j ? " " : "") << (*mats[k])(i, j);
      os << "\n";
    }
  }
}

FormPair read_form_pair(std::istream& is) {
  auto fail = [](const std::string& what) { throw ValidationError("read_form_pair: " + what); };
  std::string line, tag;
  if (!std::getline(is, line) || line.rfind("stiffspec-formpair 1", 0) != 0) fail("missing header");
  FormPair p;
  if (!(is >> tag >> p.n) || tag != "n" || p.n <= 0) fail("bad dimension line");
  std::getline(is, line);
  if (!std::getline(is, line) || line.rfind("label", 0) != 0) fail("missing label line");
  p.label = line.size() > 6 ? line.substr(6) : "";
  int bd = 0;
  if (!(is >> tag >> bd) || tag != "b_definite") fail("missing b_definite line");
  p.b_definite = bd != 0;
  Mat* mats[3] = {&p.B, &p.E, &p.M};
  const char* names[3] = {"B", "E", "M"};
  for (int k = 0; k < 3; ++k) {
    if (!(is >> tag) || tag != names[k]) fail(std::string("missing block ") + names[k]);
    mats[k]->resize(p.n, p.n);
    for (Index i = 0; i < p.n; ++i)
      for (Index j = 0; j < p.n; ++j) {
        std::string tok;
        if (!(is >> tok)) fail("truncated matrix data");
        (*mats[k])(i, j) = std::stod(tok);
      }
  }
  return p;
}

}  // namespace stiffspec
