#include "tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace stiffspec::detail {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Row-pivoted LU of a general tridiagonal matrix, as in LAPACK dgttrf.
class TriLu {
 public:
  TriLu(Vec dl, Vec d, Vec du) : dl_(std::move(dl)), d_(std::move(d)), du_(std::move(du)) {
    const Index n = d_.size();
    du2_ = Vec::Zero(std::max<Index>(n - 2, 0));
    swap_.assign(static_cast<size_t>(std::max<Index>(n - 1, 0)), false);
    double scale = d_.cwiseAbs().maxCoeff();
    if (n > 1) scale = std::max({scale, dl_.cwiseAbs().maxCoeff(), du_.cwiseAbs().maxCoeff()});
    tiny_ = kEps * std::max(scale, std::numeric_limits<double>::min());
    for (Index i = 0; i + 1 < n; ++i) {
      if (std::abs(d_(i)) >= std::abs(dl_(i))) {
        if (d_(i) == 0.0) d_(i) = tiny_;
        const double f = dl_(i) / d_(i);
        dl_(i) = f;
        d_(i + 1) -= f * du_(i);
      } else {
        const double f = d_(i) / dl_(i);
        d_(i) = dl_(i);
        dl_(i) = f;
        const double t = du_(i);
        du_(i) = d_(i + 1);
        d_(i + 1) = t - f * d_(i + 1);
        if (i + 2 < n) {
          du2_(i) = du_(i + 1);
          du_(i + 1) = -f * du_(i + 1);
        }
        swap_[static_cast<size_t>(i)] = true;
      }
    }
    for (Index i = 0; i < n; ++i)
      if (std::abs(d_(i)) < tiny_) d_(i) = d_(i) < 0 ? -tiny_ : tiny_;
  }

  void solve(Vec& b) const {
    const Index n = d_.size();
    for (Index i = 0; i + 1 < n; ++i) {
      if (swap_[static_cast<size_t>(i)]) {
        const double t = b(i);
        b(i) = b(i + 1);
        b(i + 1) = t - dl_(i) * b(i);
      } else {
        b(i + 1) -= dl_(i) * b(i);
      }
    }
    b(n - 1) /= d_(n - 1);
    if (n > 1) b(n - 2) = (b(n - 2) - du_(n - 2) * b(n - 1)) / d_(n - 2);
    for (Index i = n - 3; i >= 0; --i)
      b(i) = (b(i) - du_(i) * b(i + 1) - du2_(i) * b(i + 2)) / d_(i);
  }

 private:
  Vec dl_, d_, du_, du2_;
  std::vector<bool> swap_;
  double tiny_ = 0.0;
};

double m_dot(const Tri& M, const Vec& x, const Vec& y) { return x.dot(tri_mul(M, y)); }

}  // namespace

Tri to_tri(const Mat& A) {
  const Index n = A.rows();
  Tri t;
  t.d = A.diagonal();
  t.e = n > 1 ? Vec(A.diagonal(-1)) : Vec();
  return t;
}

Vec tri_mul(const Tri& M, const Vec& x) {
  const Index n = M.size();
  Vec y = M.d.cwiseProduct(x);
  for (Index i = 0; i + 1 < n; ++i) {
    y(i) += M.e(i) * x(i + 1);
    y(i + 1) += M.e(i) * x(i);
  }
  return y;
}

Index sturm_count(const Tri& A, const Tri& M, double sigma) {
  const Index n = A.size();
  double emax = 1.0;
  for (Index i = 0; i + 1 < n; ++i) {
    const double b = A.e(i) - sigma * M.e(i);
    emax = std::max(emax, b * b);
  }
  const double pivmin = std::numeric_limits<double>::min() * emax;
  Index count = 0;
  double t = A.d(0) - sigma * M.d(0);
  if (std::abs(t) < pivmin) t = -pivmin;
  if (t < 0) ++count;
  for (Index i = 1; i < n; ++i) {
    const double b = A.e(i - 1) - sigma * M.e(i - 1);
    t = (A.d(i) - sigma * M.d(i)) - b * b / t;
    if (std::abs(t) < pivmin) t = -pivmin;
    if (t < 0) ++count;
  }
  return count;
}

void spectrum_bounds(const Tri& A, const Tri& M, double& lo, double& hi) {
  const Index n = A.size();
  double scale = 0.0;
  for (Index i = 0; i < n; ++i) {
    double r = std::abs(A.d(i));
    if (i > 0) r += std::abs(A.e(i - 1));
    if (i + 1 < n) r += std::abs(A.e(i));
    scale = std::max(scale, r / M.d(i));
  }
  if (!(scale > 0.0)) scale = 1.0;
  lo = -scale;
  hi = scale;
  for (int it = 0; it < 2000 && sturm_count(A, M, lo) > 0; ++it) lo *= 2.0;
  for (int it = 0; it < 2000 && sturm_count(A, M, hi) < n; ++it) hi *= 2.0;
}

double bisect_eigenvalue(const Tri& A, const Tri& M, Index k, double lo, double hi) {
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= 2.0 * kEps * std::max(std::abs(lo), std::abs(hi))) break;
    if (sturm_count(A, M, mid) >= k + 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

EigDecomp tri_lowest(const Tri& A, const Tri& M, Index k) {
  const Index n = A.size();
  k = std::min(k, n);
  EigDecomp out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  if (k == 0) return out;

  double lo, hi;
  spectrum_bounds(A, M, lo, hi);
  // Shrink the upper end once so that each bisection starts tight.
  double top = hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + top);
    if (sturm_count(A, M, mid) >= k) top = mid; else break;
  }
  for (Index j = 0; j < k; ++j) out.values(j) = bisect_eigenvalue(A, M, j, lo, top);

  for (Index j = 0; j < k; ++j) {
    const double lam = out.values(j);
    Vec dl(std::max<Index>(n - 1, 0)), du(std::max<Index>(n - 1, 0));
    for (Index i = 0; i + 1 < n; ++i) dl(i) = du(i) = A.e(i) - lam * M.e(i);
    Vec d = A.d - lam * M.d;
    TriLu lu(dl, d, du);

    std::vector<Index> partners;
    const double cluster = 1e-3 * std::max(std::abs(lam), std::numeric_limits<double>::min());
    for (Index p = 0; p < j; ++p)
      if (j <= 64 || std::abs(out.values(p) - lam) <= cluster) partners.push_back(p);

    Vec x(n);
    for (Index i = 0; i < n; ++i)
      x(i) = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + 0.3 * static_cast<double>(j) + 0.1);
    for (int it = 0; it < 4; ++it) {
      Vec y = tri_mul(M, x);
      lu.solve(y);
      for (int pass = 0; pass < 2; ++pass)
        for (Index p : partners) {
          const Vec vp = out.vectors.col(p);
          y -= m_dot(M, vp, y) * vp;
        }
      const double nrm = std::sqrt(m_dot(M, y, y));
      if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericalError("inverse iteration broke down");
      x = y / nrm;
    }
    Eigen::Index imax;
    x.cwiseAbs().maxCoeff(&imax);
    if (x(imax) < 0) x = -x;
    out.vectors.col(j) = x;
  }
  return out;
}

Vec tri_highest_values(const Tri& A, const Tri& M, Index k) {
  const Index n = A.size();
  k = std::min(k, n);
  double lo, hi;
  spectrum_bounds(A, M, lo, hi);
  Vec v(k);
  for (Index j = 0; j < k; ++j) v(j) = bisect_eigenvalue(A, M, n - k + j, lo, hi);
  return v;
}

bool tri_cholesky(const Tri& A, Vec& ld, Vec& ls) {
  const Index n = A.size();
  ld.resize(n);
  ls.resize(std::max<Index>(n - 1, 0));
  double piv = A.d(0);
  if (!(piv > 0.0)) return false;
  ld(0) = std::sqrt(piv);
  for (Index i = 0; i + 1 < n; ++i) {
    ls(i) = A.e(i) / ld(i);
    piv = A.d(i + 1) - ls(i) * ls(i);
    if (!(piv > 0.0) || !std::isfinite(piv)) return false;
    ld(i + 1) = std::sqrt(piv);
  }
  return true;
}

void tri_cholesky_solve(const Vec& ld, const Vec& ls, Eigen::Ref<Vec> x) {
  const Index n = ld.size();
  x(0) /= ld(0);
  for (Index i = 1; i < n; ++i) x(i) = (x(i) - ls(i - 1) * x(i - 1)) / ld(i);
  x(n - 1) /= ld(n - 1);
  for (Index i = n - 2; i >= 0; --i) x(i) = (x(i) - ls(i) * x(i + 1)) / ld(i);
}

}  // namespace stiffspec::detail
