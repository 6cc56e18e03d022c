#include "stiffspec/models_arch.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace stiffspec {

namespace {

// 6-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 6> kGx = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                                       0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
constexpr std::array<double, 6> kGw = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                                       0.4679139345726910, 0.3607615730481386, 0.1713244923791704};

// Equispaced Lagrange basis on [0, 1] and its derivative.
void lagrange(int p, double t, Vec& N, Vec& dN) {
  N.setOnes(p + 1);
  dN.setZero(p + 1);
  std::vector<double> xi(static_cast<size_t>(p + 1));
  for (int a = 0; a <= p; ++a) xi[static_cast<size_t>(a)] = static_cast<double>(a) / p;
  for (int a = 0; a <= p; ++a) {
    const double xa = xi[static_cast<size_t>(a)];
    for (int b = 0; b <= p; ++b)
      if (b != a) N(a) *= (t - xi[static_cast<size_t>(b)]) / (xa - xi[static_cast<size_t>(b)]);
    for (int c = 0; c <= p; ++c) {
      if (c == a) continue;
      double prod = 1.0 / (xa - xi[static_cast<size_t>(c)]);
      for (int b = 0; b <= p; ++b)
        if (b != a && b != c) prod *= (t - xi[static_cast<size_t>(b)]) / (xa - xi[static_cast<size_t>(b)]);
      dN(a) += prod;
    }
  }
}

// Cubic Hermite basis (value, slope at each end) on an element of length h.
void hermite(double t, double h, Vec& H, Vec& dH, Vec& d2H) {
  H.resize(4);
  dH.resize(4);
  d2H.resize(4);
  H << 1 - 3 * t * t + 2 * t * t * t, h * (t - 2 * t * t + t * t * t), 3 * t * t - 2 * t * t * t,
      h * (-t * t + t * t * t);
  dH << (-6 * t + 6 * t * t) / h, 1 - 4 * t + 3 * t * t, (6 * t - 6 * t * t) / h, -2 * t + 3 * t * t;
  d2H << (-6 + 12 * t) / (h * h), (-4 + 6 * t) / h, (6 - 12 * t) / (h * h), (-2 + 6 * t) / h;
}

FormPair assemble(const ArchConfig& cfg, double EI, double EA) {
  validate(cfg);
  const Index ne = cfg.n_elems;
  const int p = cfg.u1_degree;
  const double h = cfg.l / static_cast<double>(ne);
  const double inv_r = std::isinf(cfg.R) ? 0.0 : 1.0 / cfg.R;
  const Index n1 = p * ne + 1, n2 = 2 * (ne + 1), nfull = n1 + n2;

  Mat B = Mat::Zero(nfull, nfull), E = Mat::Zero(nfull, nfull), M = Mat::Zero(nfull, nfull);
  const Index ne_dofs = p + 1 + 4;
  std::vector<Index> idx(static_cast<size_t>(ne_dofs));
  Vec N, dN, H, dH, d2H;
  Vec rb(ne_dofs), re(ne_dofs), m1(ne_dofs), m2(ne_dofs);
  for (Index e = 0; e < ne; ++e) {
    for (int a = 0; a <= p; ++a) idx[static_cast<size_t>(a)] = p * e + a;
    for (int a = 0; a < 4; ++a) idx[static_cast<size_t>(p + 1 + a)] = n1 + 2 * e + a;
    for (size_t g = 0; g < kGx.size(); ++g) {
      const double t = 0.5 * (kGx[g] + 1.0), w = 0.5 * kGw[g] * h;
      lagrange(p, t, N, dN);
      dN /= h;
      hermite(t, h, H, dH, d2H);
      rb << dN * inv_r, d2H;
      re << dN, -H * inv_r;
      m1 << N, Vec::Zero(4);
      m2 << Vec::Zero(p + 1), H;
      for (Index a = 0; a < ne_dofs; ++a)
        for (Index b = 0; b < ne_dofs; ++b) {
          const Index ia = idx[static_cast<size_t>(a)], ib = idx[static_cast<size_t>(b)];
          B(ia, ib) += EI * w * rb(a) * rb(b);
          E(ia, ib) += EA * w * re(a) * re(b);
          M(ia, ib) += w * (m1(a) * m1(b) + m2(a) * m2(b));
        }
    }
  }

  // Clamp u1(0), u2(0), u2'(0).
  std::vector<Index> keep;
  for (Index i = 0; i < nfull; ++i)
    if (i != 0 && i != n1 && i != n1 + 1) keep.push_back(i);
  const Index n = static_cast<Index>(keep.size());
  FormPair pr;
  pr.n = n;
  pr.B.resize(n, n);
  pr.E.resize(n, n);
  pr.M.resize(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const Index a = keep[static_cast<size_t>(i)], b = keep[static_cast<size_t>(j)];
      pr.B(i, j) = B(a, b);
      pr.E(i, j) = E(a, b);
      pr.M(i, j) = M(a, b);
    }
  pr.B = 0.5 * (pr.B + pr.B.transpose());
  pr.E = 0.5 * (pr.E + pr.E.transpose());
  pr.M = 0.5 * (pr.M + pr.M.transpose());
  pr.b_definite = false;
  pr.label = "arch";
  return pr;
}

}  // namespace

void validate(const ArchConfig& cfg) {
  if (!(cfg.E_mod > 0.0 && cfg.A > 0.0 && cfg.I > 0.0 && cfg.R > 0.0 && cfg.l > 0.0))
    throw ValidationError("arch: physical constants must be positive");
  if (!(cfg.l <= std::numbers::pi * cfg.R * (1.0 + 1e-12)))
    throw ValidationError("arch: arc length exceeds half the circle");
  if (cfg.n_elems < 4) throw ValidationError("arch: need at least 4 elements");
  if (cfg.u1_degree < 1 || cfg.u1_degree > 8) throw ValidationError("arch: u1 degree must be 1..8");
}

FormPair build_arch(const ArchConfig& cfg) { return assemble(cfg, cfg.E_mod * cfg.I, cfg.E_mod * cfg.A); }

FormPair build_arch_physical(const ArchConfig& cfg, double eps) {
  if (!(eps > 0.0)) throw ValidationError("arch: thickness must be positive");
  const double e2 = eps * eps;
  FormPair p = assemble(cfg, cfg.E_mod * cfg.I * e2 * e2, cfg.E_mod * cfg.A * e2);
  p.label = "arch-physical";
  return p;
}

LimitSpectrum curved_rod_spectrum(const ArchConfig& cfg, double tol) { return limit_spectrum(build_arch(cfg), tol); }

double lbb_theoretical(const ArchConfig& cfg) {
  if (std::isinf(cfg.R)) return 1.0;
  const double ar2 = cfg.A * cfg.R * cfg.R;
  return std::sqrt((cfg.I + ar2) / ar2);
}

ArchThresholds eps_thresholds(const ArchConfig& cfg, const LimitSpectrum& limit, Index m) {
  const Vec& lv = limit.values;
  if (lv.size() < 2) throw ValidationError("eps_thresholds: need two limit eigenvalues");
  if (m < 1 || m >= lv.size()) throw ValidationError("eps_thresholds: m must leave a value above the cluster");
  const double l1 = lv(0), l2 = lv(1);
  if (!(l2 - l1 > 1e-12 * std::abs(l2))) throw ValidationError("eps_thresholds: lowest limit eigenvalue is degenerate");
  ArchThresholds th;
  th.m = m;
  th.c = lbb_theoretical(cfg) * lbb_theoretical(cfg);
  th.gamma = (l2 - l1) / (l2 + l1);
  th.eps0 = std::sqrt(3.0) / 6.0 * std::sqrt(th.c * th.gamma);
  th.eps1 = th.eps0 / 2.0;
  th.gap_min = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < lv.size(); ++k)
      if (k != i) th.gap_min = std::min(th.gap_min, std::abs(lv(k) - lv(i)) / (lv(k) + lv(i)));
  th.eps2 = std::sqrt(th.gap_min / (12.0 * th.c));
  return th;
}

double arch_reference_kappa(double eps, ArchReferenceReading reading) {
  return reading == ArchReferenceReading::InverseSquare ? 1.0 / (eps * eps) : 1.0 / eps;
}

BoundReport arch_bracket(const ArchThresholds& th, double eps, double eta_ref) {
  BoundReport r;
  r.tag = "arch-lowest";
  const double e2 = eps * eps;
  r.lower = {2.0 * th.c * e2 * eta_ref};
  r.upper = {4.0 * th.c * e2 / th.gamma};
  if (!(eps <= th.eps1)) {
    r.valid = false;
    r.note = "eps above eps1";
  }
  r.inputs = {{"eps", eps}, {"eta_ref", eta_ref}, {"eps1", th.eps1}, {"c", th.c}, {"gamma", th.gamma}};
  return r;
}

BoundReport arch_upper(const ArchThresholds& th, double eps) {
  BoundReport r;
  r.tag = "arch-upper";
  r.upper.assign(static_cast<size_t>(th.m), 12.0 * th.c * eps * eps / th.gap_min);
  if (!(eps <= th.eps2)) {
    r.valid = false;
    r.note = "eps above eps2";
  }
  r.inputs = {{"eps", eps}, {"eps2", th.eps2}, {"c", th.c}, {"gap_min", th.gap_min}};
  return r;
}

}  // namespace stiffspec
