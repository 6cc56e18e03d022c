#include "stiffspec/models_1d.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace stiffspec {

namespace {

constexpr double kPi = std::numbers::pi;

// P1 assembly with Dirichlet conditions at both ends. stiff/mass weights are
// evaluated at element midpoints.
FormPair assemble_p1(const Vec& nodes, const std::function<double(double)>& e_stiff,
                     const std::function<double(double)>& e_mass) {
  const Index ne = nodes.size() - 1;
  const Index n = ne - 1;
  Mat B = Mat::Zero(n, n), E = Mat::Zero(n, n), M = Mat::Zero(n, n);
  for (Index e = 0; e < ne; ++e) {
    const double h = nodes(e + 1) - nodes(e);
    const double mid = 0.5 * (nodes(e) + nodes(e + 1));
    const double ks = 1.0 / h, ms_d = h / 3.0, ms_o = h / 6.0;
    const double we = e_stiff(mid), wm = e_mass(mid);
    const Index g[2] = {e - 1, e};  // interior numbering, -1 / n are boundary
    for (int a = 0; a < 2; ++a) {
      if (g[a] < 0 || g[a] >= n) continue;
      for (int b = 0; b < 2; ++b) {
        if (g[b] < 0 || g[b] >= n) continue;
        const double k = a == b ? ks : -ks;
        const double m = a == b ? ms_d : ms_o;
        B(g[a], g[b]) += k;
        M(g[a], g[b]) += m;
        E(g[a], g[b]) += we * k + wm * m;
      }
    }
  }
  FormPair p;
  p.n = n;
  p.B = std::move(B);
  p.E = std::move(E);
  p.M = std::move(M);
  p.b_definite = true;
  return p;
}

double right_of_one(double x) { return x > 1.0 ? 1.0 : 0.0; }
double zero(double) { return 0.0; }

void check_interval_elems(Index n) {
  if (n < 2) throw ValidationError("interval model: need at least 2 elements");
  if (n % 2 != 0) throw ValidationError("interval model: element count must be even (x = 1 must be a node)");
}

}  // namespace

Mesh1D uniform_mesh(double a, double b, Index n_elems) {
  if (!(a < b)) throw ValidationError("mesh: need a < b");
  if (n_elems < 2) throw ValidationError("mesh: need at least 2 elements");
  Mesh1D m{a, b, n_elems, Vec::LinSpaced(n_elems + 1, a, b)};
  m.nodes(n_elems) = b;
  return m;
}

FormPair build_regular(Index n) {
  check_interval_elems(n);
  FormPair p = assemble_p1(uniform_mesh(0.0, 2.0, n).nodes, right_of_one, zero);
  p.label = "regular";
  return p;
}

FormPair build_singular(Index n) {
  check_interval_elems(n);
  FormPair p = assemble_p1(uniform_mesh(0.0, 2.0, n).nodes, zero, right_of_one);
  p.label = "singular";
  return p;
}

double obstacle_truncation_proxy(double L, double kappa) {
  const double s = kappa * kappa - kPi * kPi;
  if (!(s > 0.0)) return 1.0;
  return std::exp(-2.0 * std::sqrt(s) * (L - 1.0));
}

Mesh1D obstacle_mesh(const ObstacleConfig& cfg) {
  if (!(cfg.L >= 2.0)) throw ValidationError("obstacle: truncation length L must be at least 2");
  const Index n1 = static_cast<Index>(std::lround(static_cast<double>(cfg.n_elems) / cfg.L));
  const Index n2 = cfg.n_elems - n1;
  if (n1 < 1 || n2 < 1 || cfg.n_elems < 4) throw ValidationError("obstacle: too few elements");
  Mesh1D m;
  m.a = 0.0;
  m.b = cfg.L;
  m.n_elems = cfg.n_elems;
  m.nodes.resize(cfg.n_elems + 1);
  for (Index i = 0; i <= n1; ++i) m.nodes(i) = static_cast<double>(i) / static_cast<double>(n1);
  for (Index i = 1; i <= n2; ++i)
    m.nodes(n1 + i) = 1.0 + (cfg.L - 1.0) * static_cast<double>(i) / static_cast<double>(n2);
  return m;
}

FormPair build_obstacle(const ObstacleConfig& cfg) {
  const Mesh1D mesh = obstacle_mesh(cfg);
  const double proxy = obstacle_truncation_proxy(cfg.L, cfg.min_kappa);
  if (!(proxy <= cfg.truncation_tol)) {
    std::ostringstream os;
    os << "obstacle: truncation proxy " << proxy << " at kappa = " << cfg.min_kappa << " with L = " << cfg.L
       << " exceeds " << cfg.truncation_tol;
    throw ValidationError(os.str());
  }
  FormPair p = assemble_p1(mesh.nodes, zero, right_of_one);
  p.label = "obstacle";
  return p;
}

double obstacle_exact_eig(double kappa, Index i) {
  if (i < 1) throw ValidationError("obstacle_exact_eig: index starts at 1");
  const double delta = 1e-9;
  auto f = [kappa](double s) { return std::sqrt(std::max(kappa * kappa - s * s, 0.0)) + s / std::tan(s); };
  double lo = (2.0 * static_cast<double>(i) - 1.0) * kPi / 2.0 + delta;
  double hi = std::min(static_cast<double>(i) * kPi - delta, kappa);
  if (!(lo < hi) || !(f(lo) > 0.0) || !(f(hi) < 0.0)) {
    std::ostringstream os;
    os << "obstacle_exact_eig: no root for index " << i << " at kappa = " << kappa;
    throw NumericalError(os.str());
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  const double s = 0.5 * (lo + hi);
  return s * s;
}

double taylor_reference(double kappa, int order) {
  if (order < 1 || order > 4) throw ValidationError("taylor_reference: order must be 1..4");
  if (!(kappa > 1.0)) throw ValidationError("taylor_reference: kappa must exceed 1");
  const double pi2 = kPi * kPi;
  const double c[4] = {2.0, -3.0, 8.0 * (0.5 + pi2 / 24.0), -10.0 * (0.5 + 4.0 * pi2 / 24.0)};
  double sum = 0.0, p = 1.0;
  for (int k = 0; k < order; ++k) {
    p /= kappa;
    sum += c[k] * p;
  }
  return sum;
}

ObstacleBracket obstacle_bracket(double kappa) {
  ObstacleBracket b;
  const double pi2 = kPi * kPi;
  const double eta2 = 2.0 / (3.0 + kappa);
  b.d = (1.0 - std::sqrt(eta2)) * 4.0 * pi2;
  b.lower = eta2;
  b.upper = (b.d + pi2) / (b.d - pi2) * eta2;
  if (kappa < 5.0) {
    b.in_range = false;
    b.warning = "kappa below 5: outside the bracket's validity range";
  }
  return b;
}

}  // namespace stiffspec
