// Clamped-free circular arch: bending and membrane energies, the inextensible
// (curved rod) limit and the thickness brackets.
#pragma once

#include <numbers>

#include "stiffspec/bounds.hpp"
#include "stiffspec/forms.hpp"

namespace stiffspec {

struct ArchConfig {
  double E_mod = 1.0;
  double A = 1.0;
  double I = 1.0;
  double R = 1.0;  // +infinity gives a straight rod
  double l = std::numbers::pi;
  Index n_elems = 32;
  int u1_degree = 4;  // Lagrange degree of the tangential displacement
};

void validate(const ArchConfig& cfg);

// u1: Lagrange of degree u1_degree, u2: cubic Hermite; u(0) = 0, u2'(0) = 0.
// B = E I int (u2'' + u1'/R)^2, E = E A int (u1' - u2/R)^2, M = L2 mass.
FormPair build_arch(const ArchConfig& cfg);

// The physical energy of a rod of thickness eps: stiffness matrix B + E of the
// returned pair uses I eps^4 and A eps^2, assembled directly.
FormPair build_arch_physical(const ArchConfig& cfg, double eps);

LimitSpectrum curved_rod_spectrum(const ArchConfig& cfg, double tol = 1e-8);

// sqrt((I + A R^2) / (A R^2)).
double lbb_theoretical(const ArchConfig& cfg);

struct ArchThresholds {
  double eps0 = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double c = 0.0;        // (I + A R^2) / (A R^2)
  double gamma = 0.0;    // (l2 - l1) / (l2 + l1) of the two lowest limit values
  double gap_min = 0.0;  // min over i < m of min_{k != i} |lk - li| / (lk + li)
  Index m = 0;
};

ArchThresholds eps_thresholds(const ArchConfig& cfg, const LimitSpectrum& limit, Index m = 3);

// Coupling at which the reference defect is read: eps^-2 (the default), or
// 1/eps for the alternative reading.
enum class ArchReferenceReading { InverseSquare, Inverse };
double arch_reference_kappa(double eps, ArchReferenceReading reading = ArchReferenceReading::InverseSquare);

// Two-sided bracket on the relative error of the lowest eigenvalue at
// thickness eps; eta_ref is the lowest defect at the reference coupling.
BoundReport arch_bracket(const ArchThresholds& th, double eps, double eta_ref);

// Upper bound on the relative errors of the m lowest eigenvalues.
BoundReport arch_upper(const ArchThresholds& th, double eps);

}  // namespace stiffspec
