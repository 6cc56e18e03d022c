// The coupled family B + kappa^2 E with mass M, its limit on the kernel of E,
// resolvent application and the inf-sup (regularity) constant.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stiffspec/linalg.hpp"

namespace stiffspec {

// Discrete triple: base form B, penalty form E, mass M.
struct FormPair {
  Index n = 0;
  Mat B;
  Mat E;
  Mat M;
  std::string label;
  bool b_definite = false;
};

// Throws ValidationError unless the pair is symmetric, E is semidefinite,
// M is SPD and B + E is positive definite.
void validate(const FormPair& pair);

// Pencil (B + kappa^2 E, M).
SymPencil assemble_coupled(const FormPair& pair, double kappa);

struct LimitSpectrum {
  Mat Z;                       // M-orthonormal basis of the kernel of E
  Vec values;                  // limit eigenvalues, ascending
  Mat vectors;                 // limit eigenvectors in the full space, M-orthonormal
  Index kernel_dim = 0;
  double e_lambda_max = 0.0;   // largest eigenvalue of (E, M)
  bool coordinate_kernel = false;
  std::vector<Index> kernel_index;  // set when the kernel is a coordinate subspace
};

// Kernel = eigenvectors of (E, M) with eigenvalue below tol * lambda_max.
// max_pairs < 0 keeps every limit eigenpair.
LimitSpectrum limit_spectrum(const FormPair& pair, double tol = 1e-8, Index max_pairs = -1);

// Factored B + kappa^2 E. apply(f) solves (B + kappa^2 E) x = M f.
class Resolvent {
 public:
  Resolvent(const FormPair& pair, double kappa);

  Vec apply(const Vec& f) const;
  Mat apply(const Mat& F) const;
  // Solves (B + kappa^2 E) x = rhs.
  Vec solve(const Vec& rhs) const;
  Mat solve(const Mat& rhs) const;
  // (f, H^-1 f) = f' M x.
  double moment(const Vec& f) const;

  double kappa() const { return kappa_; }

 private:
  const FormPair* pair_;
  double kappa_;
  SpdSolver solver_;
};

Vec resolvent_apply(const FormPair& pair, double kappa, const Vec& f);

// (f, H_inf^+ f) and H_inf^+ f: project on the kernel, solve there, lift.
Vec limit_pinv_apply(const FormPair& pair, const LimitSpectrum& limit, const Vec& f);

enum class LbbReference {
  H1,    // B + E, definite for every valid pair
  Base,  // B alone, requires b_definite
};

struct LbbEstimate {
  double kappa_frak = 0.0;
  double sigma_min = 0.0;  // smallest nonzero eigenvalue of (E, reference)
  std::optional<double> theoretical_bound;
  LbbReference reference = LbbReference::H1;
};

LbbEstimate lbb_constant(const FormPair& pair, double tol = 1e-8, LbbReference ref = LbbReference::H1);

// Plain-text triple format, documented in the README.
void write_form_pair(std::ostream& os, const FormPair& pair);
FormPair read_form_pair(std::istream& is);

}  // namespace stiffspec
