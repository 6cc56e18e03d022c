// Approximation defects of a test subspace, the block splitting Xi / Gamma / W
// and the Schur-complement residual.
#pragma once

#include <string>
#include <utility>

#include "stiffspec/forms.hpp"
#include "stiffspec/linalg.hpp"

namespace stiffspec {

struct DefectSet {
  double kappa = 0.0;
  bool plain = true;  // true: computed from a bare pencil, kappa unused
  Index m = 0;
  Vec etas;           // ascending, in [0, 1)
  std::string test_label;
  bool clamped = false;       // a squared defect left [0, 1) by more than 1e-10
  double clamp_excess = 0.0;

  double eta_max() const { return m ? etas(m - 1) : 0.0; }
};

struct BlockSplit {
  Mat Xi;
  Mat Gamma;     // (n - m) x m
  Vec W_values;
  Mat W_vectors; // eigenvectors of the complementary block, orthonormal
  Vec mu;        // Ritz values, ascending
};

struct IndexRange {
  Index first = 0;  // 0-based
  Index count = 1;
};

// V' A V for an M-orthonormal V.
Mat ritz_matrix(const SymPencil& pencil, const Mat& V);

// eta_i^2 = eigenvalues of (X - Xi^-1, X), X = V' M A^-1 M V. The difference
// is formed from the residual A V - M V Xi, so there is no cancellation.
DefectSet defects_general(const SymPencil& pencil, const Mat& V, const std::string& label = "");

// Resolvent Gram matrix X = V' M A(kappa)^-1 M V of selected limit vectors and
// its excess X - Lambda^-1, formed without cancellation.
struct DefectGram {
  Mat X;
  Mat excess;
  Vec lambda;
};
DefectGram defect_gram(const FormPair& pair, double kappa, const LimitSpectrum& limit, IndexRange range);

// Defects of the selected limit eigenvectors at coupling kappa.
DefectSet defects_kappa(const FormPair& pair, double kappa, const LimitSpectrum& limit, IndexRange range);

// Dense M-orthonormal completion; refuses n above max_dim.
BlockSplit gamma_block(const SymPencil& pencil, const Mat& V, Index max_dim = 2000);

// || (I - lambda Xi^-1) - Gamma' (I - lambda W^-1)^-1 Gamma ||_2, after checking
// that lambda_q has multiplicity m = V.cols() and that the Ritz gap condition holds.
double schur_residual(const SymPencil& pencil, const Mat& V, double lambda_q);

// Both sides of  ||r_q||^2 in the inverse block-diagonal norm = lambda_q * eta_1^2
// for the single limit eigenvector with 0-based index q.
std::pair<double, double> residual_defect_identity(const FormPair& pair, double kappa,
                                                   const LimitSpectrum& limit, Index q);

}  // namespace stiffspec
