// Dense symmetric kernels: generalized eigensolves, truncated pseudo-inverse
// and subspace geometry in a mass-matrix inner product.
#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace stiffspec {

using Index = Eigen::Index;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Bad arguments or violated preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation that is well posed but failed numerically.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Generalized symmetric pencil A x = lambda M x, M SPD.
struct SymPencil {
  Mat A;
  Mat M;
};

// Columns of `vectors` are M-orthonormal; values ascend.
struct EigDecomp {
  Vec values;
  Mat vectors;
};

// Throws ValidationError unless A and M are square, of equal size,
// symmetric to 1e-12 relative and M is positive definite.
void validate_pencil(const SymPencil& pencil);

bool is_symmetric(const Mat& A, double rel_tol = 1e-12);

// All eigenpairs. Each eigenvector has its largest-magnitude entry positive.
EigDecomp geig_sym(const SymPencil& pencil);

// The k smallest eigenpairs. Uses bisection and inverse iteration when both
// matrices are tridiagonal, otherwise a dense solve truncated to k.
EigDecomp geig_lowest(const SymPencil& pencil, Index k);

// Number of eigenvalues strictly below sigma (Sylvester inertia of A - sigma M).
Index count_below(const SymPencil& pencil, double sigma);

// A^+ x with eigenvalues <= tol * lambda_max treated as zero.
Vec pinv_apply(const Mat& A, const Vec& x, double tol = 1e-10);

// Gram-Schmidt in the M inner product, two passes. Throws ValidationError
// naming the first column that is dependent on its predecessors.
Mat m_orthonormalize(const Mat& V, const Mat& M);

// Operator-norm distance between the M-orthogonal projectors onto span(U)
// and span(V). Both inputs must be M-orthonormal. Returns 1 if the
// dimensions differ.
double proj_distance(const Mat& U, const Mat& V, const Mat& M);

// Flip columns so that each has its largest-magnitude entry positive.
void normalize_signs(Mat& V);

// Symmetric matrices with the same sparsity pattern as a tridiagonal.
bool is_tridiagonal(const Mat& A);

// Factorization of an SPD matrix. Tridiagonal input is factored in O(n).
class SpdSolver {
 public:
  SpdSolver() = default;
  explicit SpdSolver(const Mat& A);

  // False if the matrix was not numerically positive definite.
  bool ok() const { return ok_; }
  Index size() const { return n_; }

  Vec solve(const Vec& b) const;
  Mat solve(const Mat& B) const;

 private:
  Index n_ = 0;
  bool ok_ = false;
  bool tri_ = false;
  Vec ld_;  // Cholesky diagonal (tridiagonal case)
  Vec ls_;  // Cholesky subdiagonal (tridiagonal case)
  Eigen::LLT<Mat> llt_;
};

}  // namespace stiffspec
