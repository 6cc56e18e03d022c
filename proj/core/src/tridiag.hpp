// Internal O(n) kernels for symmetric tridiagonal pencils.
#pragma once

#include "stiffspec/linalg.hpp"

namespace stiffspec::detail {

// d(i) = A(i,i), e(i) = A(i+1,i).
struct Tri {
  Vec d;
  Vec e;
  Index size() const { return d.size(); }
};

Tri to_tri(const Mat& A);

// Eigenvalues of (A, M) strictly below sigma.
Index sturm_count(const Tri& A, const Tri& M, double sigma);

// Bracket [lo, hi] containing the whole spectrum of (A, M).
void spectrum_bounds(const Tri& A, const Tri& M, double& lo, double& hi);

// The k-th (0-based) eigenvalue by bisection to full precision.
double bisect_eigenvalue(const Tri& A, const Tri& M, Index k, double lo, double hi);

// Lowest k eigenpairs, M-orthonormal vectors.
EigDecomp tri_lowest(const Tri& A, const Tri& M, Index k);

// Largest k eigenvalues (values only, ascending).
Vec tri_highest_values(const Tri& A, const Tri& M, Index k);

// Cholesky factor of an SPD tridiagonal: ld diagonal, ls subdiagonal.
bool tri_cholesky(const Tri& A, Vec& ld, Vec& ls);
void tri_cholesky_solve(const Vec& ld, const Vec& ls, Eigen::Ref<Vec> x);

// M x for tridiagonal M.
Vec tri_mul(const Tri& M, const Vec& x);

}  // namespace stiffspec::detail
