// Synthetic matrix families: the projection family with a closed-form
// resolvent, seeded random pairs and a family with a degenerate limit cluster.
#pragma once

#include <cstdint>
#include <random>

#include "stiffspec/forms.hpp"

namespace stiffspec {

// mt19937_64 with hand-rolled uniform and normal draws, so a seed gives the
// same numbers with every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform();                  // [0, 1), 53 random bits
  double uniform(double a, double b);
  double normal();                   // Box-Muller
  Mat normal_matrix(Index rows, Index cols);

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Haar-like orthogonal matrix from the QR of a Gaussian matrix.
Mat random_orthogonal(Index n, Rng& rng);

struct ProjectionFamily {
  Mat H;  // SPD
  Mat P;  // orthogonal projector
};

ProjectionFamily make_projection_family(Index n, Index rank, std::uint64_t seed);

// B = H, E = H^1/2 P H^1/2, M = I.
FormPair projection_family_pair(const ProjectionFamily& fam);

struct ProjectionErrors {
  double exact_ratio = 0.0;  // from the closed-form resolvent
  double lower = 0.0;        // 1 / (2 kappa^2)
  double upper = 0.0;        // 1 / kappa^2
  double solve_mismatch = 0.0;  // ||x_closed - x_solve|| / ||x_closed||
  bool zero_residual = false;   // P H^-1/2 f = 0: ratio undefined, reported as 0
};

ProjectionErrors projection_family_errors(const ProjectionFamily& fam, double kappa, const Vec& f,
                                          bool with_bracket = true);

// E has exact rank n - r on a random M-orthonormal frame; B and M are SPD.
FormPair random_spd_pair(Index n, Index r, std::uint64_t seed);

struct ClusterPair {
  FormPair pair;
  Index q = 1;         // 0-based position of the cluster in the limit spectrum
  Index m = 2;
  double value = 1.0;  // the m-fold limit eigenvalue
};

// Limit spectrum 0.4, value (m times), 3, then larger values; the kernel is
// coupled to its complement through B so the cluster splits at finite kappa.
ClusterPair degenerate_cluster_pair(Index n, Index m, std::uint64_t seed);

struct ClusteredPencil {
  SymPencil pencil;
  EigDecomp eig;    // exact eigenpairs by construction
  Index q = 0;
  Index m = 1;
  double lambda_q = 0.0;
};

// Keeps the M-orthonormal eigenvectors of a random pair, replaces the spectrum
// by 1.25^k and merges positions q .. q+m-1 into one m-fold eigenvalue.
ClusteredPencil clustered_pencil(Index n, Index q, Index m, std::uint64_t seed);

// Eigenvectors q .. q+m-1 rotated by theta towards eigenvectors outside the cluster.
Mat rotated_basis(const ClusteredPencil& cp, double theta);

}  // namespace stiffspec
