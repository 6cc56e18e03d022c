// P1 finite element families on intervals: the regular and singular penalty
// on [0, 2] and the truncated half-line obstacle.
#pragma once

#include <string>

#include "stiffspec/forms.hpp"

namespace stiffspec {

struct Mesh1D {
  double a = 0.0;
  double b = 1.0;
  Index n_elems = 0;
  Vec nodes;  // n_elems + 1 points including both ends
};

Mesh1D uniform_mesh(double a, double b, Index n_elems);

// Penalty: stiffness restricted to [1, 2]. n even so that x = 1 is a node.
FormPair build_regular(Index n_elems);
// Penalty: mass restricted to [1, 2].
FormPair build_singular(Index n_elems);

struct ObstacleConfig {
  double L = 3.0;
  Index n_elems = 4000;
  // Smallest coupling the pair is meant for; together with truncation_tol it
  // bounds the decay proxy exp(-2 sqrt(kappa^2 - pi^2)(L - 1)).
  double min_kappa = 5.0;
  double truncation_tol = 1e-6;
};

double obstacle_truncation_proxy(double L, double kappa);

// [0, 1] gets round(n / L) elements so that x = 1 is a node; the rest of the
// elements cover [1, L] uniformly.
Mesh1D obstacle_mesh(const ObstacleConfig& cfg);
FormPair build_obstacle(const ObstacleConfig& cfg);

// i-th eigenvalue (i >= 1) of -u'' + kappa^2 chi_[1,inf) u on the half line
// with u(0) = 0, from sqrt(kappa^2 - lambda) = -sqrt(lambda) cot(sqrt(lambda)).
double obstacle_exact_eig(double kappa, Index i);

// Partial sum of the large-kappa series of (lambda_1^inf - lambda_1^kappa) / lambda_1^inf.
double taylor_reference(double kappa, int order);

struct ObstacleBracket {
  double lower = 0.0;
  double upper = 0.0;
  double d = 0.0;    // cut (1 - sqrt(2/(3+kappa))) 4 pi^2
  bool in_range = true;
  std::string warning;
};

// Bracket on the relative error of the lowest eigenvalue; meant for kappa >= 5.
ObstacleBracket obstacle_bracket(double kappa);

}  // namespace stiffspec
