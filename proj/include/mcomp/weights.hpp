#pragma once

#include <cmath>

#include "mcomp/subspace.hpp"

namespace mcomp {

// f1(w,theta) = sqrt(w^4 cos^2 + sin^2), f2(w,theta) = sqrt(w^2 cos^2 + sin^2).
inline double f1(double w, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return std::sqrt(w * w * w * w * c * c + s * s);
}

inline double f2(double w, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return std::sqrt(w * w * c * c + s * s);
}

struct BoundInputs {
  Vector theta_u, theta_v;  // radians, length r
  WeightSpec weights;
  double eta_x = 1.0;      // coherence of the rank-r truth
  double eta_breve = 1.0;  // coherence of the residual-direction term
  double mu_ratio = 1.0;   // max_i residual/truth row-coherence ratio
  double nu_ratio = 1.0;
  Index n = 0, r = 0, r_prime = 0;
};

struct BoundReport {
  double alpha1 = 0, alpha2 = 0, alpha3 = 0;
  double p_lower = 0;
  bool feasible = false;  // alpha3 <= 1/4
};

// Multi-weight bound quantities and the sampling-probability lower bound
// p_lower = max(log(alpha1 n), 1) * (eta_x r log n / n)
//           * max(alpha2^2 (1 + eta_breve/eta_x), 1).
BoundReport alpha123(const BoundInputs& in);

struct SingleAlphas {
  double alpha4 = 0, alpha5 = 0, alpha6 = 0;
  bool feasible = false;  // alpha6 <= 1/8
};

// Single-weight quantities at the largest principal angles.
SingleAlphas alpha456(double theta_u1, double theta_v1, double lambda, double gamma);

// Sampling bound for the single-weight condition:
// max(log(alpha4 n), 1) * (eta_x r log n / n) * max(alpha5^2 (1 + eta_breve/eta_x), 1).
double single_p_lower(const SingleAlphas& a, double eta_x, double eta_breve,
                      Index n, Index r);

enum class WeightMode { multi, single, none };

struct WeightSearchResult {
  WeightSpec weights = WeightSpec::ones(1, 1);
  BoundReport report;
  WeightMode mode = WeightMode::none;
  bool feasible = false;
};

// Minimizes p_lower over the mode's search set subject to alpha3 <= 1/4:
// multi = per-index diagonal weights (coordinate descent seeded from a coarse
// grid, one 10x refinement pass), single = uniform (lambda, gamma) pair,
// none = all-ones. Falls back to all-ones flagged infeasible when no grid
// point satisfies the constraint. The search sets are nested on matched
// grids, so multi <= single <= none in the returned bound values.
WeightSearchResult optimize_weights(const Vector& theta_u, const Vector& theta_v,
                                    double eta_x, double eta_breve, Index n, Index r,
                                    Index r_prime, WeightMode mode, int grid = 21);

}  // namespace mcomp
