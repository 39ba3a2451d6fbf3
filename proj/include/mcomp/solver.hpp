#pragma once

#include <vector>

#include "mcomp/sampling.hpp"
#include "mcomp/subspace.hpp"

namespace mcomp {

enum class ConstraintMode { equality, ball };

struct SolveOptions {
  int max_iters = 5000;
  double tol_rel = 1e-7;   // relative primal/dual residual target
  double rho = 1.0;        // common primal/dual step size (valid: ||K|| <= 1)
  double noise_bound = 0.0;
  ConstraintMode mode = ConstraintMode::equality;
  bool track_merit = false;  // record the fixed-point merit per iteration
};

struct SolveReport {
  Matrix x_hat;
  int iters = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;  // ||Q_U x_hat Q_V||_*
  bool converged = false;
  std::vector<double> merit_history;  // filled when track_merit
};

// Singular value soft-thresholding: prox of tau*||.||_*.
Matrix svt(const Matrix& m, double tau);

// Minimize ||Q_U Z Q_V||_* subject to the data constraint
//   equality: R_Omega(Z) = y on the observed set (noiseless),
//   ball:     ||y - R_Omega(Z)||_F <= noise_bound.
// Primal-dual splitting on W = Q_U Z Q_V: alternates an SVT prox in the
// W variable with an exact projection of Z onto the constraint set, with a
// running dual variable (the substitution is valid since the Q's are
// invertible for weights in (0,1]).
SolveReport solve_weighted(const Matrix& y, const SampleMask& mask, const QMatrix& qu,
                           const QMatrix& qv, const SolveOptions& opts);

// Unweighted baseline (Q_U = Q_V = I).
SolveReport solve_standard(const Matrix& y, const SampleMask& mask,
                           const SolveOptions& opts);

// Uniform single-weight variant: Lambda = lambda I, Gamma = gamma I on the
// full prior dimension.
SolveReport solve_single_weight(const Matrix& y, const SampleMask& mask,
                                const SubspaceBasis& u_prior, const SubspaceBasis& v_prior,
                                double lambda, double gamma, const SolveOptions& opts);

// ||x_hat - x_true||_F / ||x_true||_F.
double nre(const Matrix& x_hat, const Matrix& x_true);

// JSON text for a report (x_hat omitted above 64x64 to keep files small).
std::string report_to_json(const SolveReport& rep);

}  // namespace mcomp
