#include "mcomp/solver.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace mcomp {

namespace {

// Projection of m onto the data-constraint set. Equality mode pins every
// observed entry to p*y (so R_Omega(z) = y there); ball mode projects the
// p-weighted residual vector onto the Frobenius ball of radius e.
Matrix project_constraint(const Matrix& m, const Matrix& y, const SampleMask& mask,
                          const SolveOptions& opts) {
  Matrix z = m;
  if (opts.mode == ConstraintMode::equality) {
    for (Index i = 0; i < mask.n; ++i)
      for (Index l = 0; l < mask.n; ++l)
        if (mask.eps(i, l)) z(i, l) = mask.prob(i, l) * y(i, l);
    return z;
  }
  // Ball mode: residual t_il = y_il - z_il/p_il on the observed set; project
  // t onto ||t|| <= e under the metric induced by z (weights p_il^2).
  double norm_sq = 0.0;
  for (Index i = 0; i < mask.n; ++i)
    for (Index l = 0; l < mask.n; ++l)
      if (mask.eps(i, l)) {
        const double t = y(i, l) - m(i, l) / mask.prob(i, l);
        norm_sq += t * t;
      }
  const double e = opts.noise_bound;
  if (norm_sq <= e * e) return z;
  // Solve sum (p^2 t / (p^2 + nu))^2 = e^2 for nu >= 0 (decreasing in nu).
  auto phi = [&](double nu) {
    double s = 0.0;
    for (Index i = 0; i < mask.n; ++i)
      for (Index l = 0; l < mask.n; ++l)
        if (mask.eps(i, l)) {
          const double p2 = mask.prob(i, l) * mask.prob(i, l);
          const double t = (y(i, l) - m(i, l) / mask.prob(i, l)) * p2 / (p2 + nu);
          s += t * t;
        }
    return s - e * e;
  };
  double lo = 0.0, hi = 1.0;
  while (phi(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) > 0.0 ? lo : hi) = mid;
  }
  const double nu = 0.5 * (lo + hi);
  for (Index i = 0; i < mask.n; ++i)
    for (Index l = 0; l < mask.n; ++l)
      if (mask.eps(i, l)) {
        const double p = mask.prob(i, l);
        const double t = (y(i, l) - m(i, l) / p) * p * p / (p * p + nu);
        z(i, l) = p * (y(i, l) - t);
      }
  return z;
}

}  // namespace

Matrix svt(const Matrix& m, double tau) {
  if (tau < 0.0) throw std::invalid_argument("svt: tau must be >= 0");
  if (tau == 0.0) return m;
  SvdResult dec = svd(m);
  Vector s = (dec.sigma.array() - tau).max(0.0);
  return dec.u * s.asDiagonal() * dec.v.transpose();
}

SolveReport solve_weighted(const Matrix& y, const SampleMask& mask, const QMatrix& qu,
                           const QMatrix& qv, const SolveOptions& opts) {
  check_finite(y, "solve_weighted");
  if (y.rows() != mask.n || y.cols() != mask.n)
    throw std::invalid_argument("solve_weighted: dimension mismatch");
  if (opts.max_iters < 1 || opts.tol_rel <= 0.0 || opts.rho <= 0.0 || opts.noise_bound < 0.0)
    throw std::invalid_argument("solve_weighted: invalid options");
  if (!qu.q.allFinite() || !qv.q.allFinite() ||
      (qu.q * qu.q_inv - Matrix::Identity(mask.n, mask.n)).norm() > 1e-8 ||
      (qv.q * qv.q_inv - Matrix::Identity(mask.n, mask.n)).norm() > 1e-8)
    throw std::invalid_argument("solve_weighted: Q factors must be mutual inverses");

  const double sigma = opts.rho, tau = opts.rho;
  auto apply_k = [&](const Matrix& z) -> Matrix { return qu.q * z * qv.q; };

  Matrix z = project_constraint(Matrix::Zero(mask.n, mask.n), y, mask, opts);
  Matrix w = Matrix::Zero(mask.n, mask.n);
  Matrix zbar = z;

  SolveReport rep;
  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    const Matrix v = w + sigma * apply_k(zbar);
    const Matrix wn = v - svt(v, 1.0);  // projection onto the spectral unit ball
    const Matrix zn = project_constraint(z - tau * apply_k(wn), y, mask, opts);

    const Matrix dz = zn - z;
    const Matrix dw = wn - w;
    rep.iters = iter;
    rep.primal_residual = dz.norm() / std::max(1.0, zn.norm());
    rep.dual_residual = dw.norm() / std::max(1.0, wn.norm());
    if (opts.track_merit) {
      const double m2 = dz.squaredNorm() / tau + dw.squaredNorm() / sigma -
                        2.0 * (apply_k(dz).array() * dw.array()).sum();
      rep.merit_history.push_back(std::sqrt(std::max(m2, 0.0)));
    }
    zbar = 2.0 * zn - z;
    z = zn;
    w = wn;
    if (rep.primal_residual <= opts.tol_rel && rep.dual_residual <= opts.tol_rel) {
      rep.converged = true;
      break;
    }
  }
  rep.x_hat = z;
  rep.objective = nuclear_norm(apply_k(z));
  return rep;
}

SolveReport solve_standard(const Matrix& y, const SampleMask& mask,
                           const SolveOptions& opts) {
  QMatrix id{Matrix::Identity(mask.n, mask.n), Matrix::Identity(mask.n, mask.n)};
  return solve_weighted(y, mask, id, id, opts);
}

SolveReport solve_single_weight(const Matrix& y, const SampleMask& mask,
                                const SubspaceBasis& u_prior, const SubspaceBasis& v_prior,
                                double lambda, double gamma, const SolveOptions& opts) {
  const QMatrix qu = build_q(u_prior, Vector::Constant(u_prior.dim(), lambda));
  const QMatrix qv = build_q(v_prior, Vector::Constant(v_prior.dim(), gamma));
  return solve_weighted(y, mask, qu, qv, opts);
}

double nre(const Matrix& x_hat, const Matrix& x_true) {
  const double denom = x_true.norm();
  if (denom <= 0.0) throw std::invalid_argument("nre: ground truth is zero");
  return (x_hat - x_true).norm() / denom;
}

std::string report_to_json(const SolveReport& rep) {
  nlohmann::json j;
  j["iters"] = rep.iters;
  j["primal_residual"] = rep.primal_residual;
  j["dual_residual"] = rep.dual_residual;
  j["objective"] = rep.objective;
  j["converged"] = rep.converged;
  if (rep.x_hat.size() > 0 && rep.x_hat.rows() <= 64 && rep.x_hat.cols() <= 64) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < rep.x_hat.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Index l = 0; l < rep.x_hat.cols(); ++l) row.push_back(rep.x_hat(i, l));
      rows.push_back(row);
    }
    j["x_hat"] = rows;
  }
  return j.dump(2);
}

}  // namespace mcomp
