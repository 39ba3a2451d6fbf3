#include "mcomp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace mcomp {

namespace {

constexpr double kJacobiTol = 1e-12;
constexpr int kMaxSweeps = 100;

// One-sided Jacobi on a (rows >= cols) and accumulation of the right
// rotations into v. Columns of a converge to u_j * sigma_j. Columns whose
// norm falls below rank_tol count as zero and are skipped: numerically null
// columns carry only rotation roundoff, stay mutually correlated at O(1),
// and would otherwise churn past any sweep limit.
void jacobi_orthogonalize(Matrix& a, Matrix& v, double rank_tol) {
  const Index n = a.cols();
  const double rank_tol_sq = rank_tol * rank_tol;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double app = a.col(p).squaredNorm();
        const double aqq = a.col(q).squaredNorm();
        if (app <= rank_tol_sq || aqq <= rank_tol_sq) continue;
        const double apq = a.col(p).dot(a.col(q));
        // sqrt(app)*sqrt(aqq), not sqrt(app*aqq): the product underflows for
        // denormal columns and a zero threshold would rotate forever.
        if (std::abs(apq) <= kJacobiTol * std::sqrt(app) * std::sqrt(aqq)) continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (Index i = 0; i < a.rows(); ++i) {
          const double ap = a(i, p);
          a(i, p) = cs * ap - sn * a(i, q);
          a(i, q) = sn * ap + cs * a(i, q);
        }
        for (Index i = 0; i < n; ++i) {
          const double vp = v(i, p);
          v(i, p) = cs * vp - sn * v(i, q);
          v(i, q) = sn * vp + cs * v(i, q);
        }
      }
    }
    if (!rotated) return;
  }
  throw NumericalError("svd: Jacobi sweeps did not converge");
}

// Fill u.col(j) with a unit vector orthogonal to columns [0, j) of u,
// needed when sigma_j underflows and the quotient u_j = a_j / sigma_j is
// meaningless. Deterministic: tries canonical basis vectors in order.
void complete_column(Matrix& u, Index j) {
  Vector best;
  double best_norm = 0.0;
  for (Index cand = 0; cand < u.rows(); ++cand) {
    Vector e = Vector::Zero(u.rows());
    e(cand) = 1.0;
    for (Index k = 0; k < j; ++k) e -= u.col(k).dot(e) * u.col(k);
    for (Index k = 0; k < j; ++k) e -= u.col(k).dot(e) * u.col(k);  // re-orthogonalize
    const double nrm = e.norm();
    // Keep the best residual over all candidates; for j filled columns the
    // canonical vectors guarantee max residual norm >= sqrt((n-j)/n).
    if (nrm > best_norm) {
      best_norm = nrm;
      best = std::move(e);
    }
    if (best_norm > 0.7) break;  // good enough; skip the remaining candidates
  }
  if (best_norm <= 1e-6) throw NumericalError("svd: failed to complete orthonormal basis");
  u.col(j) = best / best_norm;
}

}  // namespace

SvdResult svd(const Matrix& m) {
  check_finite(m, "svd");
  if (m.rows() < m.cols()) {
    SvdResult t = svd(Matrix(m.transpose()));
    return {std::move(t.v), std::move(t.sigma), std::move(t.u)};
  }
  const Index k = m.cols();
  Matrix a = m;
  Matrix v = Matrix::Identity(k, k);
  // Rank cutoff: singular values this far below the matrix scale are pure
  // roundoff; the corresponding columns are frozen and reported as zero.
  const double rank_tol = 1e-14 * m.norm();
  jacobi_orthogonalize(a, v, rank_tol);

  Vector sigma(k);
  for (Index j = 0; j < k; ++j) sigma(j) = a.col(j).norm();

  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return sigma(i) > sigma(j); });

  SvdResult res;
  res.u.resize(m.rows(), k);
  res.v.resize(k, k);
  res.sigma.resize(k);
  const double tiny = rank_tol;
  for (Index j = 0; j < k; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    res.sigma(j) = sigma(src);
    res.v.col(j) = v.col(src);
    if (sigma(src) > tiny && sigma(src) > 0) {
      res.u.col(j) = a.col(src) / sigma(src);
    } else {
      res.sigma(j) = 0.0;
      complete_column(res.u, j);
    }
  }
  // Sign convention: first entry of each u column that is clearly nonzero
  // (relative to the column max) is made non-negative.
  for (Index j = 0; j < k; ++j) {
    const double scale = res.u.col(j).cwiseAbs().maxCoeff();
    for (Index i = 0; i < m.rows(); ++i) {
      const double x = res.u(i, j);
      if (std::abs(x) > 1e-12 * scale) {
        if (x < 0) {
          res.u.col(j) = -res.u.col(j);
          res.v.col(j) = -res.v.col(j);
        }
        break;
      }
    }
  }
  return res;
}

std::pair<SvdResult, Matrix> truncated_svd(const Matrix& m, Index r) {
  if (r < 1 || r > std::min(m.rows(), m.cols()))
    throw std::invalid_argument("truncated_svd: rank out of range");
  SvdResult full = svd(m);
  SvdResult trunc;
  trunc.u = full.u.leftCols(r);
  trunc.sigma = full.sigma.head(r);
  trunc.v = full.v.leftCols(r);
  Matrix residual = m - trunc.u * trunc.sigma.asDiagonal() * trunc.v.transpose();
  return {std::move(trunc), std::move(residual)};
}

double nuclear_norm(const Matrix& m) { return svd(m).sigma.sum(); }

double spectral_norm(const Matrix& m) { return svd(m).sigma(0); }

double frobenius_norm(const Matrix& m) {
  check_finite(m, "frobenius_norm");
  return m.norm();
}

Vector singular_values(const CMatrix& m) {
  check_finite(m, "singular_values");
  const Index rows = m.rows(), cols = m.cols();
  Matrix embed(2 * rows, 2 * cols);
  embed.topLeftCorner(rows, cols) = m.real();
  embed.topRightCorner(rows, cols) = -m.imag();
  embed.bottomLeftCorner(rows, cols) = m.imag();
  embed.bottomRightCorner(rows, cols) = m.real();
  const Vector paired = svd(embed).sigma;  // each value twice, sorted
  Vector out(std::min(rows, cols));
  for (Index i = 0; i < out.size(); ++i) out(i) = paired(2 * i);
  return out;
}

SubspaceBasis::SubspaceBasis(Matrix b) : basis_(std::move(b)) {
  check_finite(basis_, "SubspaceBasis");
  if (basis_.cols() < 1 || basis_.cols() > basis_.rows())
    throw std::invalid_argument("SubspaceBasis: need 1 <= dim <= ambient");
  const Matrix gram = basis_.transpose() * basis_;
  const double err = (gram - Matrix::Identity(basis_.cols(), basis_.cols())).norm();
  if (err > 1e-10) throw std::invalid_argument("SubspaceBasis: columns not orthonormal");
}

Vector principal_angles(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.ambient() != b.ambient())
    throw std::invalid_argument("principal_angles: ambient dimension mismatch");
  if (a.dim() > b.dim()) return principal_angles(b, a);
  const Matrix prod = a.basis().transpose() * b.basis();
  Vector cosines = svd(prod).sigma;  // non-increasing
  Vector theta(cosines.size());
  for (Index i = 0; i < cosines.size(); ++i)
    theta(i) = std::acos(std::clamp(cosines(i), 0.0, 1.0));
  // Cosines were non-increasing, so angles come out non-decreasing; flip.
  return theta.reverse();
}

CoherenceProfile coherence_profile(const SubspaceBasis& u, const SubspaceBasis& v) {
  if (u.ambient() != v.ambient())
    throw std::invalid_argument("coherence_profile: ambient dimension mismatch");
  const Index n = u.ambient();
  CoherenceProfile p;
  p.mu.resize(n);
  p.nu.resize(n);
  const double su = static_cast<double>(n) / static_cast<double>(u.dim());
  const double sv = static_cast<double>(n) / static_cast<double>(v.dim());
  for (Index i = 0; i < n; ++i) {
    p.mu(i) = su * u.basis().row(i).squaredNorm();
    p.nu(i) = sv * v.basis().row(i).squaredNorm();
  }
  p.eta = std::max(p.mu.maxCoeff(), p.nu.maxCoeff());
  return p;
}

double weighted_inf_norm(const Matrix& z, const CoherenceProfile& profile, Index r) {
  check_finite(z, "weighted_inf_norm");
  const double n = static_cast<double>(z.rows());
  double best = 0.0;
  for (Index i = 0; i < z.rows(); ++i) {
    for (Index l = 0; l < z.cols(); ++l) {
      if (z(i, l) == 0.0) continue;
      if (profile.mu(i) <= 0.0 || profile.nu(l) <= 0.0)
        throw std::invalid_argument("weighted_inf_norm: zero coherence at a nonzero entry");
      const double w = std::sqrt(n / (profile.mu(i) * static_cast<double>(r))) *
                       std::sqrt(n / (profile.nu(l) * static_cast<double>(r)));
      best = std::max(best, w * std::abs(z(i, l)));
    }
  }
  return best;
}

double weighted_inf2_norm(const Matrix& z, const CoherenceProfile& profile, Index r) {
  check_finite(z, "weighted_inf2_norm");
  const double n = static_cast<double>(z.rows());
  double best = 0.0;
  for (Index i = 0; i < z.rows(); ++i) {
    const double rn = z.row(i).norm();
    if (rn == 0.0) continue;
    if (profile.mu(i) <= 0.0)
      throw std::invalid_argument("weighted_inf2_norm: zero row coherence on a nonzero row");
    best = std::max(best, std::sqrt(n / (profile.mu(i) * static_cast<double>(r))) * rn);
  }
  for (Index l = 0; l < z.cols(); ++l) {
    const double cn = z.col(l).norm();
    if (cn == 0.0) continue;
    if (profile.nu(l) <= 0.0)
      throw std::invalid_argument("weighted_inf2_norm: zero column coherence on a nonzero column");
    best = std::max(best, std::sqrt(n / (profile.nu(l) * static_cast<double>(r))) * cn);
  }
  return best;
}

}  // namespace mcomp
