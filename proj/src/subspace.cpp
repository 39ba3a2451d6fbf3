#include "mcomp/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mcomp/rng.hpp"
#include "mcomp/weights.hpp"

namespace mcomp {

namespace {

constexpr double kAngleFloor = 1e-9;  // rad; below this a prior direction is "aligned"
constexpr double kHalfPi = std::numbers::pi / 2.0;

void check_angles(const Vector& theta, const char* what) {
  for (Index i = 0; i < theta.size(); ++i)
    if (!(theta(i) >= 0.0 && theta(i) <= kHalfPi + 1e-12))
      throw std::invalid_argument(std::string(what) + ": angles must lie in [0, pi/2]");
}

void check_weights(const Vector& w, const char* what) {
  for (Index i = 0; i < w.size(); ++i)
    if (!(w(i) > 0.0 && w(i) <= 1.0))
      throw std::invalid_argument(std::string(what) + ": weights must lie in (0, 1]");
}

// Append deterministic orthonormal completion columns to the first `filled`
// columns of `b`, writing into columns [filled, filled + count).
void complete_columns(Matrix& b, Index filled, Index count) {
  Index written = 0;
  for (Index cand = 0; cand < b.rows() && written < count; ++cand) {
    Vector e = Vector::Zero(b.rows());
    e(cand) = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (Index k = 0; k < filled + written; ++k) e -= b.col(k).dot(e) * b.col(k);
    const double nrm = e.norm();
    if (nrm > 0.3) {
      b.col(filled + written) = e / nrm;
      ++written;
    }
  }
  if (written < count) throw NumericalError("complete_columns: basis completion failed");
}

}  // namespace

AlignedPair build_aligned_bases(const Vector& theta, Index r_prime, Index n,
                                std::uint64_t seed) {
  const Index r = theta.size();
  if (r < 1 || r > r_prime || r + r_prime > n)
    throw std::invalid_argument("build_aligned_bases: need 1 <= r <= r' and r + r' <= n");
  check_angles(theta, "build_aligned_bases");

  Rng rng(seed);
  const Matrix f = random_orthogonal(n, rng);
  Matrix truth = f.leftCols(r);
  Matrix prior(n, r_prime);
  for (Index i = 0; i < r; ++i)
    prior.col(i) = std::cos(theta(i)) * f.col(i) - std::sin(theta(i)) * f.col(r + i);
  prior.rightCols(r_prime - r) = f.middleCols(2 * r, r_prime - r);
  return {SubspaceBasis(std::move(truth)), SubspaceBasis(std::move(prior))};
}

PriorModel make_prior_model(const Vector& theta_u, const Vector& theta_v,
                            Index r_prime, Index n, std::uint64_t seed) {
  if (theta_u.size() != theta_v.size())
    throw std::invalid_argument("make_prior_model: theta_u/theta_v length mismatch");
  AlignedPair left = build_aligned_bases(theta_u, r_prime, n, hash_combine(seed, 1));
  AlignedPair right = build_aligned_bases(theta_v, r_prime, n, hash_combine(seed, 2));
  return {std::move(left.truth), std::move(right.truth),
          std::move(left.prior), std::move(right.prior), theta_u, theta_v};
}

JointBases build_joint_bases(const SubspaceBasis& u_true, const SubspaceBasis& u_prior) {
  const Index n = u_true.ambient();
  const Index r = u_true.dim();
  const Index rp = u_prior.dim();
  if (u_prior.ambient() != n)
    throw std::invalid_argument("build_joint_bases: ambient dimension mismatch");
  if (r > rp || rp > n - r)
    throw std::invalid_argument("build_joint_bases: need r <= r' <= n - r");

  // Rotate both bases so truth^T prior = [diag(cos theta) 0].
  const SvdResult dec = svd(u_true.basis().transpose() * u_prior.basis());
  JointBases out;
  out.u_canon = u_true.basis() * dec.u;
  Matrix rot(rp, rp);
  rot.leftCols(r) = dec.v;
  complete_columns(rot, r, rp - r);
  out.u_prior_canon = u_prior.basis() * rot;
  out.theta.resize(r);
  for (Index i = 0; i < r; ++i)
    out.theta(i) = std::acos(std::clamp(dec.sigma(i), 0.0, 1.0));

  out.b_l = Matrix::Zero(n, n);
  out.b_l.leftCols(r) = out.u_canon;
  // U'_1: the normalized out-of-truth components of the aligned prior
  // directions. Aligned directions (theta below floor) are deferred to the
  // completion pass.
  std::vector<Index> deferred;
  for (Index i = 0; i < r; ++i) {
    if (out.theta(i) < kAngleFloor) {
      deferred.push_back(r + i);
      continue;
    }
    const Vector w =
        out.u_prior_canon.col(i) - std::cos(out.theta(i)) * out.u_canon.col(i);
    out.b_l.col(r + i) = -w / std::sin(out.theta(i));
  }
  // U'_2 = -(I - P_U) prior_2 = -prior_2 (already orthogonal to the truth).
  out.b_l.middleCols(2 * r, rp - r) = -out.u_prior_canon.rightCols(rp - r);

  // Pack columns contiguously for the completion pass, then restore order.
  // Simpler: run completion on a compacted copy.
  Matrix compact(n, n);
  Index pos = 0;
  for (Index j = 0; j < n; ++j) {
    const bool is_deferred =
        std::find(deferred.begin(), deferred.end(), j) != deferred.end();
    const bool defined = (j < r) || (!is_deferred && j < 2 * r && out.b_l.col(j).norm() > 0.5) ||
                         (j >= 2 * r && j < r + rp);
    if (defined) compact.col(pos++) = out.b_l.col(j);
  }
  const Index missing = n - pos;
  complete_columns(compact, pos, missing);
  // Restore: defined columns keep their slots; completion columns fill the
  // deferred U'_1 slots then the trailing U'' block, in order.
  Index next_completion = pos;
  for (Index j = 0; j < n; ++j) {
    const bool is_deferred =
        std::find(deferred.begin(), deferred.end(), j) != deferred.end();
    const bool defined = (j < r) || (!is_deferred && j < 2 * r && out.b_l.col(j).norm() > 0.5) ||
                         (j >= 2 * r && j < r + rp);
    if (!defined) out.b_l.col(j) = compact.col(next_completion++);
  }
  return out;
}

WeightSpec::WeightSpec(Vector l1, Vector l2, Vector g1, Vector g2)
    : lambda1(std::move(l1)), lambda2(std::move(l2)),
      gamma1(std::move(g1)), gamma2(std::move(g2)) {
  if (lambda1.size() < 1 || lambda1.size() != gamma1.size() ||
      lambda2.size() != gamma2.size())
    throw std::invalid_argument("WeightSpec: inconsistent block lengths");
  check_weights(lambda1, "WeightSpec");
  check_weights(lambda2, "WeightSpec");
  check_weights(gamma1, "WeightSpec");
  check_weights(gamma2, "WeightSpec");
}

WeightSpec WeightSpec::ones(Index r, Index r_prime) {
  if (r < 1 || r_prime < r) throw std::invalid_argument("WeightSpec::ones: bad sizes");
  return WeightSpec(Vector::Ones(r), Vector::Ones(r_prime - r),
                    Vector::Ones(r), Vector::Ones(r_prime - r));
}

Vector WeightSpec::lambda_diag() const {
  Vector d(r_prime());
  d << lambda1, lambda2;
  return d;
}

Vector WeightSpec::gamma_diag() const {
  Vector d(r_prime());
  d << gamma1, gamma2;
  return d;
}

QMatrix build_q(const SubspaceBasis& prior, const Vector& weights) {
  if (weights.size() != prior.dim())
    throw std::invalid_argument("build_q: weight count must equal prior dimension");
  check_weights(weights, "build_q");
  const Index n = prior.ambient();
  const Matrix& u = prior.basis();
  QMatrix qm;
  qm.q = Matrix::Identity(n, n) +
         u * (weights.array() - 1.0).matrix().asDiagonal() * u.transpose();
  qm.q_inv = Matrix::Identity(n, n) +
             u * (weights.array().inverse() - 1.0).matrix().asDiagonal() * u.transpose();
  return qm;
}

BlockFactor build_block_factor(const Vector& theta, const Vector& lambda1,
                               const Vector& lambda2) {
  if (theta.size() != lambda1.size() || theta.size() < 1)
    throw std::invalid_argument("build_block_factor: theta/lambda1 length mismatch");
  check_angles(theta, "build_block_factor");
  check_weights(lambda1, "build_block_factor");
  if (lambda2.size() > 0) check_weights(lambda2, "build_block_factor");

  BlockFactor bf;
  bf.theta = theta;
  bf.lambda1 = lambda1;
  bf.lambda2 = lambda2;
  const Index r = theta.size();
  bf.delta.resize(r);
  bf.l12_diag.resize(r);
  bf.l22_diag.resize(r);
  for (Index i = 0; i < r; ++i) {
    const double d = f2(lambda1(i), theta(i));
    if (d < 1e-15)
      throw std::invalid_argument("build_block_factor: degenerate f2 (lambda=0, theta=0)");
    bf.delta(i) = d;
    bf.l12_diag(i) =
        (1.0 - lambda1(i) * lambda1(i)) * std::sin(theta(i)) * std::cos(theta(i)) / d;
    bf.l22_diag(i) = lambda1(i) / d;
  }
  return bf;
}

Matrix assemble_block_l(const BlockFactor& bf, Index n) {
  const Index r = bf.theta.size();
  const Index k2 = bf.lambda2.size();
  if (n < 2 * r + k2)
    throw std::invalid_argument("assemble_block_l: ambient dimension too small");
  Matrix l = Matrix::Identity(n, n);
  for (Index i = 0; i < r; ++i) {
    l(i, i) = bf.delta(i);
    l(i, r + i) = bf.l12_diag(i);
    l(r + i, r + i) = bf.l22_diag(i);
  }
  for (Index j = 0; j < k2; ++j) l(2 * r + j, 2 * r + j) = bf.lambda2(j);
  return l;
}

BlockNorms block_norms(const BlockFactor& bf) {
  BlockNorms out{0, 0, 0, 0, 0, 0};
  const Index r = bf.theta.size();
  for (Index i = 0; i < r; ++i) {
    const double d = bf.delta(i);
    const double l12 = std::abs(bf.l12_diag(i));
    const double dev22 = 1.0 - bf.l22_diag(i);
    out.l11 = std::max(out.l11, d);
    out.l12 = std::max(out.l12, l12);
    out.i_minus_l22 = std::max(out.i_minus_l22, std::abs(dev22));
    out.l11_l12 = std::max(out.l11_l12, std::sqrt(d * d + l12 * l12));
    out.lprime_sq = std::max(out.lprime_sq, l12 * l12 + dev22 * dev22);
    out.complement_diag = std::max(out.complement_diag, std::abs(dev22));
  }
  for (Index j = 0; j < bf.lambda2.size(); ++j) {
    const double dev = 1.0 - bf.lambda2(j);
    out.lprime_sq = std::max(out.lprime_sq, dev * dev);
    out.complement_diag = std::max(out.complement_diag, dev);
  }
  return out;
}

Matrix proj_tangent(const Matrix& z, const SubspaceBasis& u, const SubspaceBasis& v) {
  const Matrix uz = u.basis() * (u.basis().transpose() * z);
  const Matrix zv = (z * v.basis()) * v.basis().transpose();
  const Matrix uzv = u.basis() * (u.basis().transpose() * zv);
  return uz + zv - uzv;
}

Matrix proj_tangent_perp(const Matrix& z, const SubspaceBasis& u, const SubspaceBasis& v) {
  return z - proj_tangent(z, u, v);
}

}  // namespace mcomp
