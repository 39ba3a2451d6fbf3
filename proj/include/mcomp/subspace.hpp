#pragma once

#include <cstdint>

#include "mcomp/linalg.hpp"

namespace mcomp {

// One side of a prior model: a rank-r truth subspace and an r'-dimensional
// prior forming the prescribed principal angles with it.
struct AlignedPair {
  SubspaceBasis truth;  // n x r
  SubspaceBasis prior;  // n x r'
};

// Places truth and prior analytically inside a seeded random orthogonal
// frame so the principal angles are exact by construction.
// theta in radians, length r; requires r <= r_prime and r + r_prime <= n.
AlignedPair build_aligned_bases(const Vector& theta, Index r_prime, Index n,
                                std::uint64_t seed);

struct PriorModel {
  SubspaceBasis u_true, v_true;   // n x r
  SubspaceBasis u_prior, v_prior; // n x r'
  Vector theta_u, theta_v;        // radians, length r (construction order)
};

// Both sides, with side-specific seeds derived from `seed`.
PriorModel make_prior_model(const Vector& theta_u, const Vector& theta_v,
                            Index r_prime, Index n, std::uint64_t seed);

struct JointBases {
  Matrix b_l;            // n x n orthogonal: [U_r, U'_1, U'_2, U'']
  Matrix u_canon;        // n x r, truth basis rotated to canonical alignment
  Matrix u_prior_canon;  // n x r', prior basis rotated to canonical alignment
  Vector theta;          // angles in canonical column order (non-decreasing)
};

// Canonical joint basis for a (truth, prior) pair: rotates both bases so
// u_canon^T u_prior_canon = [cos(theta) 0], then builds the completion
// columns. Angles below 1e-9 rad are treated as exactly aligned and the
// corresponding completion column is chosen arbitrarily (orthonormally).
JointBases build_joint_bases(const SubspaceBasis& u_true, const SubspaceBasis& u_prior);

struct WeightSpec {
  Vector lambda1, lambda2;  // lengths r and r'-r, entries in (0,1]
  Vector gamma1, gamma2;

  WeightSpec(Vector l1, Vector l2, Vector g1, Vector g2);
  static WeightSpec ones(Index r, Index r_prime);

  Index r() const { return lambda1.size(); }
  Index r_prime() const { return lambda1.size() + lambda2.size(); }
  Vector lambda_diag() const;  // concat(lambda1, lambda2), length r'
  Vector gamma_diag() const;
};

struct QMatrix {
  Matrix q;      // n x n symmetric
  Matrix q_inv;  // exact inverse
};

// Q = U diag(w) U^T + (I - U U^T); weights in (0,1].
QMatrix build_q(const SubspaceBasis& prior, const Vector& weights);

// Diagonals of the upper-triangular block factor of Q in the joint basis:
// [ Delta  (I-Lambda1^2) sin cos Delta^-1 ]           with Delta_i = f2(lambda1_i, theta_i),
// [   0          Lambda1 Delta^-1         ]  then blkdiag(Lambda2, I).
struct BlockFactor {
  Vector theta, lambda1, lambda2;
  Vector delta;      // f2(lambda1_i, theta_i)
  Vector l12_diag;   // (1-lambda1_i^2) sin cos / delta_i
  Vector l22_diag;   // lambda1_i / delta_i
};

BlockFactor build_block_factor(const Vector& theta, const Vector& lambda1,
                               const Vector& lambda2);

// Full n x n upper-triangular factor (identity on the trailing block).
Matrix assemble_block_l(const BlockFactor& bf, Index n);

struct BlockNorms {
  double l11;              // ||L11||
  double l12;              // ||L12||
  double i_minus_l22;      // ||I - L22||
  double l11_l12;          // ||[L11 L12]||
  double lprime_sq;        // ||L'||^2 (deviation-from-identity block)
  double complement_diag;  // max(max_i(1-lambda2_i), max_i(1-lambda1_i/delta_i))
};

// Closed-form block norms (max-over-i expressions).
BlockNorms block_norms(const BlockFactor& bf);

// Tangent-space projections for the support of a rank-r matrix with factors
// (u, v): P_T(Z) = P_U Z + Z P_V - P_U Z P_V, and its complement.
Matrix proj_tangent(const Matrix& z, const SubspaceBasis& u, const SubspaceBasis& v);
Matrix proj_tangent_perp(const Matrix& z, const SubspaceBasis& u, const SubspaceBasis& v);

}  // namespace mcomp
