#pragma once

#include <utility>

#include "mcomp/types.hpp"

namespace mcomp {

struct SvdResult {
  Matrix u;      // rows x k, column-orthonormal
  Vector sigma;  // length k, non-increasing, >= 0
  Matrix v;      // cols x k, column-orthonormal
};

// Full thin SVD (k = min(rows, cols)) by one-sided Jacobi.
// Deterministic conventions: sigma non-increasing, first nonzero entry of
// each U column non-negative. Throws NumericalError if the sweep cap is hit.
SvdResult svd(const Matrix& m);

// Rank-r factors plus the residual m - U_r S_r V_r^T.
std::pair<SvdResult, Matrix> truncated_svd(const Matrix& m, Index r);

double nuclear_norm(const Matrix& m);
double spectral_norm(const Matrix& m);
double frobenius_norm(const Matrix& m);

// Singular values of a complex matrix via the real 2n x 2m embedding
// [Re -Im; Im Re] (each complex singular value appears twice).
Vector singular_values(const CMatrix& m);

struct SubspaceBasis {
  explicit SubspaceBasis(Matrix b);

  const Matrix& basis() const { return basis_; }
  Index ambient() const { return basis_.rows(); }
  Index dim() const { return basis_.cols(); }

 private:
  Matrix basis_;
};

// Principal angles in radians, non-increasing (largest angle first).
// cos(theta) are the singular values of a^H b, clamped to [0, 1].
Vector principal_angles(const SubspaceBasis& a, const SubspaceBasis& b);

struct CoherenceProfile {
  Vector mu;   // row coherences, length n
  Vector nu;   // column coherences, length n
  double eta;  // max over both
};

CoherenceProfile coherence_profile(const SubspaceBasis& u, const SubspaceBasis& v);

// Weighted sup norms used by the bound machinery. `r` is the rank entering
// the sqrt(n/(mu_i r)) scale factors.
double weighted_inf_norm(const Matrix& z, const CoherenceProfile& profile, Index r);
double weighted_inf2_norm(const Matrix& z, const CoherenceProfile& profile, Index r);

}  // namespace mcomp
