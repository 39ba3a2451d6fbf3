#pragma once

#include <cstdint>
#include <string>

#include "mcomp/types.hpp"

namespace mcomp {

// Bernoulli observation pattern plus the per-entry observation probabilities.
struct SampleMask {
  Index n = 0;
  Eigen::MatrixXi eps;  // indicators in {0,1}
  Matrix prob;          // probabilities in (0,1]
  std::uint64_t seed = 0;
};

// Each entry observed independently with probability prob(i,l); the draw is
// a pure function of (seed, i, l) so identical seeds give identical masks.
SampleMask draw_mask(Index n, double prob, std::uint64_t seed);
SampleMask draw_mask(Index n, const Matrix& prob, std::uint64_t seed);

// Inverse-probability-scaled sampling: (eps_il / p_il) * z_il.
Matrix apply_r_omega(const Matrix& z, const SampleMask& mask);

// Plain projection: eps_il * z_il.
Matrix apply_p_omega(const Matrix& z, const SampleMask& mask);

struct AdjointReport {
  double max_asymmetry = 0.0;
  bool symmetric = false;  // max_asymmetry <= 1e-10 (relative)
};

// Verifies <A, R(B)> = <R(A), B> on random pairs drawn from check_seed.
AdjointReport self_adjointness_check(const SampleMask& mask, int pairs = 3,
                                     std::uint64_t check_seed = 7);

// CSV serialization: "i,l,p" triplets of observed entries plus an n/seed
// header comment. Round trips eps, prob (observed entries) and seed.
void save_mask_csv(const SampleMask& mask, const std::string& path);
SampleMask load_mask_csv(const std::string& path);

}  // namespace mcomp
