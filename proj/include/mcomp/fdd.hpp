#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "mcomp/types.hpp"

namespace mcomp::fdd {

// Bessel function of the first kind, order zero. Power series for small
// arguments, Hankel asymptotic expansion beyond; accurate to ~1e-12 absolute
// on [-50, 50].
double bessel_j0(double x);

struct ChannelConfig {
  Index antennas = 20;           // N
  Index users = 4;               // K
  Vector velocities;             // m/s, length K
  double wavelength = 0.1;       // m (3 GHz carrier)
  double spacing = 0.05;         // m, half wavelength
  double orientation = 0.0;      // array orientation, rad
  double t1 = 0.002, t2 = 0.001; // snapshot times, s (t2 <= t1)
  Index scatterers_t1 = 8;       // s(t1)
  Index scatterers_t2 = 8;       // s(t2)
  std::uint64_t seed = 1;

  void validate() const;
};

// Uniform linear array steering vector: entry m is
// exp(j 2 pi d cos(orientation - theta) (m-1) / wavelength).
CVector array_response(double theta, const ChannelConfig& cfg);

struct ChannelSnapshot {
  CMatrix h;                      // N x K, columns are per-user channels
  std::vector<Vector> aod;        // per-user departure angles
  std::vector<Vector> doppler_phi;// per-user Doppler angles
  std::vector<Vector> beta;       // per-user random phases
};

struct DrawOptions {
  bool zero_phase = false;  // beta = 0 (used by the cross-user correlation oracle)
};

// One channel snapshot at time t. Scatterer draws are a pure function of
// (seed, draw_index, user, scatterer), so snapshots at t1 and t2 from the
// same seed/draw share their first min(s1, s2) scatterers.
ChannelSnapshot draw_channel(const ChannelConfig& cfg, double t,
                             std::uint64_t draw_index = 0, DrawOptions opts = {});

// Closed-form cross-correlation E[h_k,p(t1) conj(h_l,q(t2))] (model formula;
// p, q are 0-based antenna offsets):
//   k != l: a' J0(2 pi v_k t1 / wl) J0(2 pi v_l t2 / wl) J0(2 pi d p / wl) J0(2 pi d q / wl)
//   k == l: a' J0(2 pi v_k (t1 - t2) / wl) J0(2 pi d (p - q) / wl)
// with a' = min(s(t1), s(t2)) / sqrt(s(t1) s(t2)).
std::complex<double> correlation_entry(const ChannelConfig& cfg, Index k, Index l,
                                       Index p, Index q, double t1, double t2);

struct ExpectedGrams {
  CMatrix gram_col;  // K x K, E[H(t1)^H H(t2)]
  CMatrix gram_row;  // N x N, E[H(t1) H(t2)^H]
};

ExpectedGrams expected_grams(const ChannelConfig& cfg);

// Principal-angle priors from velocities: singular values of the whitened
// grams A^{-1/2} C B^{-1/2} (A, B the same-time grams), clamped to [0, 1],
// arccos'd, sorted non-increasing, truncated to r = min(K, rank) by default.
std::pair<Vector, Vector> prior_angles_from_velocity(const ChannelConfig& cfg,
                                                     Index r = -1);

}  // namespace mcomp::fdd
