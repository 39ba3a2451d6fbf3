#include "mcomp/fdd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mcomp/linalg.hpp"
#include "mcomp/rng.hpp"

namespace mcomp::fdd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double j0_series(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 60; ++k) {
    term *= -q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (std::abs(term) < 1e-18) break;
  }
  return sum;
}

// Hankel asymptotic expansion, truncated at the smallest term.
double j0_asymptotic(double x) {
  const double chi = x - 0.25 * std::numbers::pi;
  double a = 1.0;  // a_m, the magnitude of successive expansion terms
  double p = 1.0, q = 0.0;
  int sign = 1;
  for (int m = 1; m <= 24; ++m) {
    const double next = a * std::pow(2.0 * m - 1.0, 2) / (static_cast<double>(m) * 8.0 * x);
    if (next > a) break;  // divergence onset of the asymptotic series
    a = next;
    if (m % 2 == 1) {
      q += (m % 4 == 1 ? -1.0 : 1.0) * a;
    } else {
      sign = (m % 4 == 0) ? 1 : -1;
      p += sign * a;
    }
    if (a < 1e-18) break;
  }
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

// Moore-Penrose inverse square root of a real symmetric PSD matrix.
Matrix pinv_sqrt(const Matrix& m) {
  const SvdResult dec = svd(m);
  const double tol = 1e-12 * std::max(dec.sigma(0), 1e-300);
  Vector inv(dec.sigma.size());
  for (Index i = 0; i < inv.size(); ++i)
    inv(i) = dec.sigma(i) > tol ? 1.0 / std::sqrt(dec.sigma(i)) : 0.0;
  return dec.u * inv.asDiagonal() * dec.u.transpose();
}

Index numerical_rank(const Matrix& m) {
  const SvdResult dec = svd(m);
  const double tol = 1e-12 * std::max(dec.sigma(0), 1e-300);
  Index rank = 0;
  for (Index i = 0; i < dec.sigma.size(); ++i)
    if (dec.sigma(i) > tol) ++rank;
  return rank;
}

double alpha_prime(Index s1, Index s2) {
  return static_cast<double>(std::min(s1, s2)) /
         std::sqrt(static_cast<double>(s1) * static_cast<double>(s2));
}

// Real-valued expected gram E[H(ta)^H H(tb)] assembled from the correlation
// closed form with the given scatterer counts.
Matrix gram_col_at(const ChannelConfig& cfg, double ta, double tb, Index sa, Index sb) {
  const double ap = alpha_prime(sa, sb);
  const double wl = cfg.wavelength;
  double spatial_sq = 0.0;
  for (Index p = 0; p < cfg.antennas; ++p) {
    const double v = bessel_j0(kTwoPi * cfg.spacing * static_cast<double>(p) / wl);
    spatial_sq += v * v;
  }
  Matrix g(cfg.users, cfg.users);
  for (Index k = 0; k < cfg.users; ++k)
    for (Index l = 0; l < cfg.users; ++l) {
      if (k == l) {
        g(k, l) = static_cast<double>(cfg.antennas) * ap *
                  bessel_j0(kTwoPi * cfg.velocities(k) * (ta - tb) / wl);
      } else {
        g(k, l) = ap * bessel_j0(kTwoPi * cfg.velocities(k) * ta / wl) *
                  bessel_j0(kTwoPi * cfg.velocities(l) * tb / wl) * spatial_sq;
      }
    }
  return g;
}

Matrix gram_row_at(const ChannelConfig& cfg, double ta, double tb, Index sa, Index sb) {
  const double ap = alpha_prime(sa, sb);
  const double wl = cfg.wavelength;
  double doppler_sum = 0.0;
  for (Index k = 0; k < cfg.users; ++k)
    doppler_sum += bessel_j0(kTwoPi * cfg.velocities(k) * (ta - tb) / wl);
  Matrix g(cfg.antennas, cfg.antennas);
  for (Index p = 0; p < cfg.antennas; ++p)
    for (Index q = 0; q < cfg.antennas; ++q)
      g(p, q) = ap * doppler_sum *
                bessel_j0(kTwoPi * cfg.spacing * static_cast<double>(p - q) / wl);
  return g;
}

Vector whitened_angles(const Matrix& a, const Matrix& c, const Matrix& b, Index r) {
  const Matrix w = pinv_sqrt(a) * c * pinv_sqrt(b);
  Vector cosines = svd(w).sigma;  // non-increasing
  const Index rank = std::min({numerical_rank(a), numerical_rank(b), cosines.size()});
  const Index keep = std::min(r, rank);
  Vector theta(keep);
  for (Index i = 0; i < keep; ++i)
    theta(i) = std::acos(std::clamp(cosines(i), 0.0, 1.0));
  return theta.reverse();  // non-increasing angles
}

}  // namespace

double bessel_j0(double x) {
  const double ax = std::abs(x);
  return ax < 16.0 ? j0_series(ax) : j0_asymptotic(ax);
}

void ChannelConfig::validate() const {
  if (antennas < 1 || users < 1) throw std::invalid_argument("ChannelConfig: N, K >= 1");
  if (velocities.size() != users)
    throw std::invalid_argument("ChannelConfig: need one velocity per user");
  if (velocities.minCoeff() < 0.0)
    throw std::invalid_argument("ChannelConfig: velocities must be >= 0");
  if (!(wavelength > 0.0) || !(spacing > 0.0))
    throw std::invalid_argument("ChannelConfig: wavelength and spacing must be > 0");
  if (scatterers_t1 < 1 || scatterers_t2 < 1)
    throw std::invalid_argument("ChannelConfig: scatterer counts must be >= 1");
  if (t2 > t1) throw std::invalid_argument("ChannelConfig: need t2 <= t1");
}

CVector array_response(double theta, const ChannelConfig& cfg) {
  CVector a(cfg.antennas);
  const double phase =
      kTwoPi * cfg.spacing * std::cos(cfg.orientation - theta) / cfg.wavelength;
  for (Index m = 0; m < cfg.antennas; ++m)
    a(m) = std::polar(1.0, phase * static_cast<double>(m));
  return a;
}

ChannelSnapshot draw_channel(const ChannelConfig& cfg, double t,
                             std::uint64_t draw_index, DrawOptions opts) {
  cfg.validate();
  const Index s = (std::abs(t - cfg.t2) < std::abs(t - cfg.t1)) ? cfg.scatterers_t2
                                                                : cfg.scatterers_t1;
  ChannelSnapshot snap;
  snap.h.resize(cfg.antennas, cfg.users);
  snap.aod.resize(static_cast<std::size_t>(cfg.users));
  snap.doppler_phi.resize(static_cast<std::size_t>(cfg.users));
  snap.beta.resize(static_cast<std::size_t>(cfg.users));
  const double norm = 1.0 / std::sqrt(static_cast<double>(cfg.antennas * s));
  for (Index k = 0; k < cfg.users; ++k) {
    auto& aod = snap.aod[static_cast<std::size_t>(k)];
    auto& phi = snap.doppler_phi[static_cast<std::size_t>(k)];
    auto& beta = snap.beta[static_cast<std::size_t>(k)];
    aod.resize(s);
    phi.resize(s);
    beta.resize(s);
    CVector h = CVector::Zero(cfg.antennas);
    for (Index i = 0; i < s; ++i) {
      // Scatterer draws depend only on (seed, draw, user, scatterer), so the
      // first min(s(t1), s(t2)) scatterers are shared between snapshots.
      Rng rng(hash_combine(hash_combine(hash_combine(cfg.seed, draw_index),
                                        static_cast<std::uint64_t>(k)),
                           static_cast<std::uint64_t>(i)));
      aod(i) = rng.uniform(-std::numbers::pi, std::numbers::pi);
      phi(i) = rng.uniform(-std::numbers::pi, std::numbers::pi);
      beta(i) = opts.zero_phase ? 0.0 : rng.uniform(-std::numbers::pi, std::numbers::pi);
      const double doppler = cfg.velocities(k) * std::cos(phi(i)) / cfg.wavelength;
      const std::complex<double> gain = std::polar(1.0, kTwoPi * doppler * t + beta(i));
      h += gain * array_response(aod(i), cfg);
    }
    snap.h.col(k) = norm * h;
  }
  return snap;
}

std::complex<double> correlation_entry(const ChannelConfig& cfg, Index k, Index l,
                                       Index p, Index q, double t1, double t2) {
  cfg.validate();
  if (k < 0 || k >= cfg.users || l < 0 || l >= cfg.users || p < 0 || p >= cfg.antennas ||
      q < 0 || q >= cfg.antennas)
    throw std::invalid_argument("correlation_entry: index out of range");
  const double ap = alpha_prime(cfg.scatterers_t1, cfg.scatterers_t2);
  const double wl = cfg.wavelength;
  double value;
  if (k == l) {
    value = ap * bessel_j0(kTwoPi * cfg.velocities(k) * (t1 - t2) / wl) *
            bessel_j0(kTwoPi * cfg.spacing * static_cast<double>(p - q) / wl);
  } else {
    value = ap * bessel_j0(kTwoPi * cfg.velocities(k) * t1 / wl) *
            bessel_j0(kTwoPi * cfg.velocities(l) * t2 / wl) *
            bessel_j0(kTwoPi * cfg.spacing * static_cast<double>(p) / wl) *
            bessel_j0(kTwoPi * cfg.spacing * static_cast<double>(q) / wl);
  }
  return {value, 0.0};
}

ExpectedGrams expected_grams(const ChannelConfig& cfg) {
  cfg.validate();
  ExpectedGrams g;
  g.gram_col = gram_col_at(cfg, cfg.t1, cfg.t2, cfg.scatterers_t1, cfg.scatterers_t2)
                   .cast<std::complex<double>>();
  g.gram_row = gram_row_at(cfg, cfg.t1, cfg.t2, cfg.scatterers_t1, cfg.scatterers_t2)
                   .cast<std::complex<double>>();
  return g;
}

std::pair<Vector, Vector> prior_angles_from_velocity(const ChannelConfig& cfg, Index r) {
  cfg.validate();
  if (r < 0) r = cfg.users;
  const Matrix c_col = gram_col_at(cfg, cfg.t1, cfg.t2, cfg.scatterers_t1, cfg.scatterers_t2);
  const Matrix a_col = gram_col_at(cfg, cfg.t1, cfg.t1, cfg.scatterers_t1, cfg.scatterers_t1);
  const Matrix b_col = gram_col_at(cfg, cfg.t2, cfg.t2, cfg.scatterers_t2, cfg.scatterers_t2);
  const Matrix c_row = gram_row_at(cfg, cfg.t1, cfg.t2, cfg.scatterers_t1, cfg.scatterers_t2);
  const Matrix a_row = gram_row_at(cfg, cfg.t1, cfg.t1, cfg.scatterers_t1, cfg.scatterers_t1);
  const Matrix b_row = gram_row_at(cfg, cfg.t2, cfg.t2, cfg.scatterers_t2, cfg.scatterers_t2);
  Vector theta_u = whitened_angles(a_row, c_row, b_row, std::min(r, cfg.users));
  Vector theta_v = whitened_angles(a_col, c_col, b_col, std::min(r, cfg.users));
  return {std::move(theta_u), std::move(theta_v)};
}

}  // namespace mcomp::fdd
