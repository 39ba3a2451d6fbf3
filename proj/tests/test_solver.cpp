#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "mcomp/rng.hpp"
#include "mcomp/solver.hpp"

using namespace mcomp;

namespace {

SampleMask manual_mask(Index n, const Eigen::MatrixXi& eps, double p) {
  SampleMask m;
  m.n = n;
  m.eps = eps;
  m.prob = Matrix::Constant(n, n, p);
  m.seed = 0;
  return m;
}

double obs_residual(const Matrix& x, const Matrix& y, const SampleMask& mask) {
  double s = 0.0;
  for (Index i = 0; i < mask.n; ++i)
    for (Index l = 0; l < mask.n; ++l)
      if (mask.eps(i, l)) {
        const double t = y(i, l) - x(i, l) / mask.prob(i, l);
        s += t * t;
      }
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("svt: diagonal shrinkage") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = 1.0;
  const Matrix out = svt(m, 2.0);
  CHECK(out(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(out(1, 1)) < 1e-12);
  CHECK((svt(m, 0.0) - m).norm() == 0.0);
  CHECK(svt(m, 10.0).norm() < 1e-12);
  CHECK_THROWS_AS((void)svt(m, -1.0), std::invalid_argument);
}

TEST_CASE("svt: prox oracle on random input") {
  Rng rng(61);
  const Matrix m = gaussian_matrix(5, 5, rng);
  const double tau = 0.7;
  const Matrix x = svt(m, tau);
  const Eigen::JacobiSVD<Matrix> sm(m), sx(x);
  for (Index i = 0; i < 5; ++i)
    CHECK(sx.singularValues()(i) ==
          doctest::Approx(std::max(sm.singularValues()(i) - tau, 0.0)).epsilon(1e-10));
  auto obj = [&](const Matrix& c) { return tau * nuclear_norm(c) + 0.5 * (c - m).squaredNorm(); };
  const double best = obj(x);
  for (int t = 0; t < 30; ++t) {
    const Matrix cand = x + 0.05 * gaussian_matrix(5, 5, rng);
    CHECK(best <= obj(cand) + 1e-12);
  }
}

TEST_CASE("solver: full observation is exact") {
  Rng rng(71);
  const Matrix x = gaussian_matrix(8, 8, rng);
  const SampleMask mask = draw_mask(8, 1.0, 3);
  const Matrix y = apply_r_omega(x, mask);
  SolveOptions opts;
  opts.max_iters = 500;
  const SolveReport rep = solve_standard(y, mask, opts);
  CHECK(nre(rep.x_hat, x) < 1e-6);
}

TEST_CASE("solver: identity weights match the standard path") {
  Rng rng(81);
  const Matrix x = gaussian_matrix(10, 2, rng) * gaussian_matrix(2, 10, rng);
  const SampleMask mask = draw_mask(10, 0.8, 5);
  const Matrix y = apply_r_omega(x, mask);
  SolveOptions opts;
  opts.max_iters = 400;
  opts.tol_rel = 1e-9;
  const QMatrix id{Matrix::Identity(10, 10), Matrix::Identity(10, 10)};
  const SolveReport a = solve_standard(y, mask, opts);
  const SolveReport b = solve_weighted(y, mask, id, id, opts);
  CHECK((a.x_hat - b.x_hat).norm() < 1e-14);

  const Matrix q = random_orthogonal(10, rng);
  const SubspaceBasis prior(q.leftCols(3));
  const SolveReport c = solve_single_weight(y, mask, prior, prior, 1.0, 1.0, opts);
  CHECK((a.x_hat - c.x_hat).norm() < 1e-12);
}

TEST_CASE("solver: near-unit single weight is continuous with the standard path") {
  Rng rng(91);
  const Matrix x = gaussian_matrix(9, 2, rng) * gaussian_matrix(2, 9, rng);
  const SampleMask mask = draw_mask(9, 0.9, 6);
  const Matrix y = apply_r_omega(x, mask);
  const Matrix q = random_orthogonal(9, rng);
  const SubspaceBasis prior(q.leftCols(3));
  SolveOptions opts;
  opts.max_iters = 3000;
  opts.tol_rel = 1e-10;
  const SolveReport a = solve_standard(y, mask, opts);
  const SolveReport b = solve_single_weight(y, mask, prior, prior, 1.0 - 1e-6, 1.0 - 1e-6, opts);
  CHECK((a.x_hat - b.x_hat).norm() <= 1e-4 * std::max(1.0, a.x_hat.norm()));
}

TEST_CASE("solver: low-rank completion from partial observations") {
  Rng rng(500);
  const Index n = 20;
  const Matrix x = gaussian_matrix(n, 1, rng) * gaussian_matrix(1, n, rng);
  const SampleMask mask = draw_mask(n, 0.7, 900);
  const Matrix y = apply_r_omega(x, mask);
  SolveOptions opts;
  opts.max_iters = 4000;
  opts.tol_rel = 1e-8;
  const SolveReport rep = solve_standard(y, mask, opts);
  CHECK(rep.converged);
  CHECK(nre(rep.x_hat, x) < 1e-4);
  CHECK(obs_residual(rep.x_hat, y, mask) < 1e-8 * x.norm());
}

TEST_CASE("solver: merit is non-increasing") {
  Rng rng(111);
  const Matrix x = gaussian_matrix(12, 2, rng) * gaussian_matrix(2, 12, rng);
  const SampleMask mask = draw_mask(12, 0.6, 23);
  const Matrix y = apply_r_omega(x, mask);
  SolveOptions opts;
  opts.max_iters = 300;
  opts.tol_rel = 1e-14;  // keep iterating; we want the full history
  opts.track_merit = true;
  const SolveReport rep = solve_standard(y, mask, opts);
  REQUIRE(rep.merit_history.size() >= 50);
  for (std::size_t k = 10; k + 1 < rep.merit_history.size(); ++k)
    CHECK(rep.merit_history[k + 1] <= rep.merit_history[k] + 1e-6);
}

TEST_CASE("solver: ball mode satisfies the noise constraint") {
  Rng rng(121);
  const Index n = 12;
  const Matrix x = gaussian_matrix(n, 2, rng) * gaussian_matrix(2, n, rng);
  const SampleMask mask = draw_mask(n, 0.7, 29);
  Matrix y = apply_r_omega(x, mask);
  for (Index i = 0; i < n; ++i)
    for (Index l = 0; l < n; ++l)
      if (mask.eps(i, l)) y(i, l) += 0.01 * rng.gaussian();
  SolveOptions opts;
  opts.mode = ConstraintMode::ball;
  opts.noise_bound = 0.2;
  opts.max_iters = 2000;
  opts.tol_rel = 1e-8;
  const SolveReport rep = solve_standard(y, mask, opts);
  CHECK(obs_residual(rep.x_hat, y, mask) <= opts.noise_bound + 1e-6);
  // A generous ball should leave room to shrink the objective below the
  // equality-constrained value.
  SolveOptions eq = opts;
  eq.mode = ConstraintMode::equality;
  const SolveReport rep_eq = solve_standard(y, mask, eq);
  CHECK(rep.objective <= rep_eq.objective + 1e-3);
}

TEST_CASE("solver: 3x3 one-missing-entry oracle") {
  Rng rng(131);
  const Matrix x = gaussian_matrix(3, 1, rng) * gaussian_matrix(1, 3, rng);
  Eigen::MatrixXi eps = Eigen::MatrixXi::Ones(3, 3);
  eps(2, 2) = 0;
  const SampleMask mask = manual_mask(3, eps, 1.0);
  const Matrix y = apply_r_omega(x, mask);

  Rng qrng(132);
  const Matrix frame = random_orthogonal(3, qrng);
  const QMatrix qu = build_q(SubspaceBasis(frame.leftCols(1)), Vector::Constant(1, 0.4));
  const QMatrix qv = build_q(SubspaceBasis(frame.rightCols(1)), Vector::Constant(1, 0.6));

  auto weighted_obj = [&](double t) {
    Matrix z = x;
    z(2, 2) = t;
    return nuclear_norm(qu.q * z * qv.q);
  };
  double best = std::numeric_limits<double>::infinity();
  for (int k = -4000; k <= 4000; ++k) best = std::min(best, weighted_obj(k * 1e-3));

  SolveOptions opts;
  opts.max_iters = 8000;
  opts.tol_rel = 1e-10;
  const SolveReport rep = solve_weighted(y, mask, qu, qv, opts);
  CHECK(rep.objective <= best + 1e-3);
  CHECK(rep.objective >= best - 1e-3);  // grid minimum is a true lower envelope
}

TEST_CASE("solver: input validation") {
  const SampleMask mask = draw_mask(4, 0.5, 1);
  const Matrix y = Matrix::Zero(4, 4);
  SolveOptions bad;
  bad.max_iters = 0;
  CHECK_THROWS_AS((void)solve_standard(y, mask, bad), std::invalid_argument);
  QMatrix broken{Matrix::Identity(4, 4), 2.0 * Matrix::Identity(4, 4)};
  CHECK_THROWS_AS((void)solve_weighted(y, mask, broken, broken, SolveOptions{}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)solve_standard(Matrix::Zero(3, 3), mask, SolveOptions{}),
                  std::invalid_argument);
}

TEST_CASE("nre: scale and degeneracy") {
  Rng rng(141);
  const Matrix x = gaussian_matrix(5, 5, rng);
  CHECK(nre(x, x) == 0.0);
  CHECK(nre(2.0 * x, x) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nre(Matrix::Zero(5, 5), x) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)nre(x, Matrix::Zero(5, 5)), std::invalid_argument);
}

TEST_CASE("report_to_json: small matrices embed the estimate") {
  SolveReport rep;
  rep.x_hat = Matrix::Identity(2, 2);
  rep.iters = 3;
  rep.converged = true;
  const std::string j = report_to_json(rep);
  CHECK(j.find("\"x_hat\"") != std::string::npos);
  CHECK(j.find("\"converged\": true") != std::string::npos);
  rep.x_hat = Matrix::Zero(65, 65);
  CHECK(report_to_json(rep).find("x_hat") == std::string::npos);
}
