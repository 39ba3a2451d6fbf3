#include "mcomp/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace mcomp {

namespace {

// Side-specific pieces of the alpha expressions (u side shown; v side is the
// same with gamma/theta_v).
struct SideTerms {
  double max_f1f2_sq = 0;   // max_i f1^2/f2^2 (lambda1_i, theta_i)
  double max_f2_sq = 0;     // max_i f2^2 (lambda1_i, theta_i)
  double max_ratio_sq = 0;  // max_i f2^2(1-lambda1_i^2, theta_i) / f2^2(lambda1_i, theta_i)
  double dev = 0;           // max{max_i(lambda2_i - 1), max_i(lambda1_i/f2_i - 1)}
};

SideTerms side_terms(const Vector& theta, const Vector& w1, const Vector& w2) {
  SideTerms t;
  Vector w1_over_f2(w1.size());
  for (Index i = 0; i < theta.size(); ++i) {
    const double a = f1(w1(i), theta(i));
    const double b = f2(w1(i), theta(i));
    const double c = f2(1.0 - w1(i) * w1(i), theta(i));
    t.max_f1f2_sq = std::max(t.max_f1f2_sq, (a * a) / (b * b));
    t.max_f2_sq = std::max(t.max_f2_sq, b * b);
    t.max_ratio_sq = std::max(t.max_ratio_sq, (c * c) / (b * b));
    w1_over_f2(i) = w1(i) / b;
  }
  const double dev1 = (w1_over_f2.array() - 1.0).maxCoeff();
  t.dev = w2.size() > 0 ? std::max((w2.array() - 1.0).maxCoeff(), dev1) : dev1;
  return t;
}

double p_lower_formula(double alpha_log, double alpha_sq, double eta_x, double eta_breve,
                       Index n, Index r) {
  const double nn = static_cast<double>(n);
  const double logn = std::log(nn);
  return std::max(std::log(alpha_log * nn), 1.0) * (eta_x * static_cast<double>(r) * logn / nn) *
         std::max(alpha_sq * alpha_sq * (1.0 + eta_breve / eta_x), 1.0);
}

}  // namespace

BoundReport alpha123(const BoundInputs& in) {
  if (in.theta_u.size() != in.weights.r() || in.theta_v.size() != in.weights.r())
    throw std::invalid_argument("alpha123: angle/weight length mismatch");
  if (in.n < 2 || in.r < 1 || in.r_prime < in.r)
    throw std::invalid_argument("alpha123: invalid dimensions");

  const SideTerms u = side_terms(in.theta_u, in.weights.lambda1, in.weights.lambda2);
  const SideTerms v = side_terms(in.theta_v, in.weights.gamma1, in.weights.gamma2);

  BoundReport rep;
  rep.alpha1 = std::sqrt(u.max_f1f2_sq * v.max_f1f2_sq);
  rep.alpha2 = std::sqrt(u.max_f2_sq * v.max_f1f2_sq) + std::sqrt(v.max_f2_sq * u.max_f1f2_sq);
  rep.alpha3 = std::sqrt(u.max_ratio_sq) * std::sqrt(v.max_ratio_sq) - u.dev - v.dev;
  rep.p_lower = p_lower_formula(rep.alpha1, rep.alpha2, in.eta_x, in.eta_breve, in.n, in.r);
  rep.feasible = rep.alpha3 <= 0.25;
  return rep;
}

SingleAlphas alpha456(double theta_u1, double theta_v1, double lambda, double gamma) {
  if (!(lambda > 0.0 && lambda <= 1.0 && gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("alpha456: weights must lie in (0, 1]");
  SingleAlphas a;
  const double f2u = f2(lambda, theta_u1), f2v = f2(gamma, theta_v1);
  a.alpha4 = f1(gamma, theta_u1) * f1(lambda, theta_v1) / (f2u * f2v);
  a.alpha5 = (f2u / f2v + f2v / f2u) * (f1(lambda, theta_u1) + f1(gamma, theta_v1));
  a.alpha6 = 1.5 * (std::sqrt(1.0 - lambda * lambda) * std::sin(theta_u1) / f2u +
                    std::sqrt(1.0 - gamma * gamma) * std::sin(theta_v1) / f2v);
  a.feasible = a.alpha6 <= 0.125;
  return a;
}

double single_p_lower(const SingleAlphas& a, double eta_x, double eta_breve,
                      Index n, Index r) {
  return p_lower_formula(a.alpha4, a.alpha5, eta_x, eta_breve, n, r);
}

namespace {

struct Candidate {
  Vector lambda1, lambda2, gamma1, gamma2;
  BoundReport report;
};

// Deterministic preference: feasible first, then smaller bound. Ties resolve
// toward the weights closest to all-ones (lexicographically larger): the
// bound is flat in directions like the lambda2 block, and shrinking a weight
// without a bound payoff only biases the estimate for nothing.
bool better(const Candidate& a, const Candidate& b) {
  if (a.report.feasible != b.report.feasible) return a.report.feasible;
  const double scale = std::max({1.0, std::abs(a.report.p_lower), std::abs(b.report.p_lower)});
  if (std::abs(a.report.p_lower - b.report.p_lower) > 1e-12 * scale)
    return a.report.p_lower < b.report.p_lower;
  auto lex = [](const Vector& x, const Vector& y) {
    for (Index i = 0; i < x.size(); ++i)
      if (x(i) != y(i)) return x(i) > y(i) ? -1 : 1;
    return 0;
  };
  for (auto [x, y] : {std::pair{&a.lambda1, &b.lambda1}, std::pair{&a.lambda2, &b.lambda2},
                      std::pair{&a.gamma1, &b.gamma1}, std::pair{&a.gamma2, &b.gamma2}}) {
    const int c = lex(*x, *y);
    if (c != 0) return c < 0;
  }
  return false;
}

}  // namespace

WeightSearchResult optimize_weights(const Vector& theta_u, const Vector& theta_v,
                                    double eta_x, double eta_breve, Index n, Index r,
                                    Index r_prime, WeightMode mode, int grid) {
  if (theta_u.size() != r || theta_v.size() != r)
    throw std::invalid_argument("optimize_weights: angle vectors must have length r");
  if (grid < 2) throw std::invalid_argument("optimize_weights: grid resolution must be >= 2");
  if (r_prime < r || r < 1) throw std::invalid_argument("optimize_weights: need 1 <= r <= r'");

  const double wmin = 0.01, wmax = 1.0;
  const double coarse_step = (wmax - wmin) / static_cast<double>(grid - 1);
  auto evaluate = [&](const Candidate& c) {
    BoundInputs in{theta_u, theta_v, WeightSpec(c.lambda1, c.lambda2, c.gamma1, c.gamma2),
                   eta_x, eta_breve, 1.0, 1.0, n, r, r_prime};
    return alpha123(in);
  };
  auto make_uniform = [&](double lambda, double gamma) {
    Candidate c{Vector::Constant(r, lambda), Vector::Constant(r_prime - r, lambda),
                Vector::Constant(r, gamma), Vector::Constant(r_prime - r, gamma), {}};
    c.report = evaluate(c);
    return c;
  };

  const Candidate ones = make_uniform(1.0, 1.0);
  auto as_result = [&](const Candidate& c, WeightMode m) {
    return WeightSearchResult{WeightSpec(c.lambda1, c.lambda2, c.gamma1, c.gamma2),
                              c.report, m, c.report.feasible};
  };

  if (mode == WeightMode::none) return as_result(ones, WeightMode::none);

  // At all-ones weights alpha3 is at its global minimum over the weight
  // domain, so an infeasible all-ones point means the whole set is infeasible.
  if (!ones.report.feasible) return as_result(ones, mode);

  auto grid_points = [&](double lo, double hi, int count) {
    std::vector<double> pts(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
      pts[static_cast<std::size_t>(k)] =
          lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
    return pts;
  };

  // Uniform (lambda, gamma) scan shared by both remaining modes.
  auto scan_uniform = [&](Candidate best, const std::vector<double>& ls,
                          const std::vector<double>& gs) {
    for (double l : ls)
      for (double g : gs) {
        Candidate c = make_uniform(l, g);
        if (c.report.feasible && better(c, best)) best = c;
      }
    return best;
  };

  const std::vector<double> coarse = grid_points(wmin, wmax, grid);
  Candidate single_best = scan_uniform(ones, coarse, coarse);
  {
    const double l0 = single_best.lambda1(0), g0 = single_best.gamma1(0);
    single_best = scan_uniform(
        single_best,
        grid_points(std::max(wmin, l0 - coarse_step), std::min(wmax, l0 + coarse_step), grid),
        grid_points(std::max(wmin, g0 - coarse_step), std::min(wmax, g0 + coarse_step), grid));
  }
  if (mode == WeightMode::single) return as_result(single_best, WeightMode::single);

  // Multi: coordinate descent over the per-index weights, seeded from the
  // best uniform point.
  Candidate cur = better(single_best, ones) ? single_best : ones;
  auto coords = [&](Candidate& c) {
    std::vector<double*> ptrs;
    for (Index i = 0; i < r; ++i) ptrs.push_back(&c.lambda1(i));
    for (Index i = 0; i < r; ++i) ptrs.push_back(&c.gamma1(i));
    for (Index i = 0; i < r_prime - r; ++i) ptrs.push_back(&c.lambda2(i));
    for (Index i = 0; i < r_prime - r; ++i) ptrs.push_back(&c.gamma2(i));
    return ptrs;
  };
  auto sweep = [&](double step_around, bool around_current) {
    bool improved_any = false;
    const auto ptrs = coords(cur);
    for (double* coord : ptrs) {
      const double saved = *coord;
      std::vector<double> pts =
          around_current ? grid_points(std::max(wmin, saved - step_around),
                                       std::min(wmax, saved + step_around), grid)
                         : coarse;
      Candidate best_here = cur;
      bool improved = false;
      for (double x : pts) {
        *coord = x;
        Candidate trial = cur;
        trial.report = evaluate(trial);
        if (trial.report.feasible && better(trial, best_here)) {
          best_here = trial;
          improved = true;
        }
      }
      *coord = saved;
      if (improved) {
        cur = best_here;
        improved_any = true;
      }
    }
    return improved_any;
  };
  for (int round = 0; round < 20; ++round)
    if (!sweep(0.0, false)) break;
  for (int round = 0; round < 5; ++round)
    if (!sweep(coarse_step, true)) break;

  // Nesting guarantee: never worse than the single-mode incumbent.
  if (better(single_best, cur)) cur = single_best;
  return as_result(cur, WeightMode::multi);
}

}  // namespace mcomp
