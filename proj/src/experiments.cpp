#include "mcomp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mcomp/rng.hpp"

namespace mcomp {

namespace {

using nlohmann::json;

constexpr double kSuccessNre = 1e-4;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

Vector to_vector(const json& arr) {
  Vector v(static_cast<Index>(arr.size()));
  Index i = 0;
  for (const auto& x : arr) v(i++) = x.get<double>();
  return v;
}

json to_json_array(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

std::vector<double> default_sweep() {
  std::vector<double> p;
  for (int k = 10; k <= 90; k += 5) p.push_back(static_cast<double>(k) / 100.0);
  return p;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct ResolvedAngles {
  Vector theta_u, theta_v;  // radians
};

// Angles used for weight design. For the perturbation path the plan carries
// no angles, so a probe instance supplies measured ones (in the canonical
// non-decreasing order used when pairing weights with prior directions).
ResolvedAngles resolve_angles(const ExperimentPlan& plan) {
  if (plan.prior_path == "perturbation") {
    const Instance probe =
        generate_instance(plan, hash_combine(plan.seed, 500000));
    return {Vector(probe.prior.theta_u.reverse()), Vector(probe.prior.theta_v.reverse())};
  }
  Vector u_deg = plan.theta_u_deg, v_deg = plan.theta_v_deg;
  if (!plan.preset.empty()) std::tie(u_deg, v_deg) = resolve_preset(plan.preset);
  return {u_deg.unaryExpr([](double d) { return deg2rad(d); }),
          v_deg.unaryExpr([](double d) { return deg2rad(d); })};
}

}  // namespace

void ExperimentPlan::validate() const {
  if (n < 2 || r < 1 || r > r_prime || r + r_prime > n)
    throw std::invalid_argument("ExperimentPlan: need 1 <= r <= r' and r + r' <= n");
  if (trials < 1) throw std::invalid_argument("ExperimentPlan: trials must be >= 1");
  for (double p : p_sweep)
    if (!(p > 0.0 && p <= 1.0))
      throw std::invalid_argument("ExperimentPlan: p values must lie in (0, 1]");
  if (methods.empty()) throw std::invalid_argument("ExperimentPlan: no methods selected");
  for (const auto& m : methods)
    if (m != "standard" && m != "single" && m != "multi")
      throw std::invalid_argument("ExperimentPlan: unknown method " + m);
  if (prior_path != "angles" && prior_path != "perturbation")
    throw std::invalid_argument("ExperimentPlan: unknown prior path " + prior_path);
  if (prior_path == "angles") {
    Vector u = theta_u_deg, v = theta_v_deg;
    if (!preset.empty()) std::tie(u, v) = resolve_preset(preset);
    if (u.size() != r || v.size() != r)
      throw std::invalid_argument("ExperimentPlan: need r angles per side");
    for (Index i = 0; i < r; ++i)
      if (!(u(i) >= 0 && u(i) <= 90.0 && v(i) >= 0 && v(i) <= 90.0))
        throw std::invalid_argument("ExperimentPlan: angles must lie in [0, 90] degrees");
  }
  if (noise_e < 0.0) throw std::invalid_argument("ExperimentPlan: noise level must be >= 0");
}

std::pair<Vector, Vector> resolve_preset(const std::string& name) {
  auto vec = [](std::initializer_list<double> xs) {
    Vector v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
  };
  if (name == "fig1" || name == "mixed")
    return {vec({2.01, 8.28, 15.55, 20.26}), vec({2.09, 10.50, 19.45, 22.00})};
  if (name == "fig2" || name == "good")
    return {vec({1.32, 1.72, 2.11, 3.07}), vec({1.08, 1.70, 2.37, 2.73})};
  if (name == "fig3" || name == "poor")
    return {vec({40.87, 49.63, 50.55, 69.39}), vec({28.76, 37.83, 40.52, 63.65})};
  throw std::invalid_argument("resolve_preset: unknown preset " + name);
}

ExperimentPlan plan_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("plan: JSON parse error: ") + e.what());
  }
  ExperimentPlan plan;
  plan.n = j.value("n", plan.n);
  plan.r = j.value("r", plan.r);
  plan.r_prime = j.value("r_prime", plan.r_prime);
  plan.preset = j.value("preset", plan.preset);
  if (j.contains("theta_u_deg")) plan.theta_u_deg = to_vector(j["theta_u_deg"]);
  if (j.contains("theta_v_deg")) plan.theta_v_deg = to_vector(j["theta_v_deg"]);
  plan.perturbation_variance = j.value("perturbation_variance", plan.perturbation_variance);
  if (j.contains("p_sweep"))
    plan.p_sweep = j["p_sweep"].get<std::vector<double>>();
  plan.trials = j.value("trials", plan.trials);
  if (j.contains("methods")) plan.methods = j["methods"].get<std::vector<std::string>>();
  plan.noise_e = j.value("noise_e", plan.noise_e);
  plan.seed = j.value("seed", plan.seed);
  plan.out_dir = j.value("out_dir", plan.out_dir);
  plan.workers = j.value("workers", plan.workers);
  plan.prior_path = j.value("prior_path", plan.prior_path);
  if (j.contains("solve")) {
    const json& s = j["solve"];
    plan.solve.max_iters = s.value("max_iters", plan.solve.max_iters);
    plan.solve.tol_rel = s.value("tol_rel", plan.solve.tol_rel);
    plan.solve.rho = s.value("rho", plan.solve.rho);
  }
  if (plan.p_sweep.empty()) plan.p_sweep = default_sweep();
  plan.validate();
  return plan;
}

std::string plan_to_json(const ExperimentPlan& plan) {
  json j;
  j["n"] = plan.n;
  j["r"] = plan.r;
  j["r_prime"] = plan.r_prime;
  if (!plan.preset.empty()) j["preset"] = plan.preset;
  j["theta_u_deg"] = to_json_array(plan.theta_u_deg);
  j["theta_v_deg"] = to_json_array(plan.theta_v_deg);
  j["perturbation_variance"] = plan.perturbation_variance;
  j["p_sweep"] = plan.p_sweep;
  j["trials"] = plan.trials;
  j["methods"] = plan.methods;
  j["noise_e"] = plan.noise_e;
  j["seed"] = plan.seed;
  j["out_dir"] = plan.out_dir;
  j["workers"] = plan.workers;
  j["prior_path"] = plan.prior_path;
  j["solve"] = {{"max_iters", plan.solve.max_iters},
                {"tol_rel", plan.solve.tol_rel},
                {"rho", plan.solve.rho}};
  return j.dump(2);
}

fdd::ChannelConfig channel_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("channel config: JSON parse error: ") + e.what());
  }
  fdd::ChannelConfig cfg;
  cfg.antennas = j.value("antennas", cfg.antennas);
  cfg.users = j.value("users", cfg.users);
  if (j.contains("velocities")) cfg.velocities = to_vector(j["velocities"]);
  else cfg.velocities = Vector::Zero(cfg.users);
  cfg.wavelength = j.value("wavelength", cfg.wavelength);
  cfg.spacing = j.value("spacing", cfg.spacing);
  cfg.orientation = j.value("orientation", cfg.orientation);
  cfg.t1 = j.value("t1", cfg.t1);
  cfg.t2 = j.value("t2", cfg.t2);
  cfg.scatterers_t1 = j.value("scatterers_t1", cfg.scatterers_t1);
  cfg.scatterers_t2 = j.value("scatterers_t2", cfg.scatterers_t2);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

Instance generate_instance(const ExperimentPlan& plan, std::uint64_t trial_seed) {
  plan.validate();
  if (plan.prior_path == "angles") {
    const ResolvedAngles angles = resolve_angles(plan);
    PriorModel model =
        make_prior_model(angles.theta_u, angles.theta_v, plan.r_prime, plan.n, trial_seed);
    Rng rng(hash_combine(trial_seed, 99));
    const Matrix core = gaussian_matrix(plan.r, plan.r, rng);
    Matrix x = model.u_true.basis() * core * model.v_true.basis().transpose();
    return {std::move(x), std::move(model)};
  }
  // Perturbation path: prior = leading r' singular subspaces of X + N.
  Rng rng(hash_combine(trial_seed, 98));
  const Matrix g1 = gaussian_matrix(plan.n, plan.r, rng);
  const Matrix g2 = gaussian_matrix(plan.n, plan.r, rng);
  Matrix x = g1 * g2.transpose();
  const Matrix noise =
      std::sqrt(plan.perturbation_variance) * gaussian_matrix(plan.n, plan.n, rng);
  const SvdResult truth = svd(x);
  const SvdResult pert = svd(x + noise);
  SubspaceBasis u_true(truth.u.leftCols(plan.r));
  SubspaceBasis v_true(truth.v.leftCols(plan.r));
  SubspaceBasis u_prior(pert.u.leftCols(plan.r_prime));
  SubspaceBasis v_prior(pert.v.leftCols(plan.r_prime));
  Vector theta_u = principal_angles(u_true, u_prior);
  Vector theta_v = principal_angles(v_true, v_prior);
  PriorModel model{std::move(u_true), std::move(v_true), std::move(u_prior),
                   std::move(v_prior), std::move(theta_u), std::move(theta_v)};
  return {std::move(x), std::move(model)};
}

namespace {

// Q factors for the multi-weight method. The angle path constructs the prior
// with column i at angle theta_i, so weights pair positionally; the
// perturbation path first rotates the prior into the canonical joint-basis
// order (angles non-decreasing) to match the weight ordering.
QMatrix multi_q(const ExperimentPlan& plan, const SubspaceBasis& truth,
                const SubspaceBasis& prior, const Vector& diag) {
  if (plan.prior_path == "angles") return build_q(prior, diag);
  const JointBases jb = build_joint_bases(truth, prior);
  return build_q(SubspaceBasis(jb.u_prior_canon), diag);
}

}  // namespace

PhaseResult run_phase_transition(const ExperimentPlan& plan_in) {
  ExperimentPlan plan = plan_in;
  if (plan.p_sweep.empty()) plan.p_sweep = default_sweep();
  plan.validate();

  PhaseResult result;
  result.plan = plan;
  const ResolvedAngles angles = resolve_angles(plan);
  result.theta_u = angles.theta_u;
  result.theta_v = angles.theta_v;

  // Weight design happens once per plan, from angles only (coherence terms 1).
  for (const auto& method : plan.methods) {
    MethodWeights mw;
    mw.method = method;
    const WeightMode mode = method == "multi"    ? WeightMode::multi
                            : method == "single" ? WeightMode::single
                                                 : WeightMode::none;
    mw.search = optimize_weights(angles.theta_u, angles.theta_v, 1.0, 1.0, plan.n,
                                 plan.r, plan.r_prime, mode);
    const double lam = method == "single" ? mw.search.weights.lambda1(0) : 1.0;
    const double gam = method == "single" ? mw.search.weights.gamma1(0) : 1.0;
    mw.single_alphas = alpha456(angles.theta_u.maxCoeff(), angles.theta_v.maxCoeff(), lam, gam);
    result.weights.push_back(std::move(mw));
  }

  const std::size_t n_methods = plan.methods.size();
  const std::size_t n_p = plan.p_sweep.size();
  const std::size_t n_trials = static_cast<std::size_t>(plan.trials);
  result.records.resize(n_methods * n_p * n_trials);

  std::atomic<std::size_t> next_task{0};
  std::atomic<bool> failed{false};
  std::string failure_message;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t task = next_task.fetch_add(1);
      if (task >= n_p * n_trials || failed.load()) return;
      const std::size_t ip = task / n_trials;
      const std::size_t trial = task % n_trials;
      try {
        const double p = plan.p_sweep[ip];
        const std::uint64_t trial_seed = hash_combine(plan.seed, 500000 + trial);
        const Instance inst = generate_instance(plan, trial_seed);
        const std::uint64_t mask_seed =
            hash_combine(hash_combine(plan.seed, 1000 + ip), trial);
        const SampleMask mask = draw_mask(plan.n, p, mask_seed);

        Matrix observed = inst.x;
        SolveOptions opts = plan.solve;
        if (plan.noise_e > 0.0) {
          Rng nrng(hash_combine(trial_seed, 77));
          Matrix e = gaussian_matrix(plan.n, plan.n, nrng);
          const double scale = apply_r_omega(e, mask).norm();
          if (scale > 0.0) e *= plan.noise_e / scale;
          observed += e;
          opts.mode = ConstraintMode::ball;
          opts.noise_bound = plan.noise_e;
        }
        const Matrix y = apply_r_omega(observed, mask);

        for (std::size_t mi = 0; mi < n_methods; ++mi) {
          const auto& mw = result.weights[mi];
          const auto start = std::chrono::steady_clock::now();
          SolveReport rep;
          if (mw.method == "standard") {
            rep = solve_standard(y, mask, opts);
          } else if (mw.method == "single") {
            rep = solve_single_weight(y, mask, inst.prior.u_prior, inst.prior.v_prior,
                                      mw.search.weights.lambda1(0),
                                      mw.search.weights.gamma1(0), opts);
          } else {
            const QMatrix qu = multi_q(plan, inst.prior.u_true, inst.prior.u_prior,
                                       mw.search.weights.lambda_diag());
            const QMatrix qv = multi_q(plan, inst.prior.v_true, inst.prior.v_prior,
                                       mw.search.weights.gamma_diag());
            rep = solve_weighted(y, mask, qu, qv, opts);
          }
          const auto stop = std::chrono::steady_clock::now();
          TrialRecord rec;
          rec.method = mw.method;
          rec.p = p;
          rec.trial = static_cast<int>(trial);
          rec.nre_value = nre(rep.x_hat, inst.x);
          rec.success = rec.nre_value < kSuccessNre;
          rec.iters = rep.iters;
          rec.converged = rep.converged;
          rec.wall_ms =
              std::chrono::duration<double, std::milli>(stop - start).count();
          result.records[(ip * n_trials + trial) * n_methods + mi] = std::move(rec);
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failed.exchange(true)) failure_message = e.what();
        return;
      }
    }
  };

  unsigned int n_workers = plan.workers > 0
                               ? static_cast<unsigned int>(plan.workers)
                               : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned int>(n_workers, static_cast<unsigned int>(n_p * n_trials));
  std::vector<std::thread> pool;
  for (unsigned int i = 0; i + 1 < n_workers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failed.load()) throw std::runtime_error("run_phase_transition: " + failure_message);

  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    for (std::size_t ip = 0; ip < n_p; ++ip) {
      Aggregate agg;
      agg.method = plan.methods[mi];
      agg.p = plan.p_sweep[ip];
      agg.trials = plan.trials;
      std::vector<double> nres;
      double iter_sum = 0.0;
      for (std::size_t t = 0; t < n_trials; ++t) {
        const TrialRecord& rec = result.records[(ip * n_trials + t) * n_methods + mi];
        if (rec.success) ++agg.successes;
        nres.push_back(rec.nre_value);
        iter_sum += rec.iters;
      }
      agg.success_rate = static_cast<double>(agg.successes) / static_cast<double>(plan.trials);
      agg.median_nre = median(std::move(nres));
      agg.mean_iters = iter_sum / static_cast<double>(plan.trials);
      result.aggregates.push_back(std::move(agg));
    }
  }
  return result;
}

PhaseResult run_fdd_pipeline(const fdd::ChannelConfig& cfg, ExperimentPlan plan) {
  auto [theta_u, theta_v] = fdd::prior_angles_from_velocity(cfg);
  const Index r = std::min(theta_u.size(), theta_v.size());
  if (r < 1) throw std::invalid_argument("run_fdd_pipeline: no usable prior angles");
  plan.prior_path = "angles";
  plan.preset.clear();
  plan.r = r;
  plan.theta_u_deg = theta_u.head(r).unaryExpr([](double t) { return rad2deg(t); });
  plan.theta_v_deg = theta_v.head(r).unaryExpr([](double t) { return rad2deg(t); });
  if (plan.r_prime < plan.r || plan.r + plan.r_prime > plan.n)
    plan.r_prime = std::min(plan.r + 4, plan.n - plan.r);
  return run_phase_transition(plan);
}

void emit_csv(const PhaseResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  out << std::setprecision(17);
  out << "method,p,trials,successes,success_rate,median_nre,mean_iters\n";
  for (const auto& a : result.aggregates) {
    out << a.method << "," << a.p << "," << a.trials << "," << a.successes << ","
        << a.success_rate << "," << a.median_nre << "," << a.mean_iters << "\n";
    if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
  }
}

void emit_json(const PhaseResult& result, const std::string& path) {
  json j;
  j["plan"] = json::parse(plan_to_json(result.plan));
  j["theta_u_rad"] = to_json_array(result.theta_u);
  j["theta_v_rad"] = to_json_array(result.theta_v);
  json weights = json::array();
  for (const auto& mw : result.weights) {
    json w;
    w["method"] = mw.method;
    w["lambda1"] = to_json_array(mw.search.weights.lambda1);
    w["lambda2"] = to_json_array(mw.search.weights.lambda2);
    w["gamma1"] = to_json_array(mw.search.weights.gamma1);
    w["gamma2"] = to_json_array(mw.search.weights.gamma2);
    w["alpha1"] = mw.search.report.alpha1;
    w["alpha2"] = mw.search.report.alpha2;
    w["alpha3"] = mw.search.report.alpha3;
    w["alpha4"] = mw.single_alphas.alpha4;
    w["alpha5"] = mw.single_alphas.alpha5;
    w["alpha6"] = mw.single_alphas.alpha6;
    w["p_lower"] = mw.search.report.p_lower;
    w["feasible"] = mw.search.feasible;
    weights.push_back(std::move(w));
  }
  j["weights"] = std::move(weights);
  json records = json::array();
  for (const auto& rec : result.records) {
    records.push_back({{"method", rec.method},
                       {"p", rec.p},
                       {"trial", rec.trial},
                       {"nre", rec.nre_value},
                       {"success", rec.success},
                       {"iters", rec.iters},
                       {"converged", rec.converged}});
  }
  j["records"] = std::move(records);
  json aggs = json::array();
  for (const auto& a : result.aggregates) {
    aggs.push_back({{"method", a.method},
                    {"p", a.p},
                    {"trials", a.trials},
                    {"successes", a.successes},
                    {"success_rate", a.success_rate},
                    {"median_nre", a.median_nre},
                    {"mean_iters", a.mean_iters}});
  }
  j["aggregates"] = std::move(aggs);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_json: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("emit_json: write failed for " + path);
}

std::vector<Aggregate> parse_aggregates_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_aggregates_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "method,p,trials,successes,success_rate,median_nre,mean_iters")
    throw std::runtime_error("parse_aggregates_csv: bad header in " + path);
  std::vector<Aggregate> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    Aggregate a;
    std::string field;
    std::getline(row, a.method, ',');
    std::getline(row, field, ',');
    a.p = std::stod(field);
    std::getline(row, field, ',');
    a.trials = std::stoi(field);
    std::getline(row, field, ',');
    a.successes = std::stoi(field);
    std::getline(row, field, ',');
    a.success_rate = std::stod(field);
    std::getline(row, field, ',');
    a.median_nre = std::stod(field);
    std::getline(row, field, ',');
    a.mean_iters = std::stod(field);
    out.push_back(std::move(a));
  }
  return out;
}

std::string default_csv_name(const ExperimentPlan& plan) {
  if (plan.preset == "fig1" || plan.preset == "mixed") return "fig1.csv";
  if (plan.preset == "fig2" || plan.preset == "good") return "fig2.csv";
  if (plan.preset == "fig3" || plan.preset == "poor") return "fig3.csv";
  return "results.csv";
}

}  // namespace mcomp
