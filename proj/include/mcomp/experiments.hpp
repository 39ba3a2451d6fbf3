#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mcomp/fdd.hpp"
#include "mcomp/solver.hpp"
#include "mcomp/weights.hpp"

namespace mcomp {

struct ExperimentPlan {
  Index n = 20, r = 4, r_prime = 8;
  std::string preset;  // named angle preset; overrides theta when set
  Vector theta_u_deg, theta_v_deg;
  double perturbation_variance = 1e-4;
  std::vector<double> p_sweep;  // defaults to 0.10:0.05:0.90
  int trials = 50;
  std::vector<std::string> methods{"standard", "single", "multi"};
  double noise_e = 0.0;  // 0 = noiseless equality mode
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int workers = 0;  // 0 = hardware concurrency
  std::string prior_path = "angles";  // "angles" or "perturbation"
  SolveOptions solve{2500, 1e-6, 1.0, 0.0, ConstraintMode::equality, false};

  void validate() const;
};

// Named angle presets (degrees). fig1/fig2/fig3 are the benchmark angle sets;
// good/mixed/poor are regime aliases for the same data.
std::pair<Vector, Vector> resolve_preset(const std::string& name);

ExperimentPlan plan_from_json(const std::string& text);
std::string plan_to_json(const ExperimentPlan& plan);

fdd::ChannelConfig channel_config_from_json(const std::string& text);

struct Instance {
  Matrix x;  // rank-r ground truth
  PriorModel prior;
};

// Prior-generation paths: "angles" places truth/prior at the plan's exact
// angles; "perturbation" takes the leading r' singular subspaces of
// X + N(0, perturbation_variance) as the prior.
Instance generate_instance(const ExperimentPlan& plan, std::uint64_t trial_seed);

struct TrialRecord {
  std::string method;
  double p = 0.0;
  int trial = 0;
  double nre_value = 0.0;
  bool success = false;  // nre < 1e-4
  int iters = 0;
  bool converged = false;
  double wall_ms = 0.0;  // informational; excluded from serialized output
};

struct Aggregate {
  std::string method;
  double p = 0.0;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  double median_nre = 0.0;
  double mean_iters = 0.0;
};

struct MethodWeights {
  std::string method;
  WeightSearchResult search;
  SingleAlphas single_alphas;  // evaluated at the search point (reporting)
};

struct PhaseResult {
  ExperimentPlan plan;
  Vector theta_u, theta_v;  // radians actually used
  std::vector<MethodWeights> weights;
  std::vector<TrialRecord> records;
  std::vector<Aggregate> aggregates;
};

PhaseResult run_phase_transition(const ExperimentPlan& plan);

// Velocity -> angles -> weights -> phase transition chain. The plan's angle
// fields are replaced by the extracted angles (prior path "angles").
PhaseResult run_fdd_pipeline(const fdd::ChannelConfig& cfg, ExperimentPlan plan);

// CSV: method,p,trials,successes,success_rate,median_nre,mean_iters
// (stable order: methods in plan order, p ascending). JSON mirrors the
// trial records plus the plan echo and weight reports.
void emit_csv(const PhaseResult& result, const std::string& path);
void emit_json(const PhaseResult& result, const std::string& path);
std::vector<Aggregate> parse_aggregates_csv(const std::string& path);

// fig presets map to fig1.csv/fig2.csv/fig3.csv; everything else results.csv.
std::string default_csv_name(const ExperimentPlan& plan);

}  // namespace mcomp
