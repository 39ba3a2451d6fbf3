// Command-line front end: phase-transition sweeps, the FDD prior pipeline,
// weight search, and bound tables. All inputs are JSON documents; outputs
// are CSV + JSON. Exit codes: 0 ok, 2 invalid configuration, 3 I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcomp/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

mcomp::Vector parse_angle_list(const std::string& csv) {
  std::vector<double> vals;
  std::istringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  mcomp::Vector v(static_cast<mcomp::Index>(vals.size()));
  for (mcomp::Index i = 0; i < v.size(); ++i) v(i) = vals[static_cast<std::size_t>(i)];
  return v;
}

void write_outputs(const mcomp::PhaseResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string base = mcomp::default_csv_name(result.plan);
  const fs::path csv_path = fs::path(out_dir) / base;
  const fs::path json_path = fs::path(out_dir) / (base.substr(0, base.size() - 4) + ".json");
  mcomp::emit_csv(result, csv_path.string());
  mcomp::emit_json(result, json_path.string());
  std::cout << "wrote " << csv_path.string() << " and " << json_path.string() << "\n";
}

nlohmann::json weight_report_json(const mcomp::Vector& theta_u_deg,
                                  const mcomp::Vector& theta_v_deg,
                                  const mcomp::WeightSearchResult& res,
                                  mcomp::Index n, mcomp::Index r) {
  auto arr = [](const mcomp::Vector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (mcomp::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
  };
  const double d2r = std::numbers::pi / 180.0;
  const mcomp::SingleAlphas sa = mcomp::alpha456(
      theta_u_deg.maxCoeff() * d2r, theta_v_deg.maxCoeff() * d2r,
      res.weights.lambda1(0), res.weights.gamma1(0));
  nlohmann::json j;
  j["theta_u_deg"] = arr(theta_u_deg);
  j["theta_v_deg"] = arr(theta_v_deg);
  j["weights"] = {{"lambda1", arr(res.weights.lambda1)},
                  {"lambda2", arr(res.weights.lambda2)},
                  {"gamma1", arr(res.weights.gamma1)},
                  {"gamma2", arr(res.weights.gamma2)}};
  j["alpha1"] = res.report.alpha1;
  j["alpha2"] = res.report.alpha2;
  j["alpha3"] = res.report.alpha3;
  j["alpha4"] = sa.alpha4;
  j["alpha5"] = sa.alpha5;
  j["alpha6"] = sa.alpha6;
  j["p_lower"] = res.report.p_lower;
  j["feasible"] = res.feasible;
  j["n"] = n;
  j["r"] = r;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted low-rank matrix completion experiments"};
  app.require_subcommand(1);

  std::string plan_path, config_path, out_dir, mode_name = "multi";
  std::string theta_u_csv, theta_v_csv;
  int workers = 0;
  mcomp::Index opt_n = 20, opt_r_prime = 0;
  int grid = 21;

  auto* phase = app.add_subcommand("phase", "Run a phase-transition sweep");
  phase->add_option("--plan", plan_path, "Plan JSON file")->required();
  phase->add_option("--out", out_dir, "Output directory (default: plan's out_dir)");
  phase->add_option("--workers", workers, "Worker thread count override");

  auto* fdd_cmd = app.add_subcommand("fdd", "Velocity -> angles -> weights -> sweep");
  fdd_cmd->add_option("--config", config_path, "Channel config JSON")->required();
  fdd_cmd->add_option("--plan", plan_path, "Plan JSON file")->required();
  fdd_cmd->add_option("--out", out_dir, "Output directory (default: plan's out_dir)");
  fdd_cmd->add_option("--workers", workers, "Worker thread count override");

  auto* weights_cmd = app.add_subcommand("weights", "Search bound-minimizing weights");
  weights_cmd->add_option("--theta-u", theta_u_csv, "Angles (degrees, comma-separated)")
      ->required();
  weights_cmd->add_option("--theta-v", theta_v_csv, "Angles (degrees, comma-separated)")
      ->required();
  weights_cmd->add_option("--mode", mode_name, "multi|single|none")
      ->check(CLI::IsMember({"multi", "single", "none"}));
  weights_cmd->add_option("--n", opt_n, "Ambient dimension");
  weights_cmd->add_option("--r-prime", opt_r_prime, "Prior dimension (default 2r)");
  weights_cmd->add_option("--grid", grid, "Grid resolution");

  auto* bounds = app.add_subcommand("bounds", "Print bound tables for a plan's angles");
  bounds->add_option("--plan", plan_path, "Plan JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (phase->parsed() || fdd_cmd->parsed()) {
      mcomp::ExperimentPlan plan = mcomp::plan_from_json(read_file(plan_path));
      if (workers > 0) plan.workers = workers;
      if (!out_dir.empty()) plan.out_dir = out_dir;
      const mcomp::PhaseResult result =
          fdd_cmd->parsed()
              ? mcomp::run_fdd_pipeline(
                    mcomp::channel_config_from_json(read_file(config_path)), plan)
              : mcomp::run_phase_transition(plan);
      write_outputs(result, plan.out_dir);
      return kExitOk;
    }
    if (weights_cmd->parsed()) {
      const mcomp::Vector tu = parse_angle_list(theta_u_csv);
      const mcomp::Vector tv = parse_angle_list(theta_v_csv);
      if (tu.size() != tv.size() || tu.size() < 1)
        throw std::invalid_argument("weights: theta-u/theta-v must have equal length >= 1");
      const mcomp::Index r = tu.size();
      const mcomp::Index rp = opt_r_prime > 0 ? opt_r_prime : 2 * r;
      const double d2r = std::numbers::pi / 180.0;
      const mcomp::WeightMode mode = mode_name == "multi"    ? mcomp::WeightMode::multi
                                     : mode_name == "single" ? mcomp::WeightMode::single
                                                             : mcomp::WeightMode::none;
      const auto res = mcomp::optimize_weights(tu * d2r, tv * d2r, 1.0, 1.0, opt_n, r,
                                               rp, mode, grid);
      std::cout << weight_report_json(tu, tv, res, opt_n, r).dump(2) << "\n";
      return kExitOk;
    }
    // bounds: evaluate all three modes on the plan's angles.
    mcomp::ExperimentPlan plan = mcomp::plan_from_json(read_file(plan_path));
    if (plan.prior_path != "angles")
      throw std::invalid_argument("bounds: plan must use the angle prior path");
    mcomp::Vector tu = plan.theta_u_deg, tv = plan.theta_v_deg;
    if (!plan.preset.empty()) std::tie(tu, tv) = mcomp::resolve_preset(plan.preset);
    const double d2r = std::numbers::pi / 180.0;
    nlohmann::json table = nlohmann::json::array();
    for (const auto mode : {mcomp::WeightMode::none, mcomp::WeightMode::single,
                            mcomp::WeightMode::multi}) {
      const auto res = mcomp::optimize_weights(tu * d2r, tv * d2r, 1.0, 1.0, plan.n,
                                               plan.r, plan.r_prime, mode);
      nlohmann::json row = weight_report_json(tu, tv, res, plan.n, plan.r);
      row["mode"] = mode == mcomp::WeightMode::none     ? "none"
                    : mode == mcomp::WeightMode::single ? "single"
                                                        : "multi";
      table.push_back(std::move(row));
    }
    std::cout << table.dump(2) << "\n";
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
