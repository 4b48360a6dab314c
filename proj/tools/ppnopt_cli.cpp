// ppnopt — two-phase PPN guidance toolkit.
//
// Subcommands: bounds, simulate, sweep, train, predict, evaluate,
// export-surface. Angles on this boundary are degrees; everything beneath it
// works in radians. Exit codes: 0 success, 1 error, 2 ran-but-infeasible.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "ppn/angles.hpp"
#include "ppn/config.hpp"
#include "ppn/guidance.hpp"
#include "ppn/mlp.hpp"
#include "ppn/simulation.hpp"
#include "ppn/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

ppn::Problem parse_problem(const std::string& p) {
  if (p == "a" || p == "A") {
    return ppn::Problem::kA;
  }
  if (p == "b" || p == "B") {
    return ppn::Problem::kB;
  }
  throw std::invalid_argument("problem must be A or B, got: " + p);
}

int cmd_bounds(const ppn::RunConfig&, double ap0_deg, double apf_deg, double nf) {
  const double theta0 = 0.0;
  const double ap0 = ppn::deg_to_rad(ap0_deg);
  const double apf = ppn::deg_to_rad(apf_deg);
  if (!ppn::requires_two_phase(theta0, ap0, apf)) {
    const double n_single = ppn::required_gain(theta0, ap0, apf);
    std::fprintf(stderr,
                 "error: two-phase not required; a single phase with N = %.6f "
                 "reaches %.6g deg\n",
                 n_single, apf_deg);
    return kExitInfeasible;
  }
  const ppn::GainBounds b = ppn::gain_bounds(theta0, ap0, apf, nf);
  std::printf("n_min = %.6f (clamped: %s)\n", b.n_min, b.clamped_low ? "yes" : "no");
  std::printf("n_max = %.6f\n", b.n_max);
  std::printf("grid points at step 0.1: %lld\n",
               static_cast<long long>(ppn::nori_grid(ap0_deg, apf_deg, nf).count()));
  return kExitOk;
}

int cmd_simulate(const ppn::RunConfig& cfg, double ap0_deg, double apf_deg,
                 std::optional<double> nori, std::optional<double> nf,
                 const std::string& mode, const std::string& traj_path,
                 int stride) {
  ppn::VehicleParams v = cfg.vehicle;
  v.alpha_p0 = ppn::deg_to_rad(ap0_deg);

  ppn::GainSchedule sched;
  sched.alpha_pf_des = ppn::deg_to_rad(apf_deg);
  if (mode == "shaped") {
    if (!nori || !nf) {
      throw std::invalid_argument("shaped mode needs --nori and --nf");
    }
    sched.mode = ppn::GuidanceMode::kTwoPhaseShaped;
    sched.n_ori = *nori;
    sched.n_f = *nf;
    const ppn::GainBounds b =
        ppn::gain_bounds(v.theta0, v.alpha_p0, sched.alpha_pf_des, sched.n_f);
    if (sched.n_ori < b.n_min || sched.n_ori >= b.n_max) {
      std::fprintf(stderr,
                   "warning: N_ori %.4f outside the admissible interval "
                   "[%.4f, %.4f)\n",
                   sched.n_ori, b.n_min, b.n_max);
    }
  } else if (mode == "baseline") {
    sched.mode = ppn::GuidanceMode::kTwoPhaseBaseline;
  } else if (mode == "single") {
    if (!nori) {
      throw std::invalid_argument("single mode needs --nori (the one gain)");
    }
    sched.mode = ppn::GuidanceMode::kSinglePpn;
    sched.n_ori = *nori;
  } else {
    throw std::invalid_argument("mode must be shaped, baseline or single");
  }

  ppn::SimulationOptions opts;
  opts.log_stride = traj_path.empty() ? 0 : stride;
  const ppn::SimulationOutcome out = ppn::simulate(v, sched, cfg.integrator, opts);

  std::printf("verdict      = %s\n", ppn::verdict_name(out.verdict).c_str());
  std::printf("J            = %.6f\n", out.j);
  std::printf("t_f          = %.4f s%s\n", out.t_f,
               out.captured ? "" : " (cutoff)");
  std::printf("alpha_pf     = %.4f deg\n", ppn::rad_to_deg(out.alpha_pf));
  if (sched.mode != ppn::GuidanceMode::kSinglePpn) {
    std::printf("angle error  = %.4f deg\n",
                 ppn::rad_to_deg(out.terminal_angle_error));
  }
  if (out.switch_state) {
    std::printf("switch       = t %.4f s, theta %.4f deg, alpha_p %.4f deg\n",
                 out.switch_state->t, ppn::rad_to_deg(out.switch_state->theta),
                 ppn::rad_to_deg(out.switch_state->alpha_p));
  } else if (sched.mode != ppn::GuidanceMode::kSinglePpn) {
    std::printf("switch       = never\n");
  }

  if (!traj_path.empty()) {
    ppn::write_trajectory_csv(traj_path, out.trajectory);
    std::printf("trajectory   = %s (%zu samples)\n", traj_path.c_str(),
                 out.trajectory.size());
  }
  return out.verdict == ppn::Verdict::kFeasible ? kExitOk : kExitInfeasible;
}

int cmd_sweep(const ppn::RunConfig& cfg, const std::string& problem_str,
              const std::string& out_path, const std::string& audit_path) {
  const ppn::Problem problem = parse_problem(problem_str);
  const auto t0 = std::chrono::steady_clock::now();
  const ppn::SweepResult result =
      ppn::run_sweep(cfg.grid, cfg.vehicle, cfg.integrator, cfg.threads);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto& records =
      problem == ppn::Problem::kA ? result.problem_a : result.problem_b;
  const std::size_t rows = ppn::write_dataset_csv(out_path, records, problem);
  std::printf("pairs            = %zu\n", result.problem_b.size());
  std::printf("scenarios        = %zu\n", result.scenarios.size());
  std::printf("tuples enumerated= %llu\n",
               static_cast<unsigned long long>(result.tuples_enumerated));
  std::printf("tuples feasible  = %llu\n",
               static_cast<unsigned long long>(result.tuples_feasible));
  std::printf("rows written     = %zu -> %s\n", rows, out_path.c_str());
  if (!audit_path.empty()) {
    const std::size_t skipped = ppn::write_sweep_audit(audit_path, result);
    std::printf("infeasible scenarios = %zu -> %s\n", skipped, audit_path.c_str());
  }

  // Smoothness audit of the optimal-gain surface: largest jump of N_ori_opt
  // between grid-adjacent pairs. Reported for inspection, not asserted — the
  // surface has genuinely sharp ridges near the two-phase boundary.
  double max_jump = 0.0;
  std::map<std::pair<double, double>, double> surface;
  for (const auto& r : result.problem_b) {
    surface[{r.alpha_p0_deg, r.alpha_pf_des_deg}] = r.n_ori_opt;
  }
  for (const auto& [key, value] : surface) {
    for (const auto& nbr :
         {std::pair{key.first + 10.0, key.second},
          std::pair{key.first, key.second + 10.0}}) {
      const auto it = surface.find(nbr);
      if (it != surface.end()) {
        max_jump = std::max(max_jump, std::abs(it->second - value));
      }
    }
  }
  std::printf("surface audit    = max |dN_ori_opt| between adjacent pairs: %.2f\n",
               max_jump);
  std::printf("wall time        = %.1f s\n", secs);
  return kExitOk;
}

int cmd_train(const ppn::RunConfig& cfg, const std::string& problem_str,
              const std::string& dataset_path, const std::string& out_path,
              std::optional<std::int64_t> epochs_override) {
  const ppn::Problem problem = parse_problem(problem_str);
  const auto records = ppn::read_dataset_csv(dataset_path, problem);

  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
  ppn::dataset_matrices(records, problem, inputs, targets);

  const ppn::MlpSpec spec = problem == ppn::Problem::kA
                                ? ppn::MlpSpec::gain_model()
                                : ppn::MlpSpec::pair_model();
  ppn::TrainConfig tc;
  tc.learning_rate = cfg.learning_rate;
  tc.split_fraction = cfg.split_fraction;
  tc.seed = cfg.seed;
  tc.epochs = epochs_override.value_or(
      problem == ppn::Problem::kA ? cfg.epochs_gain : cfg.epochs_pair);

  const auto t0 = std::chrono::steady_clock::now();
  const ppn::TrainResult res = ppn::train(inputs, targets, spec, tc);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ppn::save_model(res.model, out_path);

  const Eigen::VectorXd r2_train =
      ppn::r_squared(ppn::predict(res.model, res.train_inputs), res.train_targets);
  const Eigen::VectorXd r2_test =
      ppn::r_squared(ppn::predict(res.model, res.test_inputs), res.test_targets);

  std::printf("samples          = %lld train / %lld test\n",
               static_cast<long long>(res.model.meta.n_train),
               static_cast<long long>(res.model.meta.n_test));
  std::printf("parameters       = %lld\n",
               static_cast<long long>(spec.parameter_count()));
  std::printf("final train MSE  = %.6g (normalized)\n", res.model.meta.final_loss);
  for (Eigen::Index c = 0; c < r2_test.size(); ++c) {
    std::printf("R2 output %lld    = train %.4f / test %.4f\n",
                 static_cast<long long>(c), r2_train(c), r2_test(c));
  }
  std::printf("model written    = %s\n", out_path.c_str());
  std::printf("wall time        = %.1f s\n", secs);
  return kExitOk;
}

int cmd_predict(const std::string& model_path, double ap0_deg, double apf_deg,
                std::optional<double> nf) {
  const ppn::MlpModel model = ppn::load_model(model_path);
  const ppn::GainPrediction p = ppn::predict_gains(model, ap0_deg, apf_deg, nf);
  if (!p.in_domain) {
    std::fprintf(stderr, "warning: %s\n", p.domain_warning.c_str());
  }
  if (p.n_f_raw) {
    std::printf("N_f   = %.6f (clamped %.6f)\n", *p.n_f_raw, *p.n_f_clamped);
  }
  std::printf("N_ori = %.6f (clamped %.6f)\n", p.n_ori_raw, p.n_ori_clamped);
  return kExitOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& problem_str,
                 const std::string& dataset_path) {
  const ppn::Problem problem = parse_problem(problem_str);
  const ppn::MlpModel model = ppn::load_model(model_path);
  const auto records = ppn::read_dataset_csv(dataset_path, problem);

  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
  ppn::dataset_matrices(records, problem, inputs, targets);
  if (inputs.cols() != model.spec.inputs() || targets.cols() != model.spec.outputs()) {
    throw std::invalid_argument("evaluate: dataset schema does not match the model");
  }

  const Eigen::MatrixXd pred = ppn::predict(model, inputs);
  const Eigen::VectorXd r2 = ppn::r_squared(pred, targets);
  const double mse = ppn::mse_loss(pred, targets);

  std::printf("rows = %lld\n", static_cast<long long>(inputs.rows()));
  std::printf("MSE  = %.6g (raw units)\n", mse);
  for (Eigen::Index c = 0; c < r2.size(); ++c) {
    const char* name = problem == ppn::Problem::kA ? "N_ori"
                       : c == 0                    ? "N_f"
                                                   : "N_ori";
    std::printf("R2 %s = %.4f\n", name, r2(c));
  }
  return kExitOk;
}

int cmd_export_surface(const std::string& model_path, std::optional<double> nf,
                       double step_deg, const std::string& out_path) {
  const ppn::MlpModel model = ppn::load_model(model_path);
  const bool pair_model = model.spec.inputs() == 2;
  if (!pair_model && !nf) {
    throw std::invalid_argument("export-surface: gain model needs --nf");
  }
  if (!(step_deg > 0.0)) {
    throw std::invalid_argument("export-surface: step must be positive");
  }

  std::ofstream f(out_path);
  if (!f) {
    throw std::runtime_error("export-surface: cannot open " + out_path);
  }
  if (pair_model) {
    f << "alpha_p0_deg,alpha_pf_des_deg,N_f_pred,N_ori_pred\n";
  } else {
    f << "alpha_p0_deg,alpha_pf_des_deg,N_f,N_ori_pred\n";
  }

  char line[160];
  std::size_t rows = 0;
  for (double ap0 = 10.0; ap0 <= 170.0 + 1e-9; ap0 += step_deg) {
    for (double apf = -170.0; apf <= -10.0 + 1e-9; apf += step_deg) {
      if (!ppn::requires_two_phase(0.0, ppn::deg_to_rad(ap0),
                                   ppn::deg_to_rad(apf))) {
        continue;  // surface is defined on the two-phase wedge only
      }
      const ppn::GainPrediction p = ppn::predict_gains(
          model, ap0, apf, pair_model ? std::nullopt : nf);
      if (pair_model) {
        std::snprintf(line, sizeof(line), "%.10g,%.10g,%.10g,%.10g\n", ap0, apf,
                      *p.n_f_raw, p.n_ori_raw);
      } else {
        std::snprintf(line, sizeof(line), "%.10g,%.10g,%.10g,%.10g\n", ap0, apf,
                      *nf, p.n_ori_raw);
      }
      f << line;
      ++rows;
    }
  }
  if (!f) {
    throw std::runtime_error("export-surface: write failed for " + out_path);
  }
  std::printf("rows written = %zu -> %s\n", rows, out_path.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase pure-proportional-navigation gain toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "key=value configuration file")
      ->check(CLI::ExistingFile);

  // bounds
  double ap0 = 0.0;
  double apf = 0.0;
  double nf_value = 0.0;
  auto* bounds = app.add_subcommand("bounds", "Admissible orientation-gain interval");
  bounds->add_option("--ap0", ap0, "initial heading [deg]")->required();
  bounds->add_option("--apf", apf, "desired terminal heading [deg]")->required();
  bounds->add_option("--nf", nf_value, "terminal-phase gain")->required();

  // simulate
  std::string mode = "shaped";
  std::string traj_path;
  int stride = 1;
  std::optional<double> nori_opt;
  std::optional<double> nf_opt;
  auto* simulate = app.add_subcommand("simulate", "Run one engagement");
  simulate->add_option("--ap0", ap0, "initial heading [deg]")->required();
  simulate->add_option("--apf", apf, "desired terminal heading [deg]")->required();
  simulate->add_option("--nori", nori_opt, "orientation gain (single: the gain)");
  simulate->add_option("--nf", nf_opt, "terminal-phase gain");
  simulate->add_option("--mode", mode, "shaped | baseline | single")
      ->check(CLI::IsMember({"shaped", "baseline", "single"}));
  simulate->add_option("--traj", traj_path, "write trajectory CSV here");
  simulate->add_option("--stride", stride, "trajectory decimation stride")
      ->check(CLI::PositiveNumber);

  // sweep
  std::string problem;
  std::string out_path;
  std::string audit_path;
  auto* sweep = app.add_subcommand("sweep", "Exhaustive gain optimization -> dataset CSV");
  sweep->add_option("--problem", problem, "A or B")->required();
  sweep->add_option("--out", out_path, "dataset CSV path")->required();
  sweep->add_option("--audit", audit_path, "infeasible-scenario sidecar CSV");

  // train
  std::string dataset_path;
  std::optional<std::int64_t> epochs_opt;
  auto* train = app.add_subcommand("train", "Train a gain regressor on a dataset");
  train->add_option("--problem", problem, "A or B")->required();
  train->add_option("--dataset", dataset_path, "dataset CSV")->required();
  train->add_option("--out", out_path, "model JSON path")->required();
  train->add_option("--epochs", epochs_opt, "override training epochs");

  // predict
  std::string model_path;
  auto* predict = app.add_subcommand("predict", "Query a trained regressor");
  predict->add_option("--model", model_path, "model JSON")->required();
  predict->add_option("--ap0", ap0, "initial heading [deg]")->required();
  predict->add_option("--apf", apf, "desired terminal heading [deg]")->required();
  predict->add_option("--nf", nf_opt, "terminal gain (gain model only)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "R2 of a model on a dataset");
  evaluate->add_option("--model", model_path, "model JSON")->required();
  evaluate->add_option("--problem", problem, "A or B")->required();
  evaluate->add_option("--dataset", dataset_path, "dataset CSV")->required();

  // export-surface
  double step_deg = 2.0;
  auto* surface = app.add_subcommand("export-surface",
                                     "Predicted gain surface on a dense grid");
  surface->add_option("--model", model_path, "model JSON")->required();
  surface->add_option("--nf", nf_opt, "terminal gain (gain model only)");
  surface->add_option("--step", step_deg, "grid step [deg]");
  surface->add_option("--out", out_path, "surface CSV path")->required();

  // Training-config overrides shared by train/sweep.
  std::optional<std::uint32_t> seed_opt;
  std::optional<int> threads_opt;
  for (auto* sub : {sweep, train}) {
    sub->add_option("--seed", seed_opt, "RNG seed");
    sub->add_option("--threads", threads_opt, "worker threads (sweep only)");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    ppn::RunConfig cfg;
    if (!config_path.empty()) {
      cfg = ppn::load_config(config_path);
    }
    if (seed_opt) {
      cfg.seed = *seed_opt;
    }
    if (threads_opt) {
      cfg.threads = *threads_opt;
    }

    if (bounds->parsed()) {
      return cmd_bounds(cfg, ap0, apf, nf_value);
    }
    if (simulate->parsed()) {
      return cmd_simulate(cfg, ap0, apf, nori_opt, nf_opt, mode, traj_path, stride);
    }
    if (sweep->parsed()) {
      return cmd_sweep(cfg, problem, out_path, audit_path);
    }
    if (train->parsed()) {
      return cmd_train(cfg, problem, dataset_path, out_path, epochs_opt);
    }
    if (predict->parsed()) {
      return cmd_predict(model_path, ap0, apf, nf_opt);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(model_path, problem, dataset_path);
    }
    if (surface->parsed()) {
      return cmd_export_surface(model_path, nf_opt, step_deg, out_path);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
