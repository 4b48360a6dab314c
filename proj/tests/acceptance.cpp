// Acceptance harness: checks the end-to-end contract of the toolkit and
// prints one PASS/FAIL line per criterion. Exit status is zero only when
// every criterion holds, so the suite stays honest about known gaps instead
// of hiding them behind loosened thresholds.
//
// The checks reuse expensive artifacts where that does not weaken them: the
// criterion-1 sweep also feeds the record re-simulations, the surrogate
// training, and the first half of the determinism comparison.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ppn/angles.hpp"
#include "ppn/guidance.hpp"
#include "ppn/kinematics.hpp"
#include "ppn/mlp.hpp"
#include "ppn/simulation.hpp"
#include "ppn/sweep.hpp"

namespace {

int g_passed = 0;
int g_total = 0;

void report(int idx, const char* name, bool pass, const std::string& detail) {
  ++g_total;
  if (pass) {
    ++g_passed;
  }
  std::printf("[%2d] %s %s: %s\n", idx, pass ? "PASS" : "FAIL", name,
              detail.c_str());
  std::fflush(stdout);
}

// Runs one criterion body, converting exceptions into a FAIL line so the
// remaining criteria still execute.
template <class Body>
void criterion(int idx, const char* name, Body&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(idx, name, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(double x, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

// Deterministic uniform double in [-1, 1) from a raw 64-bit stream.
double signed_unit(std::mt19937_64& gen) {
  return 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  std::ostringstream os;
  os << in.rdbuf();
  return std::move(os).str();
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  const ppn::VehicleParams vehicle{};   // 50 m/s, 2500 m, theta0 = 0
  const ppn::IntegratorConfig cfg{};    // dt 0.01 s, capture 1 m, t_max 200 s
  const ppn::GridSpec grid = ppn::GridSpec::defaults();

  std::optional<ppn::SweepResult> sweep1;
  double sweep_seconds = 0.0;

  // ------------------------------------------------------------------
  // 1. Dataset cardinality and sweep runtime on the default grid.
  criterion(1, "dataset cardinality", [&] {
    const auto t0 = clock::now();
    sweep1 = ppn::run_sweep(grid, vehicle, cfg, 0);
    sweep_seconds = std::chrono::duration<double>(clock::now() - t0).count();

    const bool rows_b = sweep1->problem_b.size() == 136;
    const bool rows_a = sweep1->problem_a.size() == 4216;
    const double rel =
        std::abs(static_cast<double>(sweep1->tuples_enumerated) - 94857.0) /
        94857.0;
    const bool census = rel <= 0.02;
    const bool runtime = sweep_seconds < 1800.0;

    std::ostringstream os;
    os << "A rows " << sweep1->problem_a.size() << " (want 4216), B rows "
       << sweep1->problem_b.size() << " (want 136), enumerated "
       << sweep1->tuples_enumerated << " (want 94857 +/- 2%, off by "
       << fmt(100.0 * rel, 3) << "%), sweep " << fmt(sweep_seconds, 4)
       << " s (budget 1800 s)";
    report(1, "dataset cardinality", rows_a && rows_b && census && runtime,
           os.str());
  });

  // ------------------------------------------------------------------
  // 2. Reference optimal gains for the three demonstration engagements.
  criterion(2, "reference optimal gains", [&] {
    struct Row {
      double apf_deg, n_f, want_single, want_pair_nf, want_pair_nori;
    };
    const Row rows[] = {
        {-30.0, 2.0, 1.70, 2.00, 1.71},
        {-90.0, 2.0, -0.20, 2.00, -0.20},
        {-150.0, 3.2, -0.60, 3.20, -0.60},
    };
    const double tol = 0.1 + 1e-9;

    bool ok = true;
    std::ostringstream os;
    for (const Row& row : rows) {
      const auto sc =
          ppn::optimize_n_ori(25.0, row.apf_deg, row.n_f, vehicle, cfg);
      const auto rec = ppn::optimize_pair(25.0, row.apf_deg, grid, vehicle, cfg);
      const bool single_ok =
          sc.n_ori_opt && std::abs(*sc.n_ori_opt - row.want_single) <= tol;
      const bool pair_ok = rec &&
                           std::abs(rec->n_f - row.want_pair_nf) <= tol &&
                           std::abs(rec->n_ori_opt - row.want_pair_nori) <= tol;
      ok = ok && single_ok && pair_ok;
      os << "(25," << row.apf_deg << "): N_ori*"
         << (sc.n_ori_opt ? fmt(*sc.n_ori_opt, 3) : std::string("none"))
         << "/want " << fmt(row.want_single, 3) << ", pair ";
      if (rec) {
        os << "(" << fmt(rec->n_f, 3) << "," << fmt(rec->n_ori_opt, 3) << ")";
      } else {
        os << "none";
      }
      os << "/want (" << fmt(row.want_pair_nf, 3) << ","
         << fmt(row.want_pair_nori, 3) << "); ";
    }
    os << "tolerance 0.1 per component";
    report(2, "reference optimal gains", ok, os.str());
  });

  // ------------------------------------------------------------------
  // 3. Re-simulating sampled dataset rows reproduces the terminal angle.
  criterion(3, "terminal-angle fidelity", [&] {
    if (!sweep1 || sweep1->problem_a.empty()) {
      report(3, "terminal-angle fidelity", false, "sweep unavailable");
      return;
    }
    std::mt19937_64 gen(2026);
    double worst = 0.0;
    int checked = 0;
    for (int i = 0; i < 20; ++i) {
      const auto& rec =
          sweep1->problem_a[static_cast<std::size_t>(gen()) %
                            sweep1->problem_a.size()];
      ppn::VehicleParams v = vehicle;
      v.alpha_p0 = ppn::deg_to_rad(rec.alpha_p0_deg);
      ppn::GainSchedule g;
      g.mode = ppn::GuidanceMode::kTwoPhaseShaped;
      g.n_ori = rec.n_ori_opt;
      g.n_f = rec.n_f;
      g.alpha_pf_des = ppn::deg_to_rad(rec.alpha_pf_des_deg);
      const auto out = ppn::simulate(v, g, cfg, ppn::SimulationOptions{0});
      if (out.verdict != ppn::Verdict::kFeasible) {
        report(3, "terminal-angle fidelity", false,
               "sampled record did not re-simulate as feasible");
        return;
      }
      worst = std::max(worst, out.terminal_angle_error);
      ++checked;
    }
    const bool ok =
        checked == 20 && worst <= ppn::kTerminalAngleTolRad + 1e-12;
    report(3, "terminal-angle fidelity", ok,
           "20 sampled rows re-simulated; worst terminal-angle error " +
               fmt(ppn::rad_to_deg(worst), 4) + " deg (tolerance 0.5 deg)");
  });

  // ------------------------------------------------------------------
  // 4. Single-phase captures land on the closed-form terminal heading.
  criterion(4, "single-phase closed form", [&] {
    ppn::IntegratorConfig slow = cfg;
    slow.t_max = 6000.0;  // N = 2 from 170 deg needs roughly 854 s
    double worst = 0.0;
    int captured = 0, total = 0;
    for (int n = 2; n <= 5; ++n) {
      for (int a = 10; a <= 170; a += 10) {
        ++total;
        ppn::VehicleParams v = vehicle;
        v.alpha_p0 = ppn::deg_to_rad(static_cast<double>(a));
        ppn::GainSchedule g;
        g.mode = ppn::GuidanceMode::kSinglePpn;
        g.n_ori = static_cast<double>(n);
        const auto out = ppn::simulate(v, g, slow, ppn::SimulationOptions{0});
        if (!out.captured) {
          continue;
        }
        ++captured;
        const double predicted = ppn::predict_terminal_angle(
            static_cast<double>(n), 0.0, v.alpha_p0);
        worst = std::max(worst, std::abs(out.alpha_pf - predicted));
      }
    }
    const bool ok =
        captured == total && worst <= ppn::deg_to_rad(0.5) + 1e-12;
    report(4, "single-phase closed form", ok,
           fmt(captured, 3) + "/" + fmt(total, 3) +
               " gain/heading combinations captured; worst heading error " +
               fmt(ppn::rad_to_deg(worst), 4) + " deg (tolerance 0.5 deg)");
  });

  // ------------------------------------------------------------------
  // 5. The heading stays affine in the line of sight on every phase.
  criterion(5, "per-phase linear invariant", [&] {
    if (!sweep1 || sweep1->problem_a.empty()) {
      report(5, "per-phase linear invariant", false, "sweep unavailable");
      return;
    }
    std::mt19937_64 gen(2027);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const auto& rec =
          sweep1->problem_a[static_cast<std::size_t>(gen()) %
                            sweep1->problem_a.size()];
      ppn::VehicleParams v = vehicle;
      v.alpha_p0 = ppn::deg_to_rad(rec.alpha_p0_deg);
      ppn::GainSchedule g;
      g.mode = ppn::GuidanceMode::kTwoPhaseShaped;
      g.n_ori = rec.n_ori_opt;
      g.n_f = rec.n_f;
      g.alpha_pf_des = ppn::deg_to_rad(rec.alpha_pf_des_deg);
      const auto out = ppn::simulate(v, g, cfg, ppn::SimulationOptions{1});
      if (!out.switch_state || out.trajectory.size() < 2) {
        report(5, "per-phase linear invariant", false,
               "sampled record did not produce a two-phase trajectory");
        return;
      }
      const auto& sw = *out.switch_state;
      for (const auto& s : out.trajectory) {
        const double dev =
            s.t <= sw.t + cfg.dt / 4.0
                ? s.alpha_p - v.alpha_p0 - rec.n_ori_opt * (s.theta - v.theta0)
                : s.alpha_p - sw.alpha_p - rec.n_f * (s.theta - sw.theta);
        worst = std::max(worst, std::abs(dev));
      }
    }
    report(5, "per-phase linear invariant", worst <= 1e-6,
           "50 runs; max |alpha_p - alpha_start - N (theta - theta_start)| = " +
               fmt(worst, 3) + " rad (tolerance 1e-6)");
  });

  // ------------------------------------------------------------------
  // 6. Orientation-gain bounds: interval endpoints still hand over, and the
  //    two worked bound examples match their closed forms.
  criterion(6, "gain-bound consistency", [&] {
    const auto pairs = ppn::two_phase_pairs(grid);
    int switched = 0, total = 0;
    for (const auto& pair : pairs) {
      for (const double nf : {2.0, 3.5, 5.0}) {
        const auto b =
            ppn::gain_bounds(0.0, ppn::deg_to_rad(pair[0]),
                             ppn::deg_to_rad(pair[1]), nf);
        for (const double g : {b.n_min + 0.05, b.n_max - 0.05}) {
          ++total;
          ppn::VehicleParams v = vehicle;
          v.alpha_p0 = ppn::deg_to_rad(pair[0]);
          ppn::GainSchedule sched;
          sched.mode = ppn::GuidanceMode::kTwoPhaseShaped;
          sched.n_ori = g;
          sched.n_f = nf;
          sched.alpha_pf_des = ppn::deg_to_rad(pair[1]);
          const auto out =
              ppn::simulate(v, sched, cfg, ppn::SimulationOptions{0});
          if (out.switch_state) {
            ++switched;
          }
        }
      }
    }

    const auto b1 =
        ppn::gain_bounds(0.0, ppn::deg_to_rad(25.0), ppn::deg_to_rad(-90.0), 2.0);
    const auto b2 = ppn::gain_bounds(0.0, ppn::deg_to_rad(25.0),
                                     ppn::deg_to_rad(-150.0), 3.2);
    const bool examples_ok = std::abs(b1.n_min - (-2.0)) <= 1e-4 &&
                             std::abs(b1.n_max - 115.0 / 90.0) <= 1e-4 &&
                             std::abs(b2.n_min - (-191.0 / 150.0)) <= 1e-4 &&
                             std::abs(b2.n_max - 175.0 / 150.0) <= 1e-4;

    std::ostringstream os;
    os << switched << "/" << total
       << " near-endpoint runs handed over before the horizon; worked "
          "examples "
       << (examples_ok ? "match" : "mismatch") << " to 1e-4";
    report(6, "gain-bound consistency", switched == total && examples_ok,
           os.str());
  });

  // ------------------------------------------------------------------
  // 7. Surrogate accuracy on held-out rows, averaged over three seeds.
  ppn::MlpModel model_a, model_b;  // seed-1 models, reused by 9 and 10
  bool have_models = false;
  criterion(7, "surrogate accuracy", [&] {
    if (!sweep1 || sweep1->problem_a.empty() || sweep1->problem_b.empty()) {
      report(7, "surrogate accuracy", false, "sweep unavailable");
      return;
    }
    Eigen::MatrixXd xa, ya, xb, yb;
    ppn::dataset_matrices(sweep1->problem_a, ppn::Problem::kA, xa, ya);
    ppn::dataset_matrices(sweep1->problem_b, ppn::Problem::kB, xb, yb);

    double sum_a = 0.0;
    Eigen::Vector2d sum_b = Eigen::Vector2d::Zero();
    std::ostringstream os;
    for (std::uint32_t seed = 1; seed <= 3; ++seed) {
      ppn::TrainConfig ta;
      ta.epochs = 20000;
      ta.seed = seed;
      const auto ra = ppn::train(xa, ya, ppn::MlpSpec::gain_model(), ta);
      const double r2a =
          ppn::r_squared(ppn::predict(ra.model, ra.test_inputs),
                         ra.test_targets)(0);
      sum_a += r2a;

      ppn::TrainConfig tb;
      tb.epochs = 40000;
      tb.seed = seed;
      const auto rb = ppn::train(xb, yb, ppn::MlpSpec::pair_model(), tb);
      const Eigen::VectorXd r2b = ppn::r_squared(
          ppn::predict(rb.model, rb.test_inputs), rb.test_targets);
      sum_b += r2b;

      os << "seed " << seed << ": A " << fmt(r2a, 4) << ", B ("
         << fmt(r2b(0), 4) << "," << fmt(r2b(1), 4) << "); ";
      if (seed == 1) {
        model_a = ra.model;
        model_b = rb.model;
        have_models = true;
      }
    }
    const double avg_a = sum_a / 3.0;
    const Eigen::Vector2d avg_b = sum_b / 3.0;
    os << "averages: A " << fmt(avg_a, 4) << " (want >= 0.90), B ("
       << fmt(avg_b(0), 4) << "," << fmt(avg_b(1), 4) << ") (want >= 0.80)";
    report(7, "surrogate accuracy",
           avg_a >= 0.90 && avg_b(0) >= 0.80 && avg_b(1) >= 0.80, os.str());
  });

  // ------------------------------------------------------------------
  // 8. Backprop gradients match central finite differences.
  criterion(8, "gradient check", [&] {
    double worst = 0.0;
    for (const auto& spec :
         {ppn::MlpSpec::gain_model(), ppn::MlpSpec::pair_model()}) {
      ppn::MlpModel model = ppn::init_model(spec, 7);
      std::mt19937_64 gen(2028);
      Eigen::MatrixXd x(16, spec.inputs()), y(16, spec.outputs());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.data()[i] = signed_unit(gen);
      }
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        y.data()[i] = signed_unit(gen);
      }

      const auto grads = ppn::loss_gradients(model, x, y);

      // Flat views over (weights..., biases...) in layer order.
      std::vector<double*> params;
      std::vector<const double*> analytic;
      for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (Eigen::Index i = 0; i < model.weights[l].size(); ++i) {
          params.push_back(model.weights[l].data() + i);
          analytic.push_back(grads.d_weights[l].data() + i);
        }
        for (Eigen::Index i = 0; i < model.biases[l].size(); ++i) {
          params.push_back(model.biases[l].data() + i);
          analytic.push_back(grads.d_biases[l].data() + i);
        }
      }

      for (int probe = 0; probe < 50; ++probe) {
        const std::size_t k =
            static_cast<std::size_t>(gen()) % params.size();
        double* w = params[k];
        const double saved = *w;
        const double h = 1e-5 * std::max(1.0, std::abs(saved));
        *w = saved + h;
        const double up = ppn::mse_loss(ppn::forward(model, x), y);
        *w = saved - h;
        const double down = ppn::mse_loss(ppn::forward(model, x), y);
        *w = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double a = *analytic[k];
        const double rel = std::abs(a - numeric) /
                           std::max({std::abs(a), std::abs(numeric), 1e-12});
        worst = std::max(worst, rel);
      }
    }
    report(8, "gradient check", worst <= 1e-6,
           "both architectures, 50 probes each; worst relative error " +
               fmt(worst, 3) + " (tolerance 1e-6)");
  });

  // ------------------------------------------------------------------
  // 9. Serving-boundary prediction latency.
  criterion(9, "inference latency", [&] {
    if (!have_models) {
      report(9, "inference latency", false, "trained models unavailable");
      return;
    }
    std::mt19937_64 gen(2029);
    double sink = 0.0;
    const auto t0 = clock::now();
    for (int i = 0; i < 10000; ++i) {
      const double ap0 = 90.0 + 40.0 * signed_unit(gen);
      const double apf = -90.0 + 40.0 * signed_unit(gen);
      if (i % 2 == 0) {
        sink += ppn::predict_gains(model_a, ap0, apf, 3.5).n_ori_clamped;
      } else {
        sink += ppn::predict_gains(model_b, ap0, apf).n_ori_clamped;
      }
    }
    const double mean_us =
        std::chrono::duration<double, std::micro>(clock::now() - t0).count() /
        10000.0;
    report(9, "inference latency", mean_us < 1000.0,
           "mean " + fmt(mean_us, 4) + " us over 10000 calls (budget 1000 us; checksum " +
               fmt(sink, 6) + ")");
  });

  // ------------------------------------------------------------------
  // 10. The full pipeline is byte-deterministic across two runs.
  criterion(10, "determinism", [&] {
    if (!sweep1 || !have_models) {
      report(10, "determinism", false, "first-run artifacts unavailable");
      return;
    }
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ppn-acceptance";
    fs::create_directories(dir);

    ppn::write_dataset_csv(dir / "run1_A.csv", sweep1->problem_a,
                           ppn::Problem::kA);
    ppn::write_dataset_csv(dir / "run1_B.csv", sweep1->problem_b,
                           ppn::Problem::kB);
    ppn::save_model(model_a, dir / "run1_model_A.json");
    ppn::save_model(model_b, dir / "run1_model_B.json");

    const auto sweep2 = ppn::run_sweep(grid, vehicle, cfg, 0);
    ppn::write_dataset_csv(dir / "run2_A.csv", sweep2.problem_a,
                           ppn::Problem::kA);
    ppn::write_dataset_csv(dir / "run2_B.csv", sweep2.problem_b,
                           ppn::Problem::kB);

    Eigen::MatrixXd xa, ya, xb, yb;
    ppn::dataset_matrices(sweep2.problem_a, ppn::Problem::kA, xa, ya);
    ppn::dataset_matrices(sweep2.problem_b, ppn::Problem::kB, xb, yb);
    ppn::TrainConfig ta;
    ta.epochs = 20000;
    ta.seed = 1;
    ppn::save_model(ppn::train(xa, ya, ppn::MlpSpec::gain_model(), ta).model,
                    dir / "run2_model_A.json");
    ppn::TrainConfig tb;
    tb.epochs = 40000;
    tb.seed = 1;
    ppn::save_model(ppn::train(xb, yb, ppn::MlpSpec::pair_model(), tb).model,
                    dir / "run2_model_B.json");

    int identical = 0;
    const char* names[] = {"A.csv", "B.csv", "model_A.json", "model_B.json"};
    std::ostringstream os;
    for (const char* name : names) {
      const bool same =
          read_file_bytes(dir / (std::string("run1_") + name)) ==
          read_file_bytes(dir / (std::string("run2_") + name));
      identical += same ? 1 : 0;
      if (!same) {
        os << name << " differs; ";
      }
    }
    os << identical << "/4 artifacts byte-identical across two runs";
    report(10, "determinism", identical == 4, os.str());
  });

  std::printf("acceptance: %d/%d criteria passed\n", g_passed, g_total);
  return g_passed == g_total ? 0 : 1;
}
