#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "ppn/guidance.hpp"
#include "ppn/kinematics.hpp"
#include "ppn/simulation.hpp"

// Exhaustive grid optimization of two-phase PPN gains, and the CSV datasets
// the neural regressors are trained on.
//
// Two nested problems share one sweep pass:
//   problem A — best orientation gain for each (alpha_p0, alpha_pf_des, N_f)
//   problem B — best (N_f, N_ori) for each (alpha_p0, alpha_pf_des)
//
// The sweep is anchored at theta0 = 0; grid angles are absolute headings in
// degrees (degrees are the dataset/file boundary, radians everywhere else).

namespace ppn {

struct GridSpec {
  std::vector<double> alpha_p0_deg;      // initial headings [deg]
  std::vector<double> alpha_pf_des_deg;  // desired terminal headings [deg]
  std::vector<double> n_f;               // terminal-gain candidates
  double n_ori_step = 0.1;               // orientation-gain grid pitch
  std::optional<double> t_max;           // per-sweep horizon override [s]

  // 10..170 x -170..-10 (step 10 deg), N_f 2.0..5.0 (step 0.1).
  static GridSpec defaults();
};

// Orientation-gain grid for one scenario: integer multiples i*step with
// n_min <= i*step < n_max (lower edge inclusive, upper edge exclusive;
// exact ties resolved by a 1e-9 guard in gain units).
struct NoriGrid {
  std::int64_t i_lo = 0;
  std::int64_t i_hi = -1;  // inclusive
  double step = 0.1;
  GainBounds bounds;

  std::int64_t count() const { return i_hi >= i_lo ? i_hi - i_lo + 1 : 0; }
  double value(std::int64_t k) const {
    return static_cast<double>(i_lo + k) * step;
  }
};

NoriGrid nori_grid(double alpha_p0_deg, double alpha_pf_des_deg, double n_f,
                   double step = 0.1);

// Grid pairs that actually need a two-phase schedule.
std::vector<std::array<double, 2>> two_phase_pairs(const GridSpec& grid);

// Total number of (alpha_p0, alpha_pf_des, N_f, N_ori) tuples the sweep
// visits.
std::uint64_t count_enumerated_tuples(const GridSpec& grid);

// Outcome of optimizing N_ori over one (pair, N_f) scenario. n_ori_opt and
// j_opt are empty when no grid point was feasible; such scenarios are logged
// to the audit sidecar and excluded from the datasets.
struct ScenarioResult {
  double alpha_p0_deg = 0.0;
  double alpha_pf_des_deg = 0.0;
  double n_f = 0.0;
  GainBounds bounds;
  std::int64_t n_enumerated = 0;
  std::int64_t n_feasible = 0;
  std::optional<double> n_ori_opt;
  std::optional<double> j_opt;
};

// Simulates every admissible N_ori for one scenario and keeps the feasible
// point with the lowest effort; ties go to the larger gain.
ScenarioResult optimize_n_ori(double alpha_p0_deg, double alpha_pf_des_deg,
                              double n_f, const VehicleParams& vehicle,
                              const IntegratorConfig& cfg,
                              double n_ori_step = 0.1);

enum class Problem : std::uint8_t { kA, kB };

// One dataset row. For problem A, n_f is the scenario's grid value; for
// problem B it is the optimized terminal gain of the winning scenario, and
// n_feasible / clamped_low are carried over from that scenario.
struct DatasetRecord {
  double alpha_p0_deg = 0.0;
  double alpha_pf_des_deg = 0.0;
  double n_f = 0.0;
  double n_ori_opt = 0.0;
  double j_opt = 0.0;
  std::int64_t n_feasible = 0;
  bool clamped_low = false;
};

// Optimizes one geometry pair over every (N_f, N_ori) combination on the
// grid: walks grid.n_f in listed order, optimizing N_ori for each value, and
// keeps the combination with the lowest effort. A later N_f displaces the
// incumbent only on strict improvement, so effort ties resolve toward the
// smaller N_f; within a scenario ties resolve toward the larger N_ori. This
// is the same reduction run_sweep applies when assembling the pair-level
// dataset. Returns std::nullopt when no combination captures the target.
std::optional<DatasetRecord> optimize_pair(double alpha_p0_deg,
                                           double alpha_pf_des_deg,
                                           const GridSpec& grid,
                                           const VehicleParams& vehicle,
                                           const IntegratorConfig& cfg);

struct SweepResult {
  std::vector<ScenarioResult> scenarios;  // canonical order: pair-major, N_f ascending
  std::vector<DatasetRecord> problem_a;
  std::vector<DatasetRecord> problem_b;
  std::uint64_t tuples_enumerated = 0;
  std::uint64_t tuples_feasible = 0;
};

// Runs the full sweep. Scenarios are distributed over worker threads
// (threads == 0 picks the hardware concurrency); results land in
// preallocated slots, so the output is identical regardless of thread count.
// Requires vehicle.theta0 == 0.
SweepResult run_sweep(const GridSpec& grid, const VehicleParams& vehicle,
                      const IntegratorConfig& cfg, int threads = 0);

// CSV I/O. Headers are fixed:
//   A: alpha_p0_deg,alpha_pf_des_deg,N_f,N_ori_opt,J_opt,n_feasible,clamped_low
//   B: alpha_p0_deg,alpha_pf_des_deg,N_f_opt,N_ori_opt,J_opt,n_feasible,clamped_low
std::size_t write_dataset_csv(const std::filesystem::path& path,
                              const std::vector<DatasetRecord>& records,
                              Problem problem);
std::vector<DatasetRecord> read_dataset_csv(const std::filesystem::path& path,
                                            Problem problem);

// Infeasible-scenario sidecar (scenarios that produced no dataset row).
std::size_t write_sweep_audit(const std::filesystem::path& path,
                              const SweepResult& result);

}  // namespace ppn
