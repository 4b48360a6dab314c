#include "ppn/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>

#include "ppn/angles.hpp"

namespace ppn {

GridSpec GridSpec::defaults() {
  GridSpec g;
  for (int a = 10; a <= 170; a += 10) {
    g.alpha_p0_deg.push_back(static_cast<double>(a));
  }
  for (int a = -170; a <= -10; a += 10) {
    g.alpha_pf_des_deg.push_back(static_cast<double>(a));
  }
  for (int k = 20; k <= 50; ++k) {
    g.n_f.push_back(static_cast<double>(k) / 10.0);
  }
  return g;
}

NoriGrid nori_grid(double alpha_p0_deg, double alpha_pf_des_deg, double n_f,
                   double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("nori_grid: step must be positive");
  }
  NoriGrid g;
  g.step = step;
  g.bounds = gain_bounds(0.0, deg_to_rad(alpha_p0_deg),
                         deg_to_rad(alpha_pf_des_deg), n_f);
  // Lower edge inclusive, upper edge exclusive; the 1e-9 guard makes exact
  // grid ties deterministic instead of hostage to rounding.
  g.i_lo = static_cast<std::int64_t>(std::ceil(g.bounds.n_min / step - 1e-9));
  g.i_hi = static_cast<std::int64_t>(std::ceil(g.bounds.n_max / step - 1e-9)) - 1;
  return g;
}

std::vector<std::array<double, 2>> two_phase_pairs(const GridSpec& grid) {
  std::vector<std::array<double, 2>> pairs;
  for (double ap0 : grid.alpha_p0_deg) {
    for (double apf : grid.alpha_pf_des_deg) {
      if (requires_two_phase(0.0, deg_to_rad(ap0), deg_to_rad(apf))) {
        pairs.push_back({ap0, apf});
      }
    }
  }
  return pairs;
}

std::uint64_t count_enumerated_tuples(const GridSpec& grid) {
  std::uint64_t total = 0;
  for (const auto& [ap0, apf] : two_phase_pairs(grid)) {
    for (double nf : grid.n_f) {
      total += static_cast<std::uint64_t>(
          nori_grid(ap0, apf, nf, grid.n_ori_step).count());
    }
  }
  return total;
}

ScenarioResult optimize_n_ori(double alpha_p0_deg, double alpha_pf_des_deg,
                              double n_f, const VehicleParams& vehicle,
                              const IntegratorConfig& cfg, double n_ori_step) {
  const NoriGrid grid = nori_grid(alpha_p0_deg, alpha_pf_des_deg, n_f, n_ori_step);

  VehicleParams v = vehicle;
  v.alpha_p0 = deg_to_rad(alpha_p0_deg);

  GainSchedule sched;
  sched.mode = GuidanceMode::kTwoPhaseShaped;
  sched.n_f = n_f;
  sched.alpha_pf_des = deg_to_rad(alpha_pf_des_deg);

  SimulationOptions opts;
  opts.log_stride = 0;  // effort only, no trajectory

  ScenarioResult res;
  res.alpha_p0_deg = alpha_p0_deg;
  res.alpha_pf_des_deg = alpha_pf_des_deg;
  res.n_f = n_f;
  res.bounds = grid.bounds;
  res.n_enumerated = grid.count();

  for (std::int64_t k = 0; k < grid.count(); ++k) {
    sched.n_ori = grid.value(k);
    const SimulationOutcome out = simulate(v, sched, cfg, opts);
    if (out.verdict != Verdict::kFeasible) {
      continue;
    }
    ++res.n_feasible;
    // <= prefers the larger gain on exact effort ties (ascending scan).
    if (!res.j_opt || out.j <= *res.j_opt) {
      res.j_opt = out.j;
      res.n_ori_opt = sched.n_ori;
    }
  }
  return res;
}

std::optional<DatasetRecord> optimize_pair(double alpha_p0_deg,
                                           double alpha_pf_des_deg,
                                           const GridSpec& grid,
                                           const VehicleParams& vehicle,
                                           const IntegratorConfig& cfg) {
  if (grid.n_f.empty()) {
    throw std::invalid_argument("optimize_pair: grid.n_f is empty");
  }
  IntegratorConfig pair_cfg = cfg;
  if (grid.t_max) {
    pair_cfg.t_max = *grid.t_max;
  }

  std::optional<ScenarioResult> best;
  for (const double nf : grid.n_f) {
    ScenarioResult sc = optimize_n_ori(alpha_p0_deg, alpha_pf_des_deg, nf,
                                       vehicle, pair_cfg, grid.n_ori_step);
    if (sc.n_feasible == 0) {
      continue;
    }
    // Strict < keeps the smaller N_f on cross-gain effort ties.
    if (!best || *sc.j_opt < *best->j_opt) {
      best = std::move(sc);
    }
  }
  if (!best) {
    return std::nullopt;
  }
  return DatasetRecord{best->alpha_p0_deg, best->alpha_pf_des_deg, best->n_f,
                       *best->n_ori_opt,   *best->j_opt,           best->n_feasible,
                       best->bounds.clamped_low};
}

SweepResult run_sweep(const GridSpec& grid, const VehicleParams& vehicle,
                      const IntegratorConfig& cfg, int threads) {
  if (vehicle.theta0 != 0.0) {
    throw std::invalid_argument("run_sweep: sweep is anchored at theta0 = 0");
  }
  IntegratorConfig sweep_cfg = cfg;
  if (grid.t_max) {
    sweep_cfg.t_max = *grid.t_max;
  }

  const auto pairs = two_phase_pairs(grid);
  const std::size_t n_jobs = pairs.size() * grid.n_f.size();

  SweepResult result;
  result.scenarios.resize(n_jobs);

  unsigned n_workers = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::thread::hardware_concurrency();
  n_workers = std::max(1u, std::min<unsigned>(n_workers, n_jobs ? n_jobs : 1));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t job = next.fetch_add(1);
      if (job >= n_jobs || failed.load()) {
        return;
      }
      const auto& pair = pairs[job / grid.n_f.size()];
      const double nf = grid.n_f[job % grid.n_f.size()];
      try {
        result.scenarios[job] = optimize_n_ori(pair[0], pair[1], nf, vehicle,
                                               sweep_cfg, grid.n_ori_step);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) {
          first_error = std::current_exception();
        }
        failed.store(true);
        return;
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (unsigned i = 0; i < n_workers; ++i) {
      pool.emplace_back(worker);
    }
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }

  // Reductions in canonical order (pair-major, N_f ascending), so the
  // datasets are byte-stable regardless of the thread schedule.
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const ScenarioResult* best = nullptr;
    for (std::size_t f = 0; f < grid.n_f.size(); ++f) {
      const ScenarioResult& sc = result.scenarios[p * grid.n_f.size() + f];
      result.tuples_enumerated += static_cast<std::uint64_t>(sc.n_enumerated);
      result.tuples_feasible += static_cast<std::uint64_t>(sc.n_feasible);
      if (sc.n_feasible == 0) {
        continue;
      }
      result.problem_a.push_back(DatasetRecord{
          sc.alpha_p0_deg, sc.alpha_pf_des_deg, sc.n_f, *sc.n_ori_opt,
          *sc.j_opt, sc.n_feasible, sc.bounds.clamped_low});
      // Strict < keeps the smaller N_f on cross-gain effort ties.
      if (!best || *sc.j_opt < *best->j_opt) {
        best = &sc;
      }
    }
    if (best) {
      result.problem_b.push_back(DatasetRecord{
          best->alpha_p0_deg, best->alpha_pf_des_deg, best->n_f,
          *best->n_ori_opt, *best->j_opt, best->n_feasible,
          best->bounds.clamped_low});
    }
  }
  return result;
}

namespace {

const char* dataset_header(Problem problem) {
  return problem == Problem::kA
             ? "alpha_p0_deg,alpha_pf_des_deg,N_f,N_ori_opt,J_opt,n_feasible,clamped_low"
             : "alpha_p0_deg,alpha_pf_des_deg,N_f_opt,N_ori_opt,J_opt,n_feasible,clamped_low";
}

}  // namespace

std::size_t write_dataset_csv(const std::filesystem::path& path,
                              const std::vector<DatasetRecord>& records,
                              Problem problem) {
  std::ofstream f(path);
  if (!f) {
    throw std::runtime_error("write_dataset_csv: cannot open " + path.string());
  }
  f << dataset_header(problem) << '\n';
  char line[256];
  for (const auto& r : records) {
    std::snprintf(line, sizeof(line), "%.10g,%.10g,%.10g,%.10g,%.10g,%lld,%d\n",
                  r.alpha_p0_deg, r.alpha_pf_des_deg, r.n_f, r.n_ori_opt,
                  r.j_opt, static_cast<long long>(r.n_feasible),
                  r.clamped_low ? 1 : 0);
    f << line;
  }
  if (!f) {
    throw std::runtime_error("write_dataset_csv: write failed for " + path.string());
  }
  return records.size();
}

std::vector<DatasetRecord> read_dataset_csv(const std::filesystem::path& path,
                                            Problem problem) {
  std::ifstream f(path);
  if (!f) {
    throw std::runtime_error("read_dataset_csv: cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(f, line)) {
    throw std::runtime_error("read_dataset_csv: empty file " + path.string());
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != dataset_header(problem)) {
    throw std::runtime_error("read_dataset_csv: unexpected header in " +
                             path.string() + ": " + line);
  }

  std::vector<DatasetRecord> records;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    std::array<std::string, 7> fields;
    std::stringstream ss(line);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!std::getline(ss, fields[i], ',')) {
        throw std::runtime_error("read_dataset_csv: short row at line " +
                                 std::to_string(line_no) + " in " + path.string());
      }
    }
    try {
      DatasetRecord r;
      r.alpha_p0_deg = std::stod(fields[0]);
      r.alpha_pf_des_deg = std::stod(fields[1]);
      r.n_f = std::stod(fields[2]);
      r.n_ori_opt = std::stod(fields[3]);
      r.j_opt = std::stod(fields[4]);
      r.n_feasible = std::stoll(fields[5]);
      r.clamped_low = std::stoi(fields[6]) != 0;
      records.push_back(r);
    } catch (const std::exception&) {
      throw std::runtime_error("read_dataset_csv: bad value at line " +
                               std::to_string(line_no) + " in " + path.string());
    }
  }
  return records;
}

std::size_t write_sweep_audit(const std::filesystem::path& path,
                              const SweepResult& result) {
  std::ofstream f(path);
  if (!f) {
    throw std::runtime_error("write_sweep_audit: cannot open " + path.string());
  }
  f << "alpha_p0_deg,alpha_pf_des_deg,N_f,n_enumerated\n";
  char line[128];
  std::size_t rows = 0;
  for (const auto& sc : result.scenarios) {
    if (sc.n_feasible != 0) {
      continue;
    }
    std::snprintf(line, sizeof(line), "%.10g,%.10g,%.10g,%lld\n",
                  sc.alpha_p0_deg, sc.alpha_pf_des_deg, sc.n_f,
                  static_cast<long long>(sc.n_enumerated));
    f << line;
    ++rows;
  }
  if (!f) {
    throw std::runtime_error("write_sweep_audit: write failed for " + path.string());
  }
  return rows;
}

}  // namespace ppn
