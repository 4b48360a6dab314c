#include "ppn/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ppn {

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kFeasible:
      return "feasible";
    case Verdict::kTimeout:
      return "timeout";
    case Verdict::kNoSwitch:
      return "no-switch";
    case Verdict::kAngleMiss:
      return "angle-miss";
  }
  return "unknown";
}

namespace {

void validate_schedule(const VehicleParams& v, const GainSchedule& g) {
  if (!std::isfinite(g.n_ori)) {
    throw std::invalid_argument("simulate: orientation gain must be finite");
  }
  switch (g.mode) {
    case GuidanceMode::kSinglePpn:
      if (g.n_ori == 1.0) {
        throw std::domain_error("simulate: single-phase gain of 1 is singular");
      }
      break;
    case GuidanceMode::kTwoPhaseBaseline:
    case GuidanceMode::kTwoPhaseShaped:
      // Two-phase schedules only make sense when one phase cannot reach the
      // desired terminal heading.
      if (!requires_two_phase(v.theta0, v.alpha_p0, g.alpha_pf_des)) {
        throw std::invalid_argument(
            "simulate: two-phase schedule for a single-phase engagement");
      }
      break;
  }
}

}  // namespace

SimulationOutcome simulate(const VehicleParams& v, const GainSchedule& gains,
                           const IntegratorConfig& cfg,
                           const SimulationOptions& opts) {
  validate_schedule(v, gains);

  GainRule rule = GainRule::from_schedule(gains, v);

  EngagementState s0;
  s0.t = 0.0;
  s0.R = v.r0;
  s0.theta = v.theta0;
  s0.alpha_p = v.alpha_p0;

  SimulationOutcome out;

  // The sink sees every integration sample; trajectory logging is decimated
  // but the effort integral is not.
  bool have_prev = false;
  double prev_t = 0.0;
  double prev_a = 0.0;
  std::int64_t sample_idx = 0;
  TrajectorySample last{};

  auto sink = [&](const EngagementState& s, double a_p) {
    if (have_prev) {
      out.j += 0.5 * (prev_a * prev_a + a_p * a_p) * (s.t - prev_t);
    }
    prev_t = s.t;
    prev_a = a_p;
    have_prev = true;

    last = TrajectorySample{s.t, s.R, s.theta, s.alpha_p, a_p};
    if (opts.log_stride > 0 && sample_idx % opts.log_stride == 0) {
      out.trajectory.push_back(last);
    }
    ++sample_idx;
  };

  const Termination term =
      run_until_capture(s0, [&rule](const EngagementState& s) { return rule.step_gain(s); },
                        v, cfg, sink);

  if (opts.log_stride > 0 &&
      (out.trajectory.empty() || out.trajectory.back().t != last.t)) {
    out.trajectory.push_back(last);
  }

  out.captured = term == Termination::kCaptured;
  out.t_f = last.t;
  out.alpha_pf = last.alpha_p;
  out.switch_state = rule.switch_record();
  if (rule.requires_switch()) {
    out.terminal_angle_error = std::abs(out.alpha_pf - gains.alpha_pf_des);
  }

  if (!out.captured) {
    out.verdict = Verdict::kTimeout;
  } else if (rule.requires_switch() && !rule.switched()) {
    out.verdict = Verdict::kNoSwitch;
  } else if (rule.requires_switch() &&
             out.terminal_angle_error > kTerminalAngleTolRad) {
    out.verdict = Verdict::kAngleMiss;
  } else {
    out.verdict = Verdict::kFeasible;
  }
  return out;
}

double effort_integral(std::span<const double> t, std::span<const double> a_p) {
  if (t.size() != a_p.size()) {
    throw std::invalid_argument("effort_integral: mismatched sample lengths");
  }
  if (t.size() < 2) {
    throw std::invalid_argument("effort_integral: need at least two samples");
  }
  double j = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double dt = t[i] - t[i - 1];
    if (dt < 0.0) {
      throw std::invalid_argument("effort_integral: samples out of order");
    }
    j += 0.5 * (a_p[i - 1] * a_p[i - 1] + a_p[i] * a_p[i]) * dt;
  }
  return j;
}

double effort_integral(std::span<const TrajectorySample> samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("effort_integral: need at least two samples");
  }
  double j = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double dt = samples[i].t - samples[i - 1].t;
    if (dt < 0.0) {
      throw std::invalid_argument("effort_integral: samples out of order");
    }
    j += 0.5 * (samples[i - 1].a_p * samples[i - 1].a_p +
                samples[i].a_p * samples[i].a_p) *
         dt;
  }
  return j;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          std::span<const TrajectorySample> samples) {
  std::ofstream f(path);
  if (!f) {
    throw std::runtime_error("write_trajectory_csv: cannot open " + path.string());
  }
  f << "t,R,theta_deg,alpha_p_deg,a_p\n";
  char line[256];
  for (const auto& s : samples) {
    std::snprintf(line, sizeof(line), "%.10g,%.10g,%.10g,%.10g,%.10g\n", s.t,
                  s.R, rad_to_deg(s.theta), rad_to_deg(s.alpha_p), s.a_p);
    f << line;
  }
  if (!f) {
    throw std::runtime_error("write_trajectory_csv: write failed for " + path.string());
  }
}

}  // namespace ppn
