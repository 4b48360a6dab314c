#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>

#include "ppn/angles.hpp"
#include "ppn/kinematics.hpp"

// Pure proportional navigation (PPN) guidance with terminal-angle control.
//
// Under PPN the heading rate is proportional to the line-of-sight rate,
// alpha_p_dot = N * theta_dot, so the heading is an affine function of the
// line-of-sight angle along the whole trajectory. Everything in this module
// (terminal-angle prediction, feasibility bands, gain bounds, the two-phase
// switching rule) falls out of that invariant.
//
// Convention: engagements are expressed with alpha_p0 > theta0. Mirrored
// engagements must be reflected by the caller before entry.

namespace ppn {

enum class GuidanceMode : std::uint8_t {
  kSinglePpn,         // one fixed gain for the whole flight
  kTwoPhaseBaseline,  // orient with a heuristic gain, hand over when N_req >= 2
  kTwoPhaseShaped,    // orient with a chosen gain, hand over when N_req >= N_f
};

struct GainSchedule {
  GuidanceMode mode = GuidanceMode::kSinglePpn;
  double n_ori = 0.0;          // orientation-phase gain (single: the only gain)
  double n_f = 0.0;            // terminal-phase gain (two-phase shaped)
  double alpha_pf_des = 0.0;   // desired terminal heading [rad]
};

// Admissible orientation-gain interval (n_min, n_max) for a two-phase
// engagement. clamped_low marks that the geometric lower bound sat below the
// practical floor of -2 (or did not constrain at all) and was clamped to it.
struct GainBounds {
  double n_min = 0.0;
  double n_max = 0.0;
  bool clamped_low = false;
};

// Lateral acceleration commanded by PPN.
inline double ppn_command(double n, double v_p, double theta_dot) {
  return n * v_p * theta_dot;
}

// Terminal heading reached by constant-gain PPN from (theta0, alpha_p0),
// using the affine heading invariant and theta_f -> alpha_pf (the pursuer
// ends up flying down the final line of sight). Singular at n = 1.
inline double predict_terminal_angle(double n, double theta0, double alpha_p0) {
  if (n == 1.0) {
    throw std::domain_error("predict_terminal_angle: gain of 1 is singular");
  }
  return (n * theta0 - alpha_p0) / (n - 1.0);
}

// Half-open interval [lo, hi) of terminal headings reachable by a single
// constant gain.
struct AngleBand {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x < hi; }
};

// Terminal headings reachable with one constant-gain PPN phase: as the gain
// sweeps (1, inf) the terminal heading covers [2*theta0 - alpha_p0, theta0).
inline AngleBand achievable_band(double theta0, double alpha_p0) {
  if (!(alpha_p0 > theta0)) {
    throw std::invalid_argument("achievable_band: requires alpha_p0 > theta0");
  }
  return AngleBand{2.0 * theta0 - alpha_p0, theta0};
}

// A two-phase schedule is needed exactly when the desired terminal heading
// lies outside the single-phase band.
inline bool requires_two_phase(double theta0, double alpha_p0,
                               double alpha_pf_des) {
  return !achievable_band(theta0, alpha_p0).contains(alpha_pf_des);
}

// Gain that would steer from the instantaneous (theta, alpha_p) to the
// desired terminal heading in one constant-gain phase. Singular when the
// line of sight has already reached the desired heading.
inline double required_gain(double theta, double alpha_p, double alpha_pf_des) {
  const double den = alpha_pf_des - theta;
  if (den == 0.0) {
    throw std::domain_error("required_gain: line of sight at desired terminal angle");
  }
  return (alpha_pf_des - alpha_p) / den;
}

// Bounds on the orientation gain of a two-phase schedule with terminal gain
// n_f. The upper bound keeps the orientation phase from overshooting the
// handover geometry; the lower bound keeps the handover from sliding past a
// full revolution of the line of sight. Lower bounds below -2 are clamped
// (strongly negative gains buy nothing but effort).
inline GainBounds gain_bounds(double theta0, double alpha_p0,
                              double alpha_pf_des, double n_f) {
  if (!(alpha_p0 > theta0)) {
    throw std::invalid_argument("gain_bounds: requires alpha_p0 > theta0");
  }
  if (!requires_two_phase(theta0, alpha_p0, alpha_pf_des)) {
    throw std::invalid_argument("gain_bounds: engagement does not need two phases");
  }
  if (!(n_f >= 2.0 && n_f <= 5.0)) {
    throw std::invalid_argument("gain_bounds: terminal gain must lie in [2, 5]");
  }

  GainBounds b;
  b.n_max = (alpha_pf_des - alpha_p0) / (alpha_pf_des - theta0);

  const double den = alpha_pf_des - theta0 + kPi / (n_f - 1.0);
  constexpr double kFloor = -2.0;
  if (den >= 0.0) {
    // The one-revolution constraint cannot bind from below here.
    b.n_min = kFloor;
    b.clamped_low = true;
  } else {
    const double geometric =
        (alpha_pf_des - alpha_p0 + kPi * n_f / (n_f - 1.0)) / den;
    if (geometric < kFloor) {
      b.n_min = kFloor;
      b.clamped_low = true;
    } else {
      b.n_min = geometric;
      b.clamped_low = false;
    }
  }

  if (!(b.n_min < b.n_max)) {
    throw std::invalid_argument("gain_bounds: empty orientation-gain interval");
  }
  return b;
}

struct SwitchRecord {
  double t = 0.0;        // [s]
  double theta = 0.0;    // [rad]
  double alpha_p = 0.0;  // [rad]
};

// Stateful per-engagement gain policy. step_gain() is called once per
// integration step with the step-start state; for two-phase modes it checks
// the handover condition there and, once the condition fires, latches the
// terminal gain for the rest of the flight. No sub-step root-finding: the
// switch lands on the step grid.
class GainRule {
 public:
  static GainRule single(double n) {
    GainRule r;
    r.mode_ = GuidanceMode::kSinglePpn;
    r.pre_gain_ = n;
    r.post_gain_ = n;
    return r;
  }

  // Baseline two-phase rule: orientation gain (2/pi)*|alpha_p0 - theta0|,
  // handover to N_req as soon as N_req >= 2.
  static GainRule baseline(double theta0, double alpha_p0, double alpha_pf_des) {
    if (!requires_two_phase(theta0, alpha_p0, alpha_pf_des)) {
      throw std::invalid_argument("GainRule::baseline: engagement does not need two phases");
    }
    GainRule r;
    r.mode_ = GuidanceMode::kTwoPhaseBaseline;
    r.pre_gain_ = (2.0 / kPi) * std::abs(alpha_p0 - theta0);
    r.threshold_ = 2.0;
    r.alpha_pf_des_ = alpha_pf_des;
    r.latch_required_gain_ = true;
    return r;
  }

  // Shaped two-phase rule: chosen orientation gain, handover to the fixed
  // terminal gain n_f as soon as N_req >= n_f.
  static GainRule shaped(double n_ori, double n_f, double alpha_pf_des) {
    if (!(n_f >= 2.0 && n_f <= 5.0)) {
      throw std::invalid_argument("GainRule::shaped: terminal gain must lie in [2, 5]");
    }
    GainRule r;
    r.mode_ = GuidanceMode::kTwoPhaseShaped;
    r.pre_gain_ = n_ori;
    r.post_gain_ = n_f;
    r.threshold_ = n_f;
    r.alpha_pf_des_ = alpha_pf_des;
    return r;
  }

  static GainRule from_schedule(const GainSchedule& g, const VehicleParams& v) {
    switch (g.mode) {
      case GuidanceMode::kSinglePpn:
        return single(g.n_ori);
      case GuidanceMode::kTwoPhaseBaseline:
        return baseline(v.theta0, v.alpha_p0, g.alpha_pf_des);
      case GuidanceMode::kTwoPhaseShaped:
        return shaped(g.n_ori, g.n_f, g.alpha_pf_des);
    }
    throw std::invalid_argument("GainRule::from_schedule: unknown guidance mode");
  }

  double step_gain(const EngagementState& s) {
    if (mode_ != GuidanceMode::kSinglePpn && !switched_) {
      const double den = alpha_pf_des_ - s.theta;
      // Exact coincidence of the line of sight with the desired terminal
      // angle makes N_req blow up; treat it as an immediate handover rather
      // than poisoning the comparison below.
      const double n_req = den == 0.0
                               ? std::numeric_limits<double>::infinity()
                               : (alpha_pf_des_ - s.alpha_p) / den;
      if (n_req >= threshold_) {
        switched_ = true;
        record_ = SwitchRecord{s.t, s.theta, s.alpha_p};
        if (latch_required_gain_) {
          post_gain_ = n_req;
        }
      }
    }
    return switched_ ? post_gain_ : pre_gain_;
  }

  GuidanceMode mode() const { return mode_; }
  bool requires_switch() const { return mode_ != GuidanceMode::kSinglePpn; }
  bool switched() const { return switched_; }
  const std::optional<SwitchRecord>& switch_record() const { return record_; }

 private:
  GainRule() = default;

  GuidanceMode mode_ = GuidanceMode::kSinglePpn;
  double pre_gain_ = 0.0;
  double post_gain_ = 0.0;
  double threshold_ = 0.0;
  double alpha_pf_des_ = 0.0;
  bool latch_required_gain_ = false;
  bool switched_ = false;
  std::optional<SwitchRecord> record_;
};

}  // namespace ppn
