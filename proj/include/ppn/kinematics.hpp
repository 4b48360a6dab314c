#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

// Planar pursuer-vs-stationary-target engagement kinematics.
//
// State is expressed in a polar frame centred on the target:
//   R        line-of-sight range [m]
//   theta    line-of-sight angle [rad]
//   alpha_p  pursuer heading [rad]
// The pursuer moves at constant speed and is steered by a lateral
// acceleration command applied normal to its velocity.

namespace ppn {

struct EngagementState {
  double t = 0.0;        // [s]
  double R = 0.0;        // [m]
  double theta = 0.0;    // [rad]
  double alpha_p = 0.0;  // [rad]
};

struct VehicleParams {
  double v_p = 50.0;       // pursuer speed [m/s], constant
  double r0 = 2500.0;      // initial range [m]
  double theta0 = 0.0;     // initial line-of-sight angle [rad]
  double alpha_p0 = 0.0;   // initial heading [rad]
};

struct IntegratorConfig {
  double dt = 0.01;        // fixed integration step [s]
  double r_capture = 1.0;  // capture radius [m]
  double t_max = 200.0;    // wall-clock cutoff for the engagement [s]
};

struct Derivatives {
  double r_dot = 0.0;        // [m/s]
  double theta_dot = 0.0;    // [rad/s]
  double alpha_p_dot = 0.0;  // [rad/s]
};

enum class Termination : std::uint8_t { kCaptured, kTimedOut };

// Point-mass relative motion. a_p is the lateral acceleration command.
// Requires R > 0; the line-of-sight rate diverges as R -> 0.
inline Derivatives engagement_derivatives(const EngagementState& s,
                                          double a_p,
                                          const VehicleParams& v) {
  if (!(s.R > 0.0)) {
    throw std::domain_error("engagement_derivatives: range must be positive");
  }
  const double lead = s.alpha_p - s.theta;
  Derivatives d;
  d.r_dot = -v.v_p * std::cos(lead);
  d.theta_dot = -(v.v_p / s.R) * std::sin(lead);
  d.alpha_p_dot = a_p / v.v_p;
  return d;
}

inline double line_of_sight_rate(const EngagementState& s, const VehicleParams& v) {
  if (!(s.R > 0.0)) {
    throw std::domain_error("line_of_sight_rate: range must be positive");
  }
  return -(v.v_p / s.R) * std::sin(s.alpha_p - s.theta);
}

// One classical RK4 step of the engagement ODE under a state-feedback
// acceleration command. The command callable is evaluated at each sub-step
// state and must return a finite value there.
template <class CommandEval>
EngagementState rk4_step(const EngagementState& s, CommandEval&& a_p,
                         const VehicleParams& v, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("rk4_step: dt must be positive");
  }
  auto eval = [&](const EngagementState& q) {
    if (!(q.R > 0.0)) {
      throw std::domain_error("rk4_step: sub-step range collapsed to zero");
    }
    return engagement_derivatives(q, a_p(q), v);
  };
  auto advance = [&](const Derivatives& d, double h) {
    EngagementState q = s;
    q.t += h;
    q.R += h * d.r_dot;
    q.theta += h * d.theta_dot;
    q.alpha_p += h * d.alpha_p_dot;
    return q;
  };

  const Derivatives k1 = eval(s);
  const Derivatives k2 = eval(advance(k1, 0.5 * dt));
  const Derivatives k3 = eval(advance(k2, 0.5 * dt));
  const Derivatives k4 = eval(advance(k3, dt));

  EngagementState out = s;
  out.t += dt;
  out.R += dt / 6.0 * (k1.r_dot + 2.0 * k2.r_dot + 2.0 * k3.r_dot + k4.r_dot);
  out.theta += dt / 6.0 *
               (k1.theta_dot + 2.0 * k2.theta_dot + 2.0 * k3.theta_dot + k4.theta_dot);
  out.alpha_p += dt / 6.0 * (k1.alpha_p_dot + 2.0 * k2.alpha_p_dot +
                             2.0 * k3.alpha_p_dot + k4.alpha_p_dot);
  return out;
}

struct TrajectorySample {
  double t = 0.0;        // [s]
  double R = 0.0;        // [m]
  double theta = 0.0;    // [rad]
  double alpha_p = 0.0;  // [rad]
  double a_p = 0.0;      // [m/s^2]
};

// Integrates the engagement under a per-step gain policy until capture
// (R <= r_capture) or timeout (t reaching t_max).
//
// GainPolicy: double operator()(const EngagementState&) — called exactly once
// per integration step with the step-start state; the returned navigation
// gain is held fixed across that step's RK4 sub-steps. Sink: called with
// (state, a_p) for the initial state, after every accepted step, and for the
// interpolated capture state.
//
// Capture inside a step is resolved by linear interpolation in time between
// the bracketing step endpoints, so the reported terminal state sits on
// R = r_capture to first order.
template <class GainPolicy, class Sink>
Termination run_until_capture(const EngagementState& s0, GainPolicy&& gain,
                              const VehicleParams& v, const IntegratorConfig& cfg,
                              Sink&& sink) {
  if (!(s0.R > cfg.r_capture)) {
    throw std::invalid_argument("run_until_capture: initial range inside capture radius");
  }
  if (!(cfg.dt > 0.0) || !(cfg.t_max > 0.0) || !(cfg.r_capture > 0.0)) {
    throw std::invalid_argument("run_until_capture: non-positive integrator config");
  }

  const auto max_steps =
      static_cast<std::int64_t>(std::ceil(cfg.t_max / cfg.dt - 1e-9));

  EngagementState s = s0;
  double n = gain(s);
  auto command = [&](const EngagementState& q) {
    return n * v.v_p * line_of_sight_rate(q, v);
  };
  sink(s, command(s));

  for (std::int64_t k = 0; k < max_steps; ++k) {
    EngagementState next = rk4_step(s, command, v, cfg.dt);
    next.t = s0.t + static_cast<double>(k + 1) * cfg.dt;  // avoid drift in t
    if (!std::isfinite(next.R) || !std::isfinite(next.theta) ||
        !std::isfinite(next.alpha_p)) {
      throw std::domain_error("run_until_capture: state became non-finite");
    }

    if (next.R <= cfg.r_capture) {
      // Linear-in-t interpolation onto the capture sphere.
      const double lam = (s.R - cfg.r_capture) / (s.R - next.R);
      EngagementState hit;
      hit.t = s.t + lam * cfg.dt;
      hit.R = cfg.r_capture;
      hit.theta = s.theta + lam * (next.theta - s.theta);
      hit.alpha_p = s.alpha_p + lam * (next.alpha_p - s.alpha_p);
      sink(hit, command(hit));
      return Termination::kCaptured;
    }

    s = next;
    n = gain(s);
    sink(s, command(s));
  }
  return Termination::kTimedOut;
}

}  // namespace ppn
