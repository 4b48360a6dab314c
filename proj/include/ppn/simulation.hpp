#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppn/guidance.hpp"
#include "ppn/kinematics.hpp"

// Closed-loop engagement simulation and the guidance-effort cost
//   J = integral of a_p^2 dt
// accumulated by trapezoid over every integration step (never over the
// decimated trajectory log).

namespace ppn {

enum class Verdict : std::uint8_t {
  kFeasible,   // captured, handed over (if required), terminal angle on target
  kTimeout,    // not captured before t_max
  kNoSwitch,   // captured but the two-phase handover never fired
  kAngleMiss,  // captured and switched, terminal angle off by more than the tolerance
};

std::string verdict_name(Verdict v);

// Terminal-angle acceptance tolerance.
inline constexpr double kTerminalAngleTolRad = deg_to_rad(0.5);

struct SimulationOptions {
  // Record every log_stride-th sample into the trajectory (first and last
  // samples are always kept). 0 disables trajectory logging entirely.
  int log_stride = 1;
};

struct SimulationOutcome {
  Verdict verdict = Verdict::kTimeout;
  bool captured = false;
  double j = 0.0;                   // guidance effort [m^2/s^3]
  double t_f = 0.0;                 // terminal (or cutoff) time [s]
  double alpha_pf = 0.0;            // achieved terminal heading [rad]
  double terminal_angle_error = 0.0;  // |alpha_pf - alpha_pf_des| [rad], two-phase only
  std::optional<SwitchRecord> switch_state;
  std::vector<TrajectorySample> trajectory;
};

// Runs one engagement under the given schedule. Contract violations in the
// inputs throw; anything that goes wrong with the engagement itself (timeout,
// missed handover, missed terminal angle) is reported as a verdict.
SimulationOutcome simulate(const VehicleParams& v, const GainSchedule& gains,
                           const IntegratorConfig& cfg,
                           const SimulationOptions& opts = {});

// Trapezoidal integral of a_p^2 over possibly non-uniform samples. Requires
// at least two samples with non-decreasing times.
double effort_integral(std::span<const double> t, std::span<const double> a_p);
double effort_integral(std::span<const TrajectorySample> samples);

// Writes a trajectory as CSV with header t,R,theta_deg,alpha_p_deg,a_p.
void write_trajectory_csv(const std::filesystem::path& path,
                          std::span<const TrajectorySample> samples);

}  // namespace ppn
