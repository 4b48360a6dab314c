#pragma once

#include <numbers>

// Angle helpers. All angles inside the library are radians; degrees appear
// only at I/O boundaries (CLI flags, CSV columns, dataset grids).

namespace ppn {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

}  // namespace ppn
