#pragma once

#include "wecmarl/geometry.hpp"

namespace wecmarl {

// Per-leg power take-off: a passive spring in parallel with a force-limited
// generator, in series with a tension-limited tether.
struct PtoConfig {
  Vec3 spring_stiffness = Vec3::Zero();   // N/m, per leg
  Vec3 rest_extension = Vec3::Zero();     // m, spring natural length per leg
  double gen_force_limit = 0;             // N, symmetric generator force cap
  double tension_min = 0;                 // N, slack threshold
  double tension_max = 0;                 // N, structural limit

  void validate() const;  // throws std::invalid_argument

  // Static tether tension at the given leg lengths with zero command.
  Vec3 static_tension(const Vec3& nominal_lengths) const;
};

// Re-derive rest extensions so each leg carries the requested pretension at
// its nominal length. Used when retuning stiffness to keep the static
// operating point fixed.
PtoConfig with_pretension(PtoConfig cfg, const Vec3& nominal_lengths,
                          const Vec3& pretension);

struct PtoForce {
  double axial_force = 0;        // net force along the leg applied to the buoy
  double gen_force_applied = 0;  // generator contribution after all clamps
  double tension = 0;            // tether tension after clamping
  bool slack = false;            // raw tension fell below the minimum
  bool overload = false;         // raw tension exceeded the maximum
};

// Force law for one leg. The spring force is -k*(g - g0); the command is
// clamped to the generator limit; the resulting tension is clamped to
// [tension_min, tension_max], and any tension clamp overrides the generator
// (the tether cannot push, regardless of what the generator asks for).
PtoForce pto_force(const PtoConfig& cfg, int leg, double f_gen_cmd, double extension);

// Mechanical power absorbed by the generator (positive = captured).
inline double instantaneous_power(double gen_force_applied, double extension_rate) {
  return -gen_force_applied * extension_rate;
}

}  // namespace wecmarl
