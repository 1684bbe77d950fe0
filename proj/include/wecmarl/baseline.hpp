#pragma once

#include "wecmarl/geometry.hpp"
#include "wecmarl/pto.hpp"

namespace wecmarl {

// Passive benchmark controller: each generator opposes its own leg rate with
// a fixed damping coefficient.
struct SdController {
  double damping = 0;  // N s / m

  Vec3 action(const Vec3& extension_rate) const {
    return -damping * extension_rate;
  }
};

struct ResonantTuning {
  PtoConfig pto;                // retuned springs, pretension preserved
  double damping = 0;           // impedance-matched generator damping
  double natural_period_s = 0;  // achieved heave natural period
  double heave_stiffness = 0;   // effective stiffness at equilibrium
};

// Effective linear heave stiffness about equilibrium for a uniform spring
// stiffness k (rest extensions re-derived so the static tension matches the
// base config). Measured by central differencing the static generalized
// heave force, so it includes the geometric stiffness of the taut legs.
double effective_heave_stiffness(const WecGeometry& geo, const PtoConfig& base,
                                 double spring_stiffness);

// Choose spring stiffness so the heave mode sits at the given period, and
// generator damping so the modal damping matches the radiation damping
// (impedance matching at resonance). Throws std::domain_error when no
// physical spring achieves the period.
ResonantTuning tune_for_resonance(const WecGeometry& geo, const PtoConfig& base,
                                  double peak_period_s);

// Mean absorbed-power ceiling of any linear heave absorber under a regular
// wave of the given amplitude and period: |F_exc|^2 / (8 B33).
double impedance_matching_bound(const WecGeometry& geo, double amplitude_m,
                                double period_s);

}  // namespace wecmarl
