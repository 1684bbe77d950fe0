#include "wecmarl/pto.hpp"

#include <algorithm>
#include <stdexcept>

namespace wecmarl {

void PtoConfig::validate() const {
  if (spring_stiffness.minCoeff() <= 0)
    throw std::invalid_argument("pto: spring stiffness must be positive");
  if (rest_extension.minCoeff() <= 0)
    throw std::invalid_argument("pto: rest extension must be positive");
  if (!(gen_force_limit > 0))
    throw std::invalid_argument("pto: generator force limit must be positive");
  if (tension_min < 0)
    throw std::invalid_argument("pto: tension minimum must be non-negative");
  if (!(tension_max > tension_min))
    throw std::invalid_argument("pto: tension maximum must exceed the minimum");
}

Vec3 PtoConfig::static_tension(const Vec3& nominal_lengths) const {
  Vec3 t;
  for (int k = 0; k < 3; ++k)
    t[k] = spring_stiffness[k] * (nominal_lengths[k] - rest_extension[k]);
  return t;
}

PtoConfig with_pretension(PtoConfig cfg, const Vec3& nominal_lengths,
                          const Vec3& pretension) {
  for (int k = 0; k < 3; ++k) {
    cfg.rest_extension[k] =
        nominal_lengths[k] - pretension[k] / cfg.spring_stiffness[k];
  }
  return cfg;
}

PtoForce pto_force(const PtoConfig& cfg, int leg, double f_gen_cmd,
                   double extension) {
  const double f_spring =
      -cfg.spring_stiffness[leg] * (extension - cfg.rest_extension[leg]);
  const double f_gen =
      std::clamp(f_gen_cmd, -cfg.gen_force_limit, cfg.gen_force_limit);

  PtoForce out;
  const double tension_raw = -(f_spring + f_gen);
  out.slack = tension_raw < cfg.tension_min;
  out.overload = tension_raw > cfg.tension_max;
  out.tension = std::clamp(tension_raw, cfg.tension_min, cfg.tension_max);
  // The tension clamp wins over the generator limit: back out whatever
  // generator force realizes the clamped tension alongside the spring.
  out.gen_force_applied =
      (out.slack || out.overload) ? -out.tension - f_spring : f_gen;
  out.axial_force = f_spring + out.gen_force_applied;  // == -tension
  return out;
}

}  // namespace wecmarl
