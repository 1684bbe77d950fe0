#include "wecmarl/baseline.hpp"

#include <cmath>
#include <stdexcept>

namespace wecmarl {

namespace {

// Static generalized heave force (hydrostatic + tethers) at heave offset z,
// zero command. The constant balance force drops out of derivatives.
double static_heave_force(const WecGeometry& geo, const PtoConfig& pto,
                          double z) {
  Vec6 pose = Vec6::Zero();
  pose[2] = z;
  const Vec3 ext = tether_extension(geo, pose);
  const Mat36 jac = tether_jacobian(geo, pose);
  Vec3 axial;
  for (int k = 0; k < 3; ++k)
    axial[k] = pto_force(pto, k, 0.0, ext[k]).axial_force;
  const Vec6 f = -geo.hydrostatic_stiffness * pose + jac.transpose() * axial;
  return f[2];
}

PtoConfig retuned(const WecGeometry& geo, const PtoConfig& base,
                  double spring_stiffness) {
  PtoConfig cfg = base;
  cfg.spring_stiffness = Vec3::Constant(spring_stiffness);
  const Vec3 lengths = geo.nominal_leg_lengths();
  return with_pretension(cfg, lengths, base.static_tension(lengths));
}

}  // namespace

double effective_heave_stiffness(const WecGeometry& geo, const PtoConfig& base,
                                 double spring_stiffness) {
  if (!(spring_stiffness > 0))
    throw std::domain_error("effective_heave_stiffness: stiffness must be > 0");
  const PtoConfig cfg = retuned(geo, base, spring_stiffness);
  const double h = 1e-4;
  const double fp = static_heave_force(geo, cfg, h);
  const double fm = static_heave_force(geo, cfg, -h);
  return -(fp - fm) / (2.0 * h);
}

ResonantTuning tune_for_resonance(const WecGeometry& geo, const PtoConfig& base,
                                  double peak_period_s) {
  if (!(peak_period_s > 0))
    throw std::domain_error("tune_for_resonance: period must be > 0");
  const double omega = 2.0 * M_PI / peak_period_s;
  const double m33 = geo.total_mass()(2, 2);
  const double target = m33 * omega * omega;

  // With pretension held fixed the effective stiffness is affine in the
  // spring constant, so one secant step lands on the root exactly.
  const double k1 = base.spring_stiffness.mean();
  const double k2 = 2.0 * k1;
  const double e1 = effective_heave_stiffness(geo, base, k1) - target;
  const double e2 = effective_heave_stiffness(geo, base, k2) - target;
  if (e1 == e2)
    throw std::domain_error("tune_for_resonance: stiffness has no heave effect");
  const double k_star = k1 - e1 * (k2 - k1) / (e2 - e1);
  if (!(k_star > 0))
    throw std::domain_error(
        "tune_for_resonance: period unreachable with a positive spring");

  ResonantTuning out;
  out.pto = retuned(geo, base, k_star);
  try {
    out.pto.validate();  // rejects non-physical rest extensions
  } catch (const std::invalid_argument& e) {
    throw std::domain_error(std::string("tune_for_resonance: ") + e.what());
  }

  const Mat36 j0 = tether_jacobian(geo, Vec6::Zero());
  const double kappa = j0.col(2).squaredNorm();  // heave sensitivity of legs
  if (!(kappa > 0))
    throw std::domain_error("tune_for_resonance: legs orthogonal to heave");
  out.damping = geo.radiation_damping(2, 2) / kappa;
  out.heave_stiffness = effective_heave_stiffness(geo, base, k_star);
  out.natural_period_s = 2.0 * M_PI * std::sqrt(m33 / out.heave_stiffness);
  return out;
}

double impedance_matching_bound(const WecGeometry& geo, double amplitude_m,
                                double period_s) {
  if (!(amplitude_m >= 0) || !(period_s > 0))
    throw std::domain_error("impedance_matching_bound: invalid wave");
  const double omega = 2.0 * M_PI / period_s;
  const double b33 = geo.radiation_damping(2, 2);
  if (!(b33 > 0))
    throw std::domain_error("impedance_matching_bound: no radiation damping");
  // Excitation phasor for elevation a*cos(wt): in-phase and quadrature parts.
  const Eigen::RowVector3d gains = geo.excitation_gain.row(2);
  const double in_phase = gains[0] - omega * omega * gains[2];
  const double quad = gains[1] * omega;
  const double f_amp = amplitude_m * std::hypot(in_phase, quad);
  return f_amp * f_amp / (8.0 * b33);
}

}  // namespace wecmarl
