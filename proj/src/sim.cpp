#include "wecmarl/sim.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace wecmarl {

void SimConfig::validate() const {
  if (!(dt_sim > 0)) throw std::invalid_argument("sim: dt_sim must be positive");
  if (!(dt_control > 0))
    throw std::invalid_argument("sim: dt_control must be positive");
  const double ratio = dt_control / dt_sim;
  const double n = std::round(ratio);
  if (n < 1 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument(
        "sim: dt_control must be an integer multiple of dt_sim");
}

int SimConfig::substeps_per_control() const {
  return static_cast<int>(std::round(dt_control / dt_sim));
}

ObservationLayout ObservationLayout::stage(int n) {
  if (n < 1 || n > 4)
    throw std::invalid_argument("observation stage must be in 1..4");
  ObservationLayout l;
  l.tether = n >= 2;
  l.accel = n >= 3;
  l.tension = n >= 4;
  return l;
}

ObservationScales make_observation_scales(const WecGeometry& geo,
                                          const PtoConfig& pto) {
  ObservationScales sc;
  const Vec3 lengths = geo.nominal_leg_lengths();
  sc.extension = lengths.mean();
  sc.tension_center = pto.static_tension(lengths);
  sc.tension = std::max(2.0 * pto.gen_force_limit, 1.0);
  return sc;
}

WecState mirror_state(const WecState& s) {
  WecState m = s;
  m.pose = mirror_vec6(s.pose);
  m.vel = mirror_vec6(s.vel);
  m.acc = mirror_vec6(s.acc);
  m.ext = swap_back_legs(s.ext);
  m.ext_rate = swap_back_legs(s.ext_rate);
  m.ext_acc = swap_back_legs(s.ext_acc);
  m.tension = swap_back_legs(s.tension);
  return m;
}

Eigen::VectorXd observation(const WecState& s, const WaveSample& w,
                            const ObservationLayout& layout,
                            const ObservationScales& sc) {
  Eigen::VectorXd o(layout.dimension());
  int i = 0;
  auto put6 = [&](const Vec6& v, double lin, double ang) {
    for (int j = 0; j < 3; ++j) o[i++] = v[j] / lin;
    for (int j = 3; j < 6; ++j) o[i++] = v[j] / ang;
  };
  auto put3 = [&](const Vec3& v, double scale) {
    for (int j = 0; j < 3; ++j) o[i++] = v[j] / scale;
  };
  put6(s.pose, sc.position, sc.angle);
  put6(s.vel, sc.lin_velocity, sc.ang_velocity);
  if (layout.accel) put6(s.acc, sc.lin_accel, sc.ang_accel);
  if (layout.tether) {
    put3(s.ext, sc.extension);
    put3(s.ext_rate, sc.extension_rate);
  }
  if (layout.accel) put3(s.ext_acc, sc.extension_accel);
  o[i++] = w.elevation / sc.wave;
  o[i++] = w.rate / sc.wave_rate;
  if (layout.accel) o[i++] = w.acceleration / sc.wave_accel;
  if (layout.tension) {
    for (int j = 0; j < 3; ++j)
      o[i++] = (s.tension[j] - sc.tension_center[j]) / sc.tension;
  }
  return o;
}

Eigen::VectorXd mirror_observation(const Eigen::VectorXd& obs,
                                   const ObservationLayout& layout) {
  if (obs.size() != layout.dimension())
    throw std::invalid_argument("mirror_observation: size does not match layout");
  Eigen::VectorXd o = obs;
  int i = 0;
  auto flip6 = [&] {   // negate sway/roll/yaw components
    o[i + 1] = -obs[i + 1];
    o[i + 3] = -obs[i + 3];
    o[i + 5] = -obs[i + 5];
    i += 6;
  };
  auto swap3 = [&] {   // exchange the back-leg pair
    o[i + 1] = obs[i + 2];
    o[i + 2] = obs[i + 1];
    i += 3;
  };
  flip6();  // pose
  flip6();  // velocity
  if (layout.accel) flip6();
  if (layout.tether) {
    swap3();
    swap3();
  }
  if (layout.accel) swap3();
  i += layout.accel ? 3 : 2;  // wave scalars are symmetric
  if (layout.tension) swap3();
  return o;
}

namespace {

std::vector<WaveSample> build_wave_table(const WaveEpisode& ep, double dt_half,
                                         int n_samples) {
  std::vector<WaveSample> table(static_cast<size_t>(n_samples));
  // Phasor recursion per component with periodic exact resync, so the table
  // build stays O(components * samples) without accumulating phase drift.
  constexpr int kResync = 256;
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (const auto& comp : ep.components) {
    const double w = kTwoPi * comp.frequency_hz;
    const double a = comp.amplitude_m;
    const double delta = w * dt_half;
    const double cd = std::cos(delta);
    const double sd = std::sin(delta);
    double c = std::cos(comp.phase_rad);
    double s = std::sin(comp.phase_rad);
    for (int j = 0; j < n_samples; ++j) {
      if (j > 0 && j % kResync == 0) {
        const double arg = w * (j * dt_half) + comp.phase_rad;
        c = std::cos(arg);
        s = std::sin(arg);
      }
      table[static_cast<size_t>(j)].elevation += a * c;
      table[static_cast<size_t>(j)].rate -= a * w * s;
      table[static_cast<size_t>(j)].acceleration -= a * w * w * c;
      const double cn = c * cd - s * sd;
      s = s * cd + c * sd;
      c = cn;
    }
  }
  return table;
}

}  // namespace

WecSimulator::WecSimulator(WecGeometry geometry, PtoConfig pto, SimConfig sim,
                           WaveEpisode wave)
    : geometry_(std::move(geometry)),
      pto_(std::move(pto)),
      sim_(sim),
      wave_(std::move(wave)) {
  geometry_.validate();
  pto_.validate();
  sim_.validate();
  wave_.validate();

  mass_llt_.compute(geometry_.total_mass());
  nominal_lengths_ = geometry_.nominal_leg_lengths();
  static_tension_ = pto_.static_tension(nominal_lengths_);
  for (int k = 0; k < 3; ++k) {
    if (!(static_tension_[k] > pto_.tension_min &&
          static_tension_[k] < pto_.tension_max))
      throw std::invalid_argument(
          "sim: static tension must lie strictly inside the tension limits");
  }

  // Cancel the net tether pull at rest so zero pose / zero command is an
  // exact fixed point of the dynamics.
  const Mat36 j0 = tether_jacobian(geometry_, Vec6::Zero());
  Vec3 axial0;
  for (int k = 0; k < 3; ++k)
    axial0[k] = pto_force(pto_, k, 0.0, nominal_lengths_[k]).axial_force;
  static_balance_ = -(j0.transpose() * axial0);

  rest_spring_energy_ = 0;
  for (int k = 0; k < 3; ++k) {
    const double stretch = nominal_lengths_[k] - pto_.rest_extension[k];
    rest_spring_energy_ += 0.5 * pto_.spring_stiffness[k] * stretch * stretch;
  }

  max_steps_ = static_cast<int>(
      std::floor(wave_.duration_s / sim_.dt_control + 1e-9));
  if (max_steps_ < 1)
    throw std::invalid_argument("sim: wave episode shorter than one control step");

  const int n_half =
      2 * sim_.substeps_per_control() * max_steps_ + 1;
  wave_table_ = build_wave_table(wave_, sim_.dt_sim / 2.0, n_half);

  reset();
}

void WecSimulator::reset() {
  pose_.setZero();
  vel_.setZero();
  substeps_done_ = 0;
  steps_taken_ = 0;
  ledger_ = EnergyLedger{};
  refresh_state_cache(Vec3::Zero());
}

void WecSimulator::set_state(const Vec6& pose, const Vec6& vel) {
  pose_ = pose;
  vel_ = vel;
  refresh_state_cache(Vec3::Zero());
}

WaveSample WecSimulator::wave_now() const {
  return wave_sample(2 * substeps_done_);
}

WecSimulator::DynEval WecSimulator::eval_dynamics(const Vec6& pose,
                                                  const Vec6& vel,
                                                  int half_index,
                                                  const Vec3& cmds) const {
  DynEval d;
  d.ext = tether_extension(geometry_, pose);
  const Mat36 jac = tether_jacobian(geometry_, pose);
  d.ext_rate = jac * vel;

  Vec3 axial;
  for (int k = 0; k < 3; ++k) {
    const PtoForce f = pto_force(pto_, k, cmds[k], d.ext[k]);
    axial[k] = f.axial_force;
    d.gen_force[k] = f.gen_force_applied;
    d.tension[k] = f.tension;
    d.slack = d.slack || f.slack;
    d.overload = d.overload || f.overload;
    d.p_gen[k] = instantaneous_power(f.gen_force_applied, d.ext_rate[k]);
  }

  const WaveSample& w = wave_sample(half_index);
  const Vec6 f_exc =
      geometry_.excitation_gain * Vec3(w.elevation, w.rate, w.acceleration);
  const Vec6 rhs = f_exc - geometry_.radiation_damping * vel -
                   geometry_.hydrostatic_stiffness * pose +
                   jac.transpose() * axial + static_balance_;
  d.acc = mass_llt_.solve(rhs);
  d.p_exc = f_exc.dot(vel);
  d.p_rad = vel.dot(geometry_.radiation_damping * vel);
  return d;
}

void WecSimulator::substep_sie(int substep_index, const Vec3& cmds,
                               DynEval& start_eval) {
  const double h = sim_.dt_sim;
  vel_ += h * start_eval.acc;
  pose_ += h * vel_;
  DynEval end = eval_dynamics(pose_, vel_, 2 * substep_index + 2, cmds);
  // Trapezoid quadrature of the power flows across the substep.
  ledger_.excitation_work += 0.5 * h * (start_eval.p_exc + end.p_exc);
  ledger_.radiation_dissipated += 0.5 * h * (start_eval.p_rad + end.p_rad);
  ledger_.generator_captured += 0.5 * h * (start_eval.p_gen + end.p_gen);
  start_eval = end;
}

void WecSimulator::substep_rk4(int substep_index, const Vec3& cmds) {
  const double h = sim_.dt_sim;
  const int b = 2 * substep_index;
  const Vec6 p0 = pose_;
  const Vec6 v0 = vel_;

  const DynEval k1 = eval_dynamics(p0, v0, b, cmds);
  const Vec6 pd1 = v0;
  const Vec6 pd2 = v0 + 0.5 * h * k1.acc;
  const DynEval k2 = eval_dynamics(p0 + 0.5 * h * pd1, pd2, b + 1, cmds);
  const Vec6 pd3 = v0 + 0.5 * h * k2.acc;
  const DynEval k3 = eval_dynamics(p0 + 0.5 * h * pd2, pd3, b + 1, cmds);
  const Vec6 pd4 = v0 + h * k3.acc;
  const DynEval k4 = eval_dynamics(p0 + h * pd3, pd4, b + 2, cmds);

  pose_ = p0 + (h / 6.0) * (pd1 + 2.0 * pd2 + 2.0 * pd3 + pd4);
  vel_ = v0 + (h / 6.0) * (k1.acc + 2.0 * k2.acc + 2.0 * k3.acc + k4.acc);
  // The power flows ride along as quadrature states of the same RK4 pass, so
  // the energy ledger converges at the same order as the trajectory.
  ledger_.excitation_work +=
      (h / 6.0) * (k1.p_exc + 2.0 * k2.p_exc + 2.0 * k3.p_exc + k4.p_exc);
  ledger_.radiation_dissipated +=
      (h / 6.0) * (k1.p_rad + 2.0 * k2.p_rad + 2.0 * k3.p_rad + k4.p_rad);
  ledger_.generator_captured +=
      (h / 6.0) * (k1.p_gen + 2.0 * k2.p_gen + 2.0 * k3.p_gen + k4.p_gen);
}

ControlStepResult WecSimulator::step(const Vec3& gen_cmds) {
  if (steps_taken_ >= max_steps_)
    throw std::domain_error("sim: episode exhausted");

  const Vec3 captured_before = ledger_.generator_captured;
  ControlStepResult res;
  const int n = sim_.substeps_per_control();

  if (sim_.integrator == SimConfig::Integrator::SemiImplicitEuler) {
    DynEval carry = eval_dynamics(pose_, vel_, 2 * substeps_done_, gen_cmds);
    res.slack_event = carry.slack;
    res.overload_event = carry.overload;
    for (int i = 0; i < n; ++i) {
      substep_sie(substeps_done_, gen_cmds, carry);
      ++substeps_done_;
      res.slack_event = res.slack_event || carry.slack;
      res.overload_event = res.overload_event || carry.overload;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      substep_rk4(substeps_done_, gen_cmds);
      ++substeps_done_;
    }
  }

  ++steps_taken_;
  refresh_state_cache(gen_cmds);
  res.slack_event = res.slack_event || state_.slack;
  res.overload_event = res.overload_event || state_.overload;
  res.leg_energy = ledger_.generator_captured - captured_before;
  res.done = steps_taken_ >= max_steps_;
  return res;
}

Vec3 WecSimulator::tether_acc(const Vec6& pose, const Vec6& vel,
                              const Vec6& acc) const {
  const Mat36 jac = tether_jacobian(geometry_, pose);
  Vec3 out = jac * acc;
  const double vmax = vel.cwiseAbs().maxCoeff();
  if (vmax > 1e-12) {
    // Directional finite difference of the Jacobian along the velocity gives
    // the J-dot * v convective term.
    const double h = 1e-6 / vmax;
    const Mat36 jp = tether_jacobian(geometry_, pose + h * vel);
    const Mat36 jm = tether_jacobian(geometry_, pose - h * vel);
    out += ((jp - jm) / (2.0 * h)) * vel;
  }
  return out;
}

void WecSimulator::refresh_state_cache(const Vec3& cmds) {
  const DynEval d = eval_dynamics(pose_, vel_, 2 * substeps_done_, cmds);
  state_.pose = pose_;
  state_.vel = vel_;
  state_.acc = d.acc;
  state_.ext = d.ext;
  state_.ext_rate = d.ext_rate;
  state_.ext_acc = tether_acc(pose_, vel_, d.acc);
  state_.tension = d.tension;
  state_.slack = d.slack;
  state_.overload = d.overload;
  state_.time_s = substeps_done_ * sim_.dt_sim;
}

double WecSimulator::mechanical_energy() const {
  const double ke = 0.5 * vel_.dot(geometry_.total_mass() * vel_);
  const double pe_hydro =
      0.5 * pose_.dot(geometry_.hydrostatic_stiffness * pose_);
  const Vec3 ext = tether_extension(geometry_, pose_);
  double pe_spring = -rest_spring_energy_;
  for (int k = 0; k < 3; ++k) {
    const double stretch = ext[k] - pto_.rest_extension[k];
    pe_spring += 0.5 * pto_.spring_stiffness[k] * stretch * stretch;
  }
  const double pe_static = -static_balance_.dot(pose_);
  return ke + pe_hydro + pe_spring + pe_static;
}

Eigen::VectorXd WecSimulator::observe(const ObservationLayout& layout,
                                      const ObservationScales& scales) const {
  return observation(state_, wave_now(), layout, scales);
}

}  // namespace wecmarl
