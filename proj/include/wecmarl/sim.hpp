#pragma once

#include <vector>

#include "wecmarl/geometry.hpp"
#include "wecmarl/pto.hpp"
#include "wecmarl/wave.hpp"

namespace wecmarl {

struct SimConfig {
  double dt_sim = 0.05;      // inner integration step, s
  double dt_control = 0.2;   // control interval, s (integer multiple of dt_sim)
  enum class Integrator { SemiImplicitEuler, Rk4 };
  Integrator integrator = Integrator::SemiImplicitEuler;

  void validate() const;  // throws std::invalid_argument
  int substeps_per_control() const;
};

// Which instrument groups are visible to the controller. Blocks mimic the
// staged sensor build-out: pose+wave, then tether lengths, then
// accelerations, then tensions.
struct ObservationLayout {
  bool tether = true;    // leg extensions and rates (+6)
  bool accel = true;     // body, leg, and wave accelerations (+10)
  bool tension = true;   // leg tensions (+3)

  int dimension() const {
    return 14 + (tether ? 6 : 0) + (accel ? 10 : 0) + (tension ? 3 : 0);
  }
  // Cumulative stages 1..4 of the sensor build-out.
  static ObservationLayout stage(int n);
};

struct ObservationScales {
  double position = 1.0;         // m
  double angle = 0.25;           // rad
  double lin_velocity = 1.0;     // m/s
  double ang_velocity = 0.25;    // rad/s
  double lin_accel = 1.0;        // m/s^2
  double ang_accel = 0.25;       // rad/s^2
  double extension = 20.0;       // m; raw scaling, nonzero at rest
  double extension_rate = 1.0;   // m/s
  double extension_accel = 1.0;  // m/s^2
  double wave = 1.0;             // m
  double wave_rate = 1.0;        // m/s
  double wave_accel = 1.0;       // m/s^2
  double tension = 1e5;          // N, applied after centering
  Vec3 tension_center = Vec3::Zero();
};

// Scales adapted to a concrete plant: extensions scaled by the nominal leg
// length, tensions centered on the static pretension.
ObservationScales make_observation_scales(const WecGeometry& geo,
                                          const PtoConfig& pto);

struct WecState {
  Vec6 pose = Vec6::Zero();  // displacement from equilibrium
  Vec6 vel = Vec6::Zero();
  Vec6 acc = Vec6::Zero();
  Vec3 ext = Vec3::Zero();       // leg extensions
  Vec3 ext_rate = Vec3::Zero();
  Vec3 ext_acc = Vec3::Zero();
  Vec3 tension = Vec3::Zero();
  double time_s = 0;
  bool slack = false;     // any leg at the tension floor right now
  bool overload = false;  // any leg at the tension ceiling right now
};

// Reflect a state about the x-z symmetry plane: sway/roll/yaw components
// flip sign and the back-leg pair swaps.
WecState mirror_state(const WecState& s);

// Cumulative energy bookkeeping since reset, in joules.
struct EnergyLedger {
  double excitation_work = 0;      // done on the body by the wave force
  double radiation_dissipated = 0; // lost to radiation damping
  Vec3 generator_captured = Vec3::Zero();  // absorbed per leg

  double total_captured() const { return generator_captured.sum(); }
};

struct ControlStepResult {
  Vec3 leg_energy = Vec3::Zero();  // captured this step, per leg (J)
  bool slack_event = false;        // tension floor hit during the step
  bool overload_event = false;     // tension ceiling hit during the step
  bool done = false;               // episode has no room for another step
};

// Flatten a state + wave sample into the controller observation.
Eigen::VectorXd observation(const WecState& s, const WaveSample& w,
                            const ObservationLayout& layout,
                            const ObservationScales& scales);

// Mirror a flat observation about the symmetry plane (same transform as
// mirror_state, applied component-wise through the layout).
Eigen::VectorXd mirror_observation(const Eigen::VectorXd& obs,
                                   const ObservationLayout& layout);

// Surrogate 6-DOF dynamics of the tethered buoy under one wave episode.
// Equilibrium (zero pose, zero command) is an exact fixed point: the
// constant net tether pull at rest is cancelled at construction.
class WecSimulator {
 public:
  WecSimulator(WecGeometry geometry, PtoConfig pto, SimConfig sim,
               WaveEpisode wave);

  void reset();
  // Re-seed the dynamic state in place for decay and perturbation studies.
  // Counters and the energy ledger are untouched; cached accelerations are
  // refreshed assuming a zero command.
  void set_state(const Vec6& pose, const Vec6& vel);
  // Hold the given per-leg generator commands for one control interval.
  // Throws std::domain_error if the episode is already exhausted.
  ControlStepResult step(const Vec3& gen_cmds);

  const WecState& state() const { return state_; }
  WaveSample wave_now() const;
  const EnergyLedger& ledger() const { return ledger_; }

  // Kinetic + elastic + hydrostatic + static-balance potential, zeroed at
  // equilibrium. Balances the ledger: E(t) - E(0) = W_exc - E_rad - E_gen.
  double mechanical_energy() const;

  int steps_taken() const { return steps_taken_; }
  int max_steps() const { return max_steps_; }
  double time() const { return state_.time_s; }

  Vec3 nominal_lengths() const { return nominal_lengths_; }
  Vec3 static_tension() const { return static_tension_; }
  Vec6 static_balance_force() const { return static_balance_; }

  const WecGeometry& geometry() const { return geometry_; }
  const PtoConfig& pto() const { return pto_; }
  const SimConfig& sim_config() const { return sim_; }
  const WaveEpisode& wave() const { return wave_; }

  Eigen::VectorXd observe(const ObservationLayout& layout,
                          const ObservationScales& scales) const;

 private:
  struct DynEval {
    Vec6 acc = Vec6::Zero();
    Vec3 ext = Vec3::Zero();
    Vec3 ext_rate = Vec3::Zero();
    Vec3 gen_force = Vec3::Zero();
    Vec3 tension = Vec3::Zero();
    bool slack = false;
    bool overload = false;
    double p_exc = 0;  // instantaneous excitation power
    double p_rad = 0;  // instantaneous radiation dissipation
    Vec3 p_gen = Vec3::Zero();  // instantaneous captured power per leg
  };

  DynEval eval_dynamics(const Vec6& pose, const Vec6& vel, int half_index,
                        const Vec3& cmds) const;
  void substep_sie(int substep_index, const Vec3& cmds, DynEval& start_eval);
  void substep_rk4(int substep_index, const Vec3& cmds);
  Vec3 tether_acc(const Vec6& pose, const Vec6& vel, const Vec6& acc) const;
  void refresh_state_cache(const Vec3& cmds);
  const WaveSample& wave_sample(int half_index) const {
    return wave_table_[static_cast<size_t>(half_index)];
  }

  WecGeometry geometry_;
  PtoConfig pto_;
  SimConfig sim_;
  WaveEpisode wave_;

  Eigen::LLT<Mat6> mass_llt_;
  Vec3 nominal_lengths_ = Vec3::Zero();
  Vec3 static_tension_ = Vec3::Zero();
  Vec6 static_balance_ = Vec6::Zero();
  double rest_spring_energy_ = 0;
  std::vector<WaveSample> wave_table_;  // sampled at dt_sim/2
  int max_steps_ = 0;

  Vec6 pose_ = Vec6::Zero();
  Vec6 vel_ = Vec6::Zero();
  int substeps_done_ = 0;
  int steps_taken_ = 0;
  WecState state_;
  EnergyLedger ledger_;
};

}  // namespace wecmarl
