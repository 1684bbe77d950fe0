#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wecmarl/eval.hpp"
#include "wecmarl/rl.hpp"

namespace wecmarl {

// Team reward: an agent earns its own legs' power plus eta times the power
// of the legs it does not control (positive eta cooperates, negative
// competes).
double shaped_reward(double p_own, double p_others, double eta);

struct TeamCoefficients {
  double front = -0.6;
  double back = 0.8;

  void validate() const;  // finite, within [-1, 1]
};

enum class AgentRole { Front = 0, Back = 1 };

// How one agent slot is driven inside a composition: the period-tuned SD
// baseline, or a policy network evaluated with mean actions.
struct LegSource {
  enum class Mode { Baseline, Policy };
  Mode mode = Mode::Baseline;
  VectorXd params;

  static LegSource baseline() { return {}; }
  static LegSource policy(VectorXd p) {
    LegSource s;
    s.mode = Mode::Policy;
    s.params = std::move(p);
    return s;
  }
};

// A full three-leg controller: the front slot drives leg 0 on the raw
// observation; the back slot drives leg 1 on the raw observation and leg 2
// on the mirrored one, sharing parameters across the symmetric pair.
struct ComposedSpec {
  LegSource front;
  LegSource back;
  ObservationLayout layout;
  ObservationScales scales;
  int hidden = 256;
  double action_scale = 1.0;  // generator force per unit of tanh output

  ActorCriticNet make_net() const;
  void validate() const;  // throws std::invalid_argument
};

class ComposedController {
 public:
  // sd_damping feeds any baseline slots; pass the tuning for the episode's
  // wave period.
  ComposedController(ComposedSpec spec, double sd_damping);

  Vec3 operator()(const WecSimulator& sim) const;
  const ComposedSpec& spec() const { return spec_; }

 private:
  ComposedSpec spec_;
  ActorCriticNet net_;
  SdController sd_;
};

// Period-binding wrapper for the evaluation harness: baseline slots pick up
// the impedance-matched damping of each period.
ControllerProvider composed_provider(ComposedSpec spec, const Plant& plant);

// Stage machinery ----------------------------------------------------------

struct SaturationDetector {
  int window = 5;                    // evaluations
  double min_rel_improvement = 0.01;

  void validate() const;
  // True once the best score in the last `window` evaluations improves on
  // the best before that window by less than the relative threshold.
  bool saturated(const std::vector<double>& eval_history) const;
};

enum class StageKind { HybridInit, Align, Skip };

// One phase of the schedule. Non-trainable agents are replaced by the SD
// baseline in HybridInit stages and frozen at their current parameters in
// Skip stages; Align trains both.
struct TrainingStage {
  StageKind kind = StageKind::Align;
  std::vector<AgentRole> trainable;
  std::uint64_t step_budget = 0;    // environment control steps
  std::uint64_t eval_interval = 0;  // steps between held-out evals; 0 = budget
  bool stop_on_saturation = true;
  SaturationDetector detector;
  int round = -1;  // ping-pong round index, -1 outside ping-pong
  std::string label;

  void validate() const;
  bool is_trainable(AgentRole role) const;
};

struct TrainingSchedule {
  std::vector<TrainingStage> stages;
  // A completed ping-pong round that fails to improve the overall best by
  // this relative margin stops the remaining rounds.
  double round_min_rel_improvement = 0.01;

  void validate() const;
};

// Alternating one-agent Skip stages, starting with `first`.
TrainingSchedule ping_pong_schedule(int rounds, std::uint64_t steps_per_stage,
                                    const SaturationDetector& detector = {},
                                    AgentRole first = AgentRole::Front,
                                    std::uint64_t eval_interval = 0);

// The full pipeline: hybrid initialisation of each agent against the SD
// partner, a joint alignment phase, then ping-pong skip rounds.
TrainingSchedule canonical_schedule(std::uint64_t hybrid_steps,
                                    std::uint64_t align_steps,
                                    std::uint64_t skip_steps, int skip_rounds,
                                    std::uint64_t eval_interval = 0,
                                    const SaturationDetector& detector = {});

struct StageReport {
  std::string label;
  StageKind kind = StageKind::Align;
  std::uint64_t steps_used = 0;
  std::uint64_t faults = 0;
  std::vector<double> eval_history;  // held-out score per eval boundary
  double stage_best = 0;
  double overall_best_after = 0;  // running max across the schedule so far
  bool saturated = false;
  // Parameter-blob hashes before/after; frozen agents must match exactly.
  std::string front_hash_before, front_hash_after;
  std::string back_hash_before, back_hash_after;
};

struct ScheduleContext {
  WecEpisodeFactory train;     // training episodes (seed-picked periods)
  WecEpisodeFactory held_out;  // evaluation episodes (fixed paired seeds)
  ObservationLayout layout;
  ObservationScales scales;
  int hidden = 256;
  A3cConfig a3c;
  TeamCoefficients eta;
  std::uint64_t seed = 1;
  int workers = 1;
  int eval_episodes_per_period = 2;
  double eval_warmup_s = 20.0;
  // Abort a stage when discarded-gradient faults exceed this fraction of
  // applied updates.
  double max_fault_rate = 0.01;
  // When set, per-stage checkpoints, manifests, and a report CSV land here.
  std::string artifacts_dir;
};

// Drives a schedule stage by stage, holding the two agents' current
// parameters, adopting each stage's best-by-evaluation snapshot, and
// tracking the best composition seen anywhere (its held-out score is
// non-decreasing over the schedule by construction).
class ScheduleRunner {
 public:
  explicit ScheduleRunner(ScheduleContext ctx);

  StageReport run_stage(const TrainingStage& stage);
  // Executes the schedule from first_stage on (earlier stages are assumed
  // done and restored via restore_progress), returning the executed reports.
  std::vector<StageReport> run(const TrainingSchedule& schedule,
                               std::size_t first_stage = 0);

  // Rebuilds mid-schedule state for a resumed run: agent parameters, stage
  // numbering (which also keys the stage seeds), and the best composition
  // seen so far with its held-out score.
  void restore_progress(int stages_completed, std::optional<VectorXd> front,
                        std::optional<VectorXd> back,
                        std::optional<ComposedSpec> best_spec,
                        double best_score);

  bool initialized(AgentRole role) const;
  const VectorXd& params(AgentRole role) const;
  void set_params(AgentRole role, VectorXd params);

  // Composition with the current parameters; stage-dependent slots (SD for
  // HybridInit partners) follow the stage when given.
  ComposedSpec current_spec(const TrainingStage* stage = nullptr) const;
  double evaluate_spec(const ComposedSpec& spec) const;

  double overall_best() const { return overall_best_; }
  const std::optional<ComposedSpec>& best_spec() const { return best_spec_; }
  const ActorCriticNet& net() const { return net_; }
  const ScheduleContext& context() const { return ctx_; }
  int stages_run() const { return stage_counter_; }

 private:
  struct AgentState {
    VectorXd params;
    bool initialized = false;
  };

  AgentState& agent(AgentRole role);
  const AgentState& agent(AgentRole role) const;
  std::string hash_of(const AgentState& a) const;
  void write_stage_artifacts(int index, const StageReport& report);

  ScheduleContext ctx_;
  ActorCriticNet net_;
  AgentState front_, back_;
  double overall_best_ = 0;
  bool have_best_ = false;
  std::optional<ComposedSpec> best_spec_;
  int stage_counter_ = 0;
};

// Single-agent adapter for the plain A3C worker: one policy commands all
// three legs identically. On the heave-decoupled plant this is the natural
// single-axis control problem.
class BroadcastWecEnv : public Env {
 public:
  BroadcastWecEnv(WecEpisodeFactory factory, ObservationLayout layout,
                  ObservationScales scales);

  int obs_dim() const override;
  int action_dim() const override { return 1; }
  VectorXd reset(std::uint64_t episode_seed) override;
  StepOut step(const VectorXd& action) override;

  const WecEpisodeFactory& factory() const { return factory_; }

 private:
  WecEpisodeFactory factory_;
  ObservationLayout layout_;
  ObservationScales scales_;
  std::optional<WecSimulator> sim_;
};

}  // namespace wecmarl
