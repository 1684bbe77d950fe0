#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "wecmarl/mlp.hpp"
#include "wecmarl/policy.hpp"

namespace wecmarl {

struct A3cConfig {
  double gamma = 0.99;
  double learning_rate = 1e-4;
  int n_steps = 20;            // rollout segment length
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double grad_clip = 5.0;      // global-norm cap; <= 0 disables
  double action_scale = 1.0;   // force per unit tanh output
  double log_std_min = -5.0;   // projection bounds applied after updates
  double log_std_max = 2.0;
  double init_log_std = -0.7;
  double reward_scale = 1.0;
  enum class Optimizer { Sgd, Adam };
  Optimizer optimizer = Optimizer::Sgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;  // throws std::invalid_argument
};

// One policy invocation whose log-probability enters the objective. A step
// may carry several (parameter sharing across mirrored roles); all share the
// step's reward and advantage.
struct PolicyEval {
  VectorXd obs;
  VectorXd presquash;
};

struct SegmentStep {
  std::vector<PolicyEval> evals;
  double reward = 0;
};

struct TrajectorySegment {
  std::vector<SegmentStep> steps;
  double bootstrap_value = 0;  // V(s_end); zero when terminal
  bool terminal = false;
};

// Discounted n-step returns by backward recursion from the bootstrap.
std::vector<double> n_step_returns(const std::vector<double>& rewards,
                                   double gamma, double bootstrap_value);

struct GradientStats {
  double policy_loss = 0;   // sum of -A * log-prob terms (A held fixed)
  double value_loss = 0;    // sum of value_coef * (R - V)^2
  double entropy = 0;       // summed entropy bonus before its coefficient
  double grad_norm = 0;     // global norm after clipping
};

// Gradient of the segment objective with respect to params, accumulated into
// grad (which is zeroed first). Advantages are treated as constants in the
// policy term; the value term differentiates through V.
GradientStats compute_gradients(const ActorCriticNet& net,
                                const VectorXd& params,
                                const TrajectorySegment& segment,
                                const A3cConfig& cfg, VectorXd& grad);

// Shared parameter vector plus optimizer state. Default mode serialises
// updates with a shared mutex (snapshots are consistent); unsafe-async mode
// runs lock-free in the spirit of Hogwild and tolerates torn reads.
class ParamStore {
 public:
  ParamStore(VectorXd initial, const A3cConfig& cfg, int log_std_offset,
             int log_std_count);

  VectorXd snapshot() const;
  void apply_gradient(const VectorXd& grad);
  void set_params(const VectorXd& params);  // resets optimizer state

  std::uint64_t version() const;
  Eigen::Index size() const { return static_cast<Eigen::Index>(params_.size()); }
  const A3cConfig& config() const { return cfg_; }

  void set_unsafe_async(bool enabled) { unsafe_async_ = enabled; }
  bool unsafe_async() const { return unsafe_async_; }

  // Optimizer internals, exposed for exact training resume.
  struct OptState {
    VectorXd adam_m, adam_v;
    std::int64_t adam_t = 0;
  };
  OptState optimizer_state() const;
  void restore_optimizer_state(const OptState& state);

 private:
  void apply_locked(const VectorXd& grad);
  void apply_unsafe(const VectorXd& grad);

  mutable std::shared_mutex mutex_;
  VectorXd params_;
  VectorXd adam_m_, adam_v_;
  std::int64_t adam_t_ = 0;
  A3cConfig cfg_;
  int ls_offset_, ls_count_;
  bool unsafe_async_ = false;
  std::atomic<std::uint64_t> version_{0};
};

// Minimal episodic environment: continuous observation in, one bounded
// action vector out.
class Env {
 public:
  struct StepOut {
    VectorXd obs;
    double reward = 0;
    bool done = false;       // episode over
    bool truncated = false;  // over by time limit: bootstrap from V, not zero
  };

  virtual ~Env() = default;
  virtual int obs_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual VectorXd reset(std::uint64_t episode_seed) = 0;
  virtual StepOut step(const VectorXd& action) = 0;
};

struct WorkerConfig {
  int worker_id = 0;
  std::uint64_t seed = 0;
  long max_env_steps = 0;
};

struct TrainStats {
  long env_steps = 0;
  long updates = 0;
  long episodes = 0;
  long faults = 0;  // non-finite gradients discarded
  double last_episode_reward = 0;
  double mean_episode_reward = 0;  // over completed episodes
};

// Progress hook, called after each applied update; return false to stop
// early (e.g. a reached target).
using ProgressFn = std::function<bool(const TrainStats&)>;

// Classic asynchronous-advantage worker: roll a segment with a parameter
// snapshot, push one accumulated gradient, repeat until the step budget runs
// out. Runs on the caller's thread; launch several (each with its own Env)
// for asynchronous training against a shared store.
TrainStats worker_loop(Env& env, ParamStore& store, const ActorCriticNet& net,
                       const WorkerConfig& wcfg, const ProgressFn& progress = {});

// Model parameter files: versioned header with layer sizes, fp32 payload.
// Loading returns the fp32-rounded values; these files define frozen and
// composed controllers and are what freeze hashes cover. params_blob is the
// exact byte content of such a file.
std::string params_blob(const ActorCriticNet& net, const VectorXd& params);
void save_params(const std::string& path, const ActorCriticNet& net,
                 const VectorXd& params);
VectorXd load_params(const std::string& path, const ActorCriticNet& net);

// Full training state for exact resume (fp64 params, optimizer moments, rng).
struct TrainingCheckpoint {
  std::vector<int> layer_sizes;
  VectorXd params;
  ParamStore::OptState opt;
  std::string rng_state;
  long env_steps = 0;
};
void save_training_checkpoint(const std::string& path,
                              const TrainingCheckpoint& ckpt);
TrainingCheckpoint load_training_checkpoint(const std::string& path);

}  // namespace wecmarl
