#include "wecmarl/marl.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "wecmarl/policy.hpp"
#include "wecmarl/rng.hpp"
#include "wecmarl/util.hpp"

namespace wecmarl {

double shaped_reward(double p_own, double p_others, double eta) {
  if (!std::isfinite(p_own) || !std::isfinite(p_others) ||
      !std::isfinite(eta))
    throw std::invalid_argument("shaped reward: non-finite input");
  return p_own + eta * p_others;
}

void TeamCoefficients::validate() const {
  for (double eta : {front, back})
    if (!std::isfinite(eta) || eta < -1.0 || eta > 1.0)
      throw std::invalid_argument(
          "team coefficients must be finite and within [-1, 1]");
}

// Composition ---------------------------------------------------------------

ActorCriticNet ComposedSpec::make_net() const {
  return ActorCriticNet(layout.dimension(), 1, hidden);
}

void ComposedSpec::validate() const {
  if (hidden < 1) throw std::invalid_argument("composition: hidden < 1");
  if (!(action_scale > 0))
    throw std::invalid_argument("composition: action scale must be > 0");
  const Eigen::Index count = make_net().param_count();
  for (const LegSource* s : {&front, &back})
    if (s->mode == LegSource::Mode::Policy && s->params.size() != count)
      throw std::invalid_argument(
          "composition: policy parameter size does not match the layout");
}

ComposedController::ComposedController(ComposedSpec spec, double sd_damping)
    : spec_(std::move(spec)), net_(spec_.make_net()), sd_{sd_damping} {
  spec_.validate();
}

Vec3 ComposedController::operator()(const WecSimulator& sim) const {
  const VectorXd obs = sim.observe(spec_.layout, spec_.scales);
  const auto mean_cmd = [&](const VectorXd& o, const VectorXd& p) {
    return spec_.action_scale * std::tanh(net_.forward(o, p).mean[0]);
  };
  Vec3 cmd = Vec3::Zero();
  const Vec3 sd_cmd = sd_.action(sim.state().ext_rate);
  if (spec_.front.mode == LegSource::Mode::Policy)
    cmd[0] = mean_cmd(obs, spec_.front.params);
  else
    cmd[0] = sd_cmd[0];
  if (spec_.back.mode == LegSource::Mode::Policy) {
    cmd[1] = mean_cmd(obs, spec_.back.params);
    cmd[2] = mean_cmd(mirror_observation(obs, spec_.layout), spec_.back.params);
  } else {
    cmd[1] = sd_cmd[1];
    cmd[2] = sd_cmd[2];
  }
  return cmd;
}

ControllerProvider composed_provider(ComposedSpec spec, const Plant& plant) {
  spec.validate();
  return [spec = std::move(spec), plant](double period_s) -> ControllerFn {
    double damping = 0;
    if (spec.front.mode == LegSource::Mode::Baseline ||
        spec.back.mode == LegSource::Mode::Baseline)
      damping = tune_for_resonance(plant.geometry, plant.pto, period_s).damping;
    auto ctrl = std::make_shared<ComposedController>(spec, damping);
    return [ctrl](const WecSimulator& sim) { return (*ctrl)(sim); };
  };
}

// Stage machinery -----------------------------------------------------------

void SaturationDetector::validate() const {
  if (window < 2) throw std::invalid_argument("saturation: window < 2");
  if (!(min_rel_improvement >= 0))
    throw std::invalid_argument("saturation: negative threshold");
}

bool SaturationDetector::saturated(const std::vector<double>& history) const {
  validate();
  const int n = static_cast<int>(history.size());
  if (n < window + 1) return false;  // nothing before the window yet
  double best_last = history[static_cast<size_t>(n - window)];
  for (int i = n - window + 1; i < n; ++i)
    best_last = std::max(best_last, history[static_cast<size_t>(i)]);
  double best_before = history[0];
  for (int i = 1; i < n - window; ++i)
    best_before = std::max(best_before, history[static_cast<size_t>(i)]);
  const double denom = std::max(std::abs(best_before), 1e-12);
  return (best_last - best_before) < min_rel_improvement * denom;
}

void TrainingStage::validate() const {
  detector.validate();
  std::vector<AgentRole> sorted = trainable;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("stage: duplicate trainable agent");
  switch (kind) {
    case StageKind::HybridInit:
      if (trainable.size() != 1)
        throw std::invalid_argument(
            "hybrid-init stage trains exactly one agent");
      break;
    case StageKind::Align:
      if (trainable.size() != 2)
        throw std::invalid_argument("align stage trains both agents");
      break;
    case StageKind::Skip:
      break;  // any subset, including none
  }
}

bool TrainingStage::is_trainable(AgentRole role) const {
  return std::find(trainable.begin(), trainable.end(), role) !=
         trainable.end();
}

void TrainingSchedule::validate() const {
  if (stages.empty()) throw std::invalid_argument("schedule: no stages");
  if (!(round_min_rel_improvement >= 0))
    throw std::invalid_argument("schedule: negative round threshold");
  for (const auto& s : stages) s.validate();
}

namespace {

const char* role_name(AgentRole role) {
  return role == AgentRole::Front ? "front" : "back";
}

const char* kind_name(StageKind kind) {
  switch (kind) {
    case StageKind::HybridInit: return "hybrid_init";
    case StageKind::Align: return "align";
    case StageKind::Skip: return "skip";
  }
  return "?";
}

}  // namespace

TrainingSchedule ping_pong_schedule(int rounds, std::uint64_t steps_per_stage,
                                    const SaturationDetector& detector,
                                    AgentRole first,
                                    std::uint64_t eval_interval) {
  if (rounds < 1) throw std::invalid_argument("ping pong: rounds < 1");
  const AgentRole second =
      first == AgentRole::Front ? AgentRole::Back : AgentRole::Front;
  TrainingSchedule schedule;
  schedule.round_min_rel_improvement = detector.min_rel_improvement;
  for (int r = 0; r < rounds; ++r) {
    for (AgentRole role : {first, second}) {
      TrainingStage stage;
      stage.kind = StageKind::Skip;
      stage.trainable = {role};
      stage.step_budget = steps_per_stage;
      stage.eval_interval = eval_interval;
      stage.detector = detector;
      stage.round = r;
      stage.label =
          "skip_r" + std::to_string(r + 1) + "_" + role_name(role);
      schedule.stages.push_back(std::move(stage));
    }
  }
  schedule.validate();
  return schedule;
}

TrainingSchedule canonical_schedule(std::uint64_t hybrid_steps,
                                    std::uint64_t align_steps,
                                    std::uint64_t skip_steps, int skip_rounds,
                                    std::uint64_t eval_interval,
                                    const SaturationDetector& detector) {
  TrainingSchedule schedule;
  schedule.round_min_rel_improvement = detector.min_rel_improvement;
  for (AgentRole role : {AgentRole::Front, AgentRole::Back}) {
    TrainingStage stage;
    stage.kind = StageKind::HybridInit;
    stage.trainable = {role};
    stage.step_budget = hybrid_steps;
    stage.eval_interval = eval_interval;
    stage.detector = detector;
    stage.label = std::string("hybrid_") + role_name(role);
    schedule.stages.push_back(std::move(stage));
  }
  TrainingStage align;
  align.kind = StageKind::Align;
  align.trainable = {AgentRole::Front, AgentRole::Back};
  align.step_budget = align_steps;
  align.eval_interval = eval_interval;
  align.detector = detector;
  align.label = "align";
  schedule.stages.push_back(std::move(align));
  if (skip_rounds > 0) {
    TrainingSchedule pp = ping_pong_schedule(skip_rounds, skip_steps, detector,
                                             AgentRole::Front, eval_interval);
    for (auto& s : pp.stages) schedule.stages.push_back(std::move(s));
  }
  schedule.validate();
  return schedule;
}

// Rollout -------------------------------------------------------------------

namespace {

constexpr std::uint64_t kStageSalt = 0x5354414745000000ull;
constexpr std::uint64_t kInitSalt = 0x494e495400000000ull;
constexpr std::uint64_t kWorkerSalt = 0x574b52000000000ull;
constexpr std::uint64_t kEpisodeSalt = 0x455049534f444500ull;
constexpr std::uint64_t kHeldOutSalt = 0x48454c444f555400ull;

struct RolloutJob {
  const ScheduleContext* ctx = nullptr;
  const ActorCriticNet* net = nullptr;
  ParamStore* front_store = nullptr;   // trainable when set
  ParamStore* back_store = nullptr;
  const VectorXd* front_frozen = nullptr;  // frozen policy; both null = SD
  const VectorXd* back_frozen = nullptr;
  std::uint64_t stage_seed = 0;
  std::uint64_t round = 0;
  int worker = 0;
  std::atomic<std::uint64_t>* steps = nullptr;
  std::uint64_t target = 0;
  std::atomic<std::uint64_t>* faults = nullptr;
  std::atomic<std::uint64_t>* updates = nullptr;
};

// One worker's contribution to a training round: roll episodes, build one
// experience stream for the front agent and two (raw + mirrored) for the
// back agent, and push gradients into the shared stores.
void run_rollout(const RolloutJob& job) {
  const ScheduleContext& ctx = *job.ctx;
  const ActorCriticNet& net = *job.net;
  const A3cConfig& cfg = ctx.a3c;
  const ObservationLayout& layout = ctx.layout;

  Rng rng(mix_seed(job.stage_seed,
                   kWorkerSalt + (job.round << 12) +
                       static_cast<std::uint64_t>(job.worker)));

  VectorXd pf, pb;
  const auto sync = [&] {
    if (job.front_store) pf = job.front_store->snapshot();
    else if (job.front_frozen) pf = *job.front_frozen;
    if (job.back_store) pb = job.back_store->snapshot();
    else if (job.back_frozen) pb = *job.back_frozen;
  };
  sync();

  TrajectorySegment seg_f, seg_b1, seg_b2;
  const auto push = [&](TrajectorySegment& seg, const VectorXd& params,
                        ParamStore* store, const VectorXd& boot_obs) {
    if (!store || seg.steps.empty()) return;
    seg.terminal = false;  // wave episodes end by time limit only
    seg.bootstrap_value = net.forward(boot_obs, params).value;
    VectorXd grad;
    compute_gradients(net, params, seg, cfg, grad);
    if (grad.allFinite()) {
      store->apply_gradient(grad);
      job.updates->fetch_add(1, std::memory_order_relaxed);
    } else {
      job.faults->fetch_add(1, std::memory_order_relaxed);
    }
    seg.steps.clear();
  };

  std::uint64_t episode = 0;
  while (job.steps->load(std::memory_order_relaxed) < job.target) {
    const std::uint64_t ep_seed =
        mix_seed(mix_seed(job.stage_seed, kEpisodeSalt + (job.round << 12) +
                                              static_cast<std::uint64_t>(
                                                  job.worker)),
                 episode++);
    WecSimulator sim = ctx.train.make(ep_seed);
    const double period = ctx.train.period_for_seed(ep_seed);
    const SdController sd{ctx.train.sd_damping(period)};
    const double dt = sim.sim_config().dt_control;

    VectorXd obs = sim.observe(layout, ctx.scales);
    VectorXd obs_m = mirror_observation(obs, layout);
    seg_f.steps.clear();
    seg_b1.steps.clear();
    seg_b2.steps.clear();
    bool done = false, out_of_steps = false;

    while (!done && !out_of_steps) {
      Vec3 cmd = Vec3::Zero();
      PolicyEval ev_f, ev_b1, ev_b2;
      if (job.front_store) {
        const auto f = net.forward(obs, pf);
        const PolicySample s = sample_policy(f.mean, f.log_std,
                                             cfg.action_scale, rng);
        ev_f = PolicyEval{obs, s.presquash};
        cmd[0] = s.action[0];
      } else if (job.front_frozen) {
        cmd[0] = cfg.action_scale * std::tanh(net.forward(obs, pf).mean[0]);
      } else {
        cmd[0] = sd.action(sim.state().ext_rate)[0];
      }
      if (job.back_store) {
        const auto f1 = net.forward(obs, pb);
        const PolicySample s1 = sample_policy(f1.mean, f1.log_std,
                                              cfg.action_scale, rng);
        ev_b1 = PolicyEval{obs, s1.presquash};
        cmd[1] = s1.action[0];
        const auto f2 = net.forward(obs_m, pb);
        const PolicySample s2 = sample_policy(f2.mean, f2.log_std,
                                              cfg.action_scale, rng);
        ev_b2 = PolicyEval{obs_m, s2.presquash};
        cmd[2] = s2.action[0];
      } else if (job.back_frozen) {
        cmd[1] = cfg.action_scale * std::tanh(net.forward(obs, pb).mean[0]);
        cmd[2] = cfg.action_scale * std::tanh(net.forward(obs_m, pb).mean[0]);
      } else {
        const Vec3 a = sd.action(sim.state().ext_rate);
        cmd[1] = a[1];
        cmd[2] = a[2];
      }

      const ControlStepResult res = sim.step(cmd);
      const Vec3 power = res.leg_energy / dt;
      if (job.front_store) {
        SegmentStep st;
        st.evals.push_back(std::move(ev_f));
        st.reward = shaped_reward(power[0], power[1] + power[2],
                                  ctx.eta.front) *
                    cfg.reward_scale;
        seg_f.steps.push_back(std::move(st));
      }
      if (job.back_store) {
        SegmentStep s1;
        s1.evals.push_back(std::move(ev_b1));
        s1.reward =
            shaped_reward(power[1], power[0] + power[2], ctx.eta.back) *
            cfg.reward_scale;
        seg_b1.steps.push_back(std::move(s1));
        SegmentStep s2;
        s2.evals.push_back(std::move(ev_b2));
        s2.reward =
            shaped_reward(power[2], power[0] + power[1], ctx.eta.back) *
            cfg.reward_scale;
        seg_b2.steps.push_back(std::move(s2));
      }

      done = res.done;
      obs = sim.observe(layout, ctx.scales);
      obs_m = mirror_observation(obs, layout);
      out_of_steps =
          1 + job.steps->fetch_add(1, std::memory_order_relaxed) >= job.target;

      const bool flush =
          done || out_of_steps ||
          (job.front_store &&
           static_cast<int>(seg_f.steps.size()) >= cfg.n_steps) ||
          (job.back_store &&
           static_cast<int>(seg_b1.steps.size()) >= cfg.n_steps);
      if (!flush) continue;
      push(seg_f, pf, job.front_store, obs);
      push(seg_b1, pb, job.back_store, obs);
      push(seg_b2, pb, job.back_store, obs_m);
      sync();
    }
  }
}

}  // namespace

// ScheduleRunner ------------------------------------------------------------

ScheduleRunner::ScheduleRunner(ScheduleContext ctx)
    : ctx_(std::move(ctx)),
      net_(ctx_.layout.dimension(), 1, ctx_.hidden) {
  ctx_.a3c.validate();
  ctx_.eta.validate();
  if (ctx_.workers < 1)
    throw std::invalid_argument("schedule: workers < 1");
  if (ctx_.eval_episodes_per_period < 1)
    throw std::invalid_argument("schedule: eval episodes < 1");
  if (!(ctx_.max_fault_rate >= 0))
    throw std::invalid_argument("schedule: negative fault threshold");
}

ScheduleRunner::AgentState& ScheduleRunner::agent(AgentRole role) {
  return role == AgentRole::Front ? front_ : back_;
}

const ScheduleRunner::AgentState& ScheduleRunner::agent(AgentRole role) const {
  return role == AgentRole::Front ? front_ : back_;
}

bool ScheduleRunner::initialized(AgentRole role) const {
  return agent(role).initialized;
}

const VectorXd& ScheduleRunner::params(AgentRole role) const {
  const AgentState& a = agent(role);
  if (!a.initialized)
    throw std::logic_error(std::string("agent not initialised: ") +
                           role_name(role));
  return a.params;
}

void ScheduleRunner::set_params(AgentRole role, VectorXd params) {
  if (params.size() != net_.param_count())
    throw std::invalid_argument("set_params: size mismatch");
  agent(role).params = std::move(params);
  agent(role).initialized = true;
}

std::string ScheduleRunner::hash_of(const AgentState& a) const {
  return a.initialized ? sha256_hex(params_blob(net_, a.params))
                       : std::string();
}

ComposedSpec ScheduleRunner::current_spec(const TrainingStage* stage) const {
  ComposedSpec spec;
  spec.layout = ctx_.layout;
  spec.scales = ctx_.scales;
  spec.hidden = ctx_.hidden;
  spec.action_scale = ctx_.a3c.action_scale;
  const auto slot = [&](AgentRole role) -> LegSource {
    const AgentState& a = agent(role);
    const bool sd_partner = stage && stage->kind == StageKind::HybridInit &&
                            !stage->is_trainable(role);
    if (sd_partner || !a.initialized) return LegSource::baseline();
    return LegSource::policy(a.params);
  };
  spec.front = slot(AgentRole::Front);
  spec.back = slot(AgentRole::Back);
  return spec;
}

double ScheduleRunner::evaluate_spec(const ComposedSpec& spec) const {
  double total = 0;
  int count = 0;
  const auto& periods = ctx_.held_out.periods();
  for (size_t pi = 0; pi < periods.size(); ++pi) {
    const double period = periods[pi];
    const ComposedController ctrl(spec, ctx_.held_out.sd_damping(period));
    const ControllerFn fn = [&ctrl](const WecSimulator& s) { return ctrl(s); };
    for (int e = 0; e < ctx_.eval_episodes_per_period; ++e) {
      const std::uint64_t seed =
          mix_seed(ctx_.seed, kHeldOutSalt + pi * 4096 +
                                  static_cast<std::uint64_t>(e));
      WecSimulator sim = ctx_.held_out.make_at(period, seed);
      total += episode_mean_power(sim, fn, ctx_.eval_warmup_s);
      ++count;
    }
  }
  return total / count;
}

StageReport ScheduleRunner::run_stage(const TrainingStage& stage) {
  stage.validate();
  const std::uint64_t stage_seed =
      mix_seed(ctx_.seed, kStageSalt + static_cast<std::uint64_t>(stage_counter_));

  StageReport report;
  report.label = stage.label;
  report.kind = stage.kind;
  report.front_hash_before = hash_of(front_);  // empty = not yet trained
  report.back_hash_before = hash_of(back_);

  for (AgentRole role : {AgentRole::Front, AgentRole::Back}) {
    AgentState& a = agent(role);
    if (stage.is_trainable(role) && !a.initialized) {
      Rng r(mix_seed(stage_seed, kInitSalt + static_cast<std::uint64_t>(role)));
      a.params = net_.init_params(r, ctx_.a3c.init_log_std);
      a.initialized = true;
    }
    if (stage.kind == StageKind::Skip && !stage.is_trainable(role) &&
        !a.initialized)
      throw std::logic_error(
          std::string("skip stage freezes an uninitialised agent: ") +
          role_name(role));
  }

  const bool train_front = stage.is_trainable(AgentRole::Front);
  const bool train_back = stage.is_trainable(AgentRole::Back);
  std::optional<ParamStore> front_store, back_store;
  if (train_front)
    front_store.emplace(front_.params, ctx_.a3c, net_.log_std_offset(),
                        net_.action_dim());
  if (train_back)
    back_store.emplace(back_.params, ctx_.a3c, net_.log_std_offset(),
                       net_.action_dim());

  // Frozen policy partners, pinned for the whole stage.
  const bool front_is_baseline =
      !train_front &&
      (stage.kind == StageKind::HybridInit || !front_.initialized);
  const bool back_is_baseline =
      !train_back &&
      (stage.kind == StageKind::HybridInit || !back_.initialized);
  const VectorXd front_frozen = front_.params;
  const VectorXd back_frozen = back_.params;

  double score = evaluate_spec(current_spec(&stage));
  report.eval_history.push_back(score);
  report.stage_best = score;
  VectorXd best_front = front_.params;
  VectorXd best_back = back_.params;
  ComposedSpec best_stage_spec = current_spec(&stage);

  const std::uint64_t interval =
      stage.eval_interval > 0 ? stage.eval_interval
                              : std::max<std::uint64_t>(stage.step_budget, 1);
  std::uint64_t used = 0, faults = 0, updates = 0;
  std::uint64_t round = 0;
  const bool any_training = train_front || train_back;

  while (any_training && used < stage.step_budget) {
    const std::uint64_t target =
        std::min<std::uint64_t>(interval, stage.step_budget - used);
    std::atomic<std::uint64_t> counter{0}, fault_counter{0}, update_counter{0};

    RolloutJob base;
    base.ctx = &ctx_;
    base.net = &net_;
    base.front_store = train_front ? &*front_store : nullptr;
    base.back_store = train_back ? &*back_store : nullptr;
    base.front_frozen =
        (!train_front && !front_is_baseline) ? &front_frozen : nullptr;
    base.back_frozen =
        (!train_back && !back_is_baseline) ? &back_frozen : nullptr;
    base.stage_seed = stage_seed;
    base.round = round;
    base.steps = &counter;
    base.target = target;
    base.faults = &fault_counter;
    base.updates = &update_counter;

    if (ctx_.workers == 1) {
      base.worker = 0;
      run_rollout(base);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<size_t>(ctx_.workers));
      for (int w = 0; w < ctx_.workers; ++w) {
        RolloutJob job = base;
        job.worker = w;
        pool.emplace_back([job] { run_rollout(job); });
      }
      for (auto& t : pool) t.join();
    }

    used += counter.load();
    faults += fault_counter.load();
    updates += update_counter.load();
    if (updates + faults > 50 &&
        faults > ctx_.max_fault_rate * static_cast<double>(updates + faults))
      throw std::runtime_error("stage '" + stage.label +
                               "' aborted: gradient fault rate too high");

    if (front_store) front_.params = front_store->snapshot();
    if (back_store) back_.params = back_store->snapshot();
    score = evaluate_spec(current_spec(&stage));
    report.eval_history.push_back(score);
    if (score > report.stage_best) {
      report.stage_best = score;
      best_front = front_.params;
      best_back = back_.params;
      best_stage_spec = current_spec(&stage);
    }
    ++round;
    if (stage.stop_on_saturation &&
        stage.detector.saturated(report.eval_history)) {
      report.saturated = true;
      break;
    }
  }

  report.steps_used = used;
  report.faults = faults;

  // Keep the stage's best-by-evaluation snapshot, not the last iterate.
  if (train_front) front_.params = best_front;
  if (train_back) back_.params = best_back;

  report.front_hash_after = hash_of(front_);
  report.back_hash_after = hash_of(back_);
  if (!train_front && report.front_hash_after != report.front_hash_before)
    throw std::logic_error("freeze violated: front agent changed");
  if (!train_back && report.back_hash_after != report.back_hash_before)
    throw std::logic_error("freeze violated: back agent changed");

  if (!have_best_ || report.stage_best > overall_best_) {
    overall_best_ = report.stage_best;
    best_spec_ = best_stage_spec;
    have_best_ = true;
  }
  report.overall_best_after = overall_best_;

  write_stage_artifacts(stage_counter_, report);
  ++stage_counter_;
  return report;
}

void ScheduleRunner::restore_progress(int stages_completed,
                                      std::optional<VectorXd> front,
                                      std::optional<VectorXd> back,
                                      std::optional<ComposedSpec> best_spec,
                                      double best_score) {
  if (stages_completed < 0)
    throw std::invalid_argument("restore: negative stage count");
  stage_counter_ = stages_completed;
  if (front) set_params(AgentRole::Front, std::move(*front));
  if (back) set_params(AgentRole::Back, std::move(*back));
  if (best_spec) {
    best_spec->validate();
    best_spec_ = std::move(best_spec);
    overall_best_ = best_score;
    have_best_ = true;
  }
}

std::vector<StageReport> ScheduleRunner::run(const TrainingSchedule& schedule,
                                             std::size_t first_stage) {
  schedule.validate();
  if (first_stage > schedule.stages.size())
    throw std::invalid_argument("run: first stage beyond the schedule");
  std::vector<StageReport> reports;
  double best_at_round_start = overall_best_;
  bool have_round_start = have_best_;
  int stop_after_round = -1;

  for (size_t i = first_stage; i < schedule.stages.size(); ++i) {
    const TrainingStage& stage = schedule.stages[i];
    if (stage.round >= 0 && stop_after_round >= 0 &&
        stage.round > stop_after_round)
      break;  // ping-pong stopped improving

    const bool round_begins =
        stage.round >= 0 &&
        (i == 0 || schedule.stages[i - 1].round != stage.round);
    if (round_begins) {
      best_at_round_start = overall_best_;
      have_round_start = have_best_;
    }

    reports.push_back(run_stage(stage));

    const bool round_ends =
        stage.round >= 0 && (i + 1 == schedule.stages.size() ||
                             schedule.stages[i + 1].round != stage.round);
    if (round_ends && have_round_start) {
      const double denom = std::max(std::abs(best_at_round_start), 1e-12);
      if (overall_best_ - best_at_round_start <
          schedule.round_min_rel_improvement * denom)
        stop_after_round = stage.round;
    }
  }
  return reports;
}

void ScheduleRunner::write_stage_artifacts(int index,
                                           const StageReport& report) {
  if (ctx_.artifacts_dir.empty()) return;
  namespace fs = std::filesystem;
  const fs::path root(ctx_.artifacts_dir);
  char tag[16];
  std::snprintf(tag, sizeof(tag), "stage_%02d", index);
  const fs::path dir = root / (std::string(tag) + "_" + report.label);
  fs::create_directories(dir);

  if (front_.initialized)
    save_params((dir / "front.params").string(), net_, front_.params);
  if (back_.initialized)
    save_params((dir / "back.params").string(), net_, back_.params);

  nlohmann::json manifest;
  manifest["stage"] = index;
  manifest["label"] = report.label;
  manifest["kind"] = kind_name(report.kind);
  manifest["seed"] = ctx_.seed;
  manifest["steps_used"] = report.steps_used;
  manifest["faults"] = report.faults;
  manifest["stage_best"] = report.stage_best;
  manifest["overall_best"] = report.overall_best_after;
  manifest["saturated"] = report.saturated;
  manifest["eval_history"] = report.eval_history;
  manifest["front_hash"] = report.front_hash_after;
  manifest["back_hash"] = report.back_hash_after;
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";

  const fs::path report_csv = root / "report.csv";
  const bool fresh = !fs::exists(report_csv);
  std::ofstream out(report_csv, std::ios::app);
  if (fresh)
    out << csv_row({"stage", "label", "kind", "steps_used", "stage_best",
                    "overall_best", "saturated"});
  out << csv_row({std::to_string(index), report.label, kind_name(report.kind),
                  std::to_string(report.steps_used),
                  format_double(report.stage_best),
                  format_double(report.overall_best_after),
                  report.saturated ? "1" : "0"});

  if (best_spec_ && report.overall_best_after == overall_best_) {
    const fs::path best = root / "best";
    fs::create_directories(best);
    if (best_spec_->front.mode == LegSource::Mode::Policy)
      save_params((best / "front.params").string(), net_,
                  best_spec_->front.params);
    if (best_spec_->back.mode == LegSource::Mode::Policy)
      save_params((best / "back.params").string(), net_,
                  best_spec_->back.params);
    nlohmann::json meta;
    meta["score"] = overall_best_;
    meta["hidden"] = ctx_.hidden;
    meta["action_scale"] = ctx_.a3c.action_scale;
    meta["layout"] = {{"tether", ctx_.layout.tether},
                      {"accel", ctx_.layout.accel},
                      {"tension", ctx_.layout.tension}};
    meta["front_policy"] =
        best_spec_->front.mode == LegSource::Mode::Policy;
    meta["back_policy"] = best_spec_->back.mode == LegSource::Mode::Policy;
    std::ofstream(best / "manifest.json") << meta.dump(2) << "\n";
  }
}

// Broadcast adapter ----------------------------------------------------------

BroadcastWecEnv::BroadcastWecEnv(WecEpisodeFactory factory,
                                 ObservationLayout layout,
                                 ObservationScales scales)
    : factory_(std::move(factory)), layout_(layout), scales_(scales) {}

int BroadcastWecEnv::obs_dim() const { return layout_.dimension(); }

VectorXd BroadcastWecEnv::reset(std::uint64_t episode_seed) {
  sim_.emplace(factory_.make(episode_seed));
  return sim_->observe(layout_, scales_);
}

Env::StepOut BroadcastWecEnv::step(const VectorXd& action) {
  if (!sim_) throw std::logic_error("broadcast env: reset first");
  const ControlStepResult r = sim_->step(Vec3::Constant(action[0]));
  StepOut out;
  out.reward = r.leg_energy.sum() / sim_->sim_config().dt_control;
  out.done = r.done;
  out.truncated = r.done;  // episodes end by the wave record running out
  out.obs = sim_->observe(layout_, scales_);
  return out;
}

}  // namespace wecmarl
