#include "wecmarl/rl.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace wecmarl {

void A3cConfig::validate() const {
  if (!(gamma > 0) || !(gamma <= 1))
    throw std::invalid_argument("a3c: gamma must be in (0, 1]");
  if (!(learning_rate > 0))
    throw std::invalid_argument("a3c: learning rate must be positive");
  if (n_steps < 1) throw std::invalid_argument("a3c: n_steps must be >= 1");
  if (entropy_coef < 0 || value_coef < 0)
    throw std::invalid_argument("a3c: loss coefficients must be >= 0");
  if (!(action_scale > 0))
    throw std::invalid_argument("a3c: action scale must be positive");
  if (!(log_std_min < log_std_max))
    throw std::invalid_argument("a3c: log_std bounds out of order");
  if (!(reward_scale > 0))
    throw std::invalid_argument("a3c: reward scale must be positive");
}

std::vector<double> n_step_returns(const std::vector<double>& rewards,
                                   double gamma, double bootstrap_value) {
  std::vector<double> returns(rewards.size());
  double acc = bootstrap_value;
  for (size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    returns[i] = acc;
  }
  return returns;
}

GradientStats compute_gradients(const ActorCriticNet& net,
                                const VectorXd& params,
                                const TrajectorySegment& segment,
                                const A3cConfig& cfg, VectorXd& grad) {
  if (segment.steps.empty())
    throw std::invalid_argument("compute_gradients: empty segment");
  if (grad.size() != net.param_count()) grad.resize(net.param_count());
  grad.setZero();

  std::vector<double> rewards(segment.steps.size());
  for (size_t i = 0; i < segment.steps.size(); ++i) {
    if (segment.steps[i].evals.empty())
      throw std::invalid_argument("compute_gradients: step without evals");
    rewards[i] = segment.steps[i].reward;
  }
  const std::vector<double> returns = n_step_returns(
      rewards, cfg.gamma, segment.terminal ? 0.0 : segment.bootstrap_value);

  GradientStats stats;
  const int a = net.action_dim();
  const VectorXd entropy_pull = VectorXd::Constant(a, -cfg.entropy_coef);
  VectorXd d_mean(a), d_log_std(a);

  for (size_t i = 0; i < segment.steps.size(); ++i) {
    const SegmentStep& step = segment.steps[i];
    // The critic is evaluated once per step, on the first (raw) observation;
    // the advantage it defines is shared by every policy eval of the step.
    const auto f0 = net.forward(step.evals[0].obs, params);
    const double adv = returns[i] - f0.value;

    gaussian_log_prob_grad(step.evals[0].presquash, f0.mean, f0.log_std,
                           d_mean, d_log_std);
    const VectorXd mean_grad = -adv * d_mean;
    const VectorXd ls_grad = -adv * d_log_std + entropy_pull;
    const double value_grad = -2.0 * cfg.value_coef * adv;
    net.backward(f0, params, mean_grad, value_grad, ls_grad, grad);

    stats.policy_loss -=
        adv * gaussian_log_prob(step.evals[0].presquash, f0.mean, f0.log_std);
    stats.value_loss += cfg.value_coef * adv * adv;
    stats.entropy += policy_entropy(f0.log_std);

    for (size_t e = 1; e < step.evals.size(); ++e) {
      const auto fe = net.forward(step.evals[e].obs, params);
      gaussian_log_prob_grad(step.evals[e].presquash, fe.mean, fe.log_std,
                             d_mean, d_log_std);
      net.backward(fe, params, -adv * d_mean,
                   0.0, -adv * d_log_std + entropy_pull, grad);
      stats.policy_loss -=
          adv * gaussian_log_prob(step.evals[e].presquash, fe.mean, fe.log_std);
      stats.entropy += policy_entropy(fe.log_std);
    }
  }

  double norm = grad.norm();
  if (cfg.grad_clip > 0 && norm > cfg.grad_clip) {
    grad *= cfg.grad_clip / norm;
    norm = cfg.grad_clip;
  }
  stats.grad_norm = norm;
  return stats;
}

ParamStore::ParamStore(VectorXd initial, const A3cConfig& cfg,
                       int log_std_offset, int log_std_count)
    : params_(std::move(initial)),
      cfg_(cfg),
      ls_offset_(log_std_offset),
      ls_count_(log_std_count) {
  cfg_.validate();
  if (ls_offset_ < 0 || ls_count_ < 0 ||
      ls_offset_ + ls_count_ > params_.size())
    throw std::invalid_argument("param store: log_std segment out of range");
  adam_m_ = VectorXd::Zero(params_.size());
  adam_v_ = VectorXd::Zero(params_.size());
  for (int i = 0; i < ls_count_; ++i)
    params_[ls_offset_ + i] =
        std::clamp(params_[ls_offset_ + i], cfg_.log_std_min, cfg_.log_std_max);
}

VectorXd ParamStore::snapshot() const {
  if (unsafe_async_) {
    VectorXd out(params_.size());
    for (Eigen::Index i = 0; i < params_.size(); ++i)
      out[i] = std::atomic_ref<const double>(params_[i])
                   .load(std::memory_order_relaxed);
    return out;
  }
  std::shared_lock lock(mutex_);
  return params_;
}

void ParamStore::apply_gradient(const VectorXd& grad) {
  if (grad.size() != params_.size())
    throw std::invalid_argument("param store: gradient size mismatch");
  if (unsafe_async_)
    apply_unsafe(grad);
  else
    apply_locked(grad);
  version_.fetch_add(1, std::memory_order_release);
}

void ParamStore::apply_locked(const VectorXd& grad) {
  std::unique_lock lock(mutex_);
  if (cfg_.optimizer == A3cConfig::Optimizer::Sgd) {
    params_ -= cfg_.learning_rate * grad;
  } else {
    ++adam_t_;
    adam_m_ = cfg_.adam_beta1 * adam_m_ + (1.0 - cfg_.adam_beta1) * grad;
    adam_v_ = (cfg_.adam_beta2 * adam_v_.array() +
               (1.0 - cfg_.adam_beta2) * grad.array().square())
                  .matrix();
    const double mc = 1.0 - std::pow(cfg_.adam_beta1, double(adam_t_));
    const double vc = 1.0 - std::pow(cfg_.adam_beta2, double(adam_t_));
    params_.array() -= cfg_.learning_rate * (adam_m_.array() / mc) /
                       ((adam_v_.array() / vc).sqrt() + cfg_.adam_eps);
  }
  for (int i = 0; i < ls_count_; ++i)
    params_[ls_offset_ + i] =
        std::clamp(params_[ls_offset_ + i], cfg_.log_std_min, cfg_.log_std_max);
}

void ParamStore::apply_unsafe(const VectorXd& grad) {
  // Lock-free update with per-element relaxed atomics. Races between
  // concurrent writers are accepted by design; snapshots may interleave
  // updates.
  const double lr = cfg_.learning_rate;
  if (cfg_.optimizer == A3cConfig::Optimizer::Sgd) {
    for (Eigen::Index i = 0; i < params_.size(); ++i)
      std::atomic_ref<double>(params_[i])
          .fetch_add(-lr * grad[i], std::memory_order_relaxed);
  } else {
    const std::int64_t t =
        std::atomic_ref<std::int64_t>(adam_t_)
            .fetch_add(1, std::memory_order_relaxed) +
        1;
    const double mc = 1.0 - std::pow(cfg_.adam_beta1, double(t));
    const double vc = 1.0 - std::pow(cfg_.adam_beta2, double(t));
    for (Eigen::Index i = 0; i < params_.size(); ++i) {
      std::atomic_ref<double> mr(adam_m_[i]);
      std::atomic_ref<double> vr(adam_v_[i]);
      const double m = cfg_.adam_beta1 * mr.load(std::memory_order_relaxed) +
                       (1.0 - cfg_.adam_beta1) * grad[i];
      const double v = cfg_.adam_beta2 * vr.load(std::memory_order_relaxed) +
                       (1.0 - cfg_.adam_beta2) * grad[i] * grad[i];
      mr.store(m, std::memory_order_relaxed);
      vr.store(v, std::memory_order_relaxed);
      std::atomic_ref<double>(params_[i])
          .fetch_add(-lr * (m / mc) / (std::sqrt(v / vc) + cfg_.adam_eps),
                     std::memory_order_relaxed);
    }
  }
  for (int i = 0; i < ls_count_; ++i) {
    std::atomic_ref<double> pr(params_[ls_offset_ + i]);
    pr.store(std::clamp(pr.load(std::memory_order_relaxed), cfg_.log_std_min,
                        cfg_.log_std_max),
             std::memory_order_relaxed);
  }
}

void ParamStore::set_params(const VectorXd& params) {
  std::unique_lock lock(mutex_);
  if (params.size() != params_.size())
    throw std::invalid_argument("param store: size mismatch");
  params_ = params;
  adam_m_.setZero();
  adam_v_.setZero();
  adam_t_ = 0;
  version_.fetch_add(1, std::memory_order_release);
}

std::uint64_t ParamStore::version() const {
  return version_.load(std::memory_order_acquire);
}

ParamStore::OptState ParamStore::optimizer_state() const {
  std::shared_lock lock(mutex_);
  return OptState{adam_m_, adam_v_, adam_t_};
}

void ParamStore::restore_optimizer_state(const OptState& state) {
  std::unique_lock lock(mutex_);
  if (state.adam_m.size() != params_.size() ||
      state.adam_v.size() != params_.size())
    throw std::invalid_argument("param store: optimizer state size mismatch");
  adam_m_ = state.adam_m;
  adam_v_ = state.adam_v;
  adam_t_ = state.adam_t;
}

TrainStats worker_loop(Env& env, ParamStore& store, const ActorCriticNet& net,
                       const WorkerConfig& wcfg, const ProgressFn& progress) {
  const A3cConfig& cfg = store.config();
  if (env.obs_dim() != net.obs_dim() || env.action_dim() != net.action_dim())
    throw std::invalid_argument("worker: env and net dimensions disagree");

  Rng rng(mix_seed(wcfg.seed, 0x5741334300000000ull + wcfg.worker_id));
  TrainStats stats;
  VectorXd grad = VectorXd::Zero(net.param_count());
  long episode_index = 0;
  double episode_reward = 0;
  double reward_sum = 0;
  VectorXd obs = env.reset(mix_seed(wcfg.seed, episode_index));
  bool running = true;

  while (running && stats.env_steps < wcfg.max_env_steps) {
    const VectorXd params = store.snapshot();
    TrajectorySegment seg;
    bool done = false, truncated = false;
    VectorXd final_obs;  // observation right after the episode's last step
    for (int i = 0; i < cfg.n_steps && stats.env_steps < wcfg.max_env_steps;
         ++i) {
      const auto fwd = net.forward(obs, params);
      const PolicySample ps =
          sample_policy(fwd.mean, fwd.log_std, cfg.action_scale, rng);
      Env::StepOut out = env.step(ps.action);
      SegmentStep st;
      st.evals.push_back(PolicyEval{obs, ps.presquash});
      st.reward = out.reward * cfg.reward_scale;
      seg.steps.push_back(std::move(st));
      ++stats.env_steps;
      episode_reward += out.reward;
      done = out.done;
      truncated = out.truncated;
      if (done) {
        ++stats.episodes;
        ++episode_index;
        stats.last_episode_reward = episode_reward;
        reward_sum += episode_reward;
        episode_reward = 0;
        final_obs = std::move(out.obs);
        obs = env.reset(mix_seed(wcfg.seed, episode_index));
        break;
      }
      obs = out.obs;
    }
    if (seg.steps.empty()) break;
    seg.terminal = done && !truncated;
    seg.bootstrap_value =
        seg.terminal ? 0.0
                     : net.forward(done ? final_obs : obs, params).value;
    compute_gradients(net, params, seg, cfg, grad);
    if (!grad.allFinite()) {
      ++stats.faults;  // discard the segment, keep training
      continue;
    }
    store.apply_gradient(grad);
    ++stats.updates;
    if (stats.episodes > 0)
      stats.mean_episode_reward = reward_sum / double(stats.episodes);
    if (progress && !progress(stats)) running = false;
  }
  return stats;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "parameter files are little-endian");

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

void write_sizes(std::ostream& out, const std::vector<int>& sizes) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(sizes.size()));
  for (int s : sizes) write_pod<std::int32_t>(out, s);
}

std::vector<int> read_sizes(std::ifstream& in) {
  const auto n = read_pod<std::uint32_t>(in);
  if (n > 64) throw std::runtime_error("checkpoint: implausible layer count");
  std::vector<int> sizes(n);
  for (auto& s : sizes) s = read_pod<std::int32_t>(in);
  return sizes;
}

}  // namespace

std::string params_blob(const ActorCriticNet& net, const VectorXd& params) {
  if (params.size() != net.param_count())
    throw std::invalid_argument("save_params: size mismatch");
  std::ostringstream out(std::ios::binary);
  out.write("WECP", 4);
  write_pod<std::uint32_t>(out, 1);  // format version
  write_sizes(out, net.layer_sizes());
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(params.size()));
  for (Eigen::Index i = 0; i < params.size(); ++i)
    write_pod<float>(out, static_cast<float>(params[i]));
  return out.str();
}

void save_params(const std::string& path, const ActorCriticNet& net,
                 const VectorXd& params) {
  const std::string blob = params_blob(net, params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_params: cannot open " + path);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw std::runtime_error("save_params: write failed " + path);
}

VectorXd load_params(const std::string& path, const ActorCriticNet& net) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_params: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "WECP")
    throw std::runtime_error("load_params: bad magic in " + path);
  if (read_pod<std::uint32_t>(in) != 1)
    throw std::runtime_error("load_params: unsupported version in " + path);
  if (read_sizes(in) != net.layer_sizes())
    throw std::runtime_error("load_params: layer sizes do not match net");
  const auto count = read_pod<std::uint64_t>(in);
  if (count != static_cast<std::uint64_t>(net.param_count()))
    throw std::runtime_error("load_params: parameter count mismatch");
  VectorXd params(static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < params.size(); ++i)
    params[i] = static_cast<double>(read_pod<float>(in));
  return params;
}

void save_training_checkpoint(const std::string& path,
                              const TrainingCheckpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out.write("WECT", 4);
  write_pod<std::uint32_t>(out, 1);
  write_sizes(out, ckpt.layer_sizes);
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(ckpt.params.size()));
  write_pod<std::int64_t>(out, ckpt.opt.adam_t);
  write_pod<std::int64_t>(out, static_cast<std::int64_t>(ckpt.env_steps));
  auto write_vec = [&](const VectorXd& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(sizeof(double) * v.size()));
  };
  write_vec(ckpt.params);
  if (ckpt.opt.adam_m.size() != ckpt.params.size() ||
      ckpt.opt.adam_v.size() != ckpt.params.size())
    throw std::invalid_argument("save_checkpoint: optimizer state mismatch");
  write_vec(ckpt.opt.adam_m);
  write_vec(ckpt.opt.adam_v);
  write_pod<std::uint64_t>(out, ckpt.rng_state.size());
  out.write(ckpt.rng_state.data(),
            static_cast<std::streamsize>(ckpt.rng_state.size()));
  if (!out) throw std::runtime_error("save_checkpoint: write failed " + path);
}

TrainingCheckpoint load_training_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "WECT")
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  if (read_pod<std::uint32_t>(in) != 1)
    throw std::runtime_error("load_checkpoint: unsupported version");
  TrainingCheckpoint ckpt;
  ckpt.layer_sizes = read_sizes(in);
  const auto count = read_pod<std::uint64_t>(in);
  ckpt.opt.adam_t = read_pod<std::int64_t>(in);
  ckpt.env_steps = static_cast<long>(read_pod<std::int64_t>(in));
  auto read_vec = [&](VectorXd& v) {
    v.resize(static_cast<Eigen::Index>(count));
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(sizeof(double) * v.size()));
    if (!in) throw std::runtime_error("load_checkpoint: truncated file");
  };
  read_vec(ckpt.params);
  read_vec(ckpt.opt.adam_m);
  read_vec(ckpt.opt.adam_v);
  const auto rng_len = read_pod<std::uint64_t>(in);
  if (rng_len > (1u << 20))
    throw std::runtime_error("load_checkpoint: implausible rng state");
  ckpt.rng_state.resize(rng_len);
  in.read(ckpt.rng_state.data(), static_cast<std::streamsize>(rng_len));
  if (!in) throw std::runtime_error("load_checkpoint: truncated file");
  return ckpt;
}

}  // namespace wecmarl
