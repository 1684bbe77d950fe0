#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "doctest.h"
#include "wecmarl/rl.hpp"

using namespace wecmarl;

namespace {

// Plain-loop recomputation of the network forward pass, no Eigen products.
struct NaiveForward {
  std::vector<double> mean;
  double value = 0;
};

NaiveForward naive_forward(const ActorCriticNet& net, const VectorXd& obs,
                           const VectorXd& p) {
  const int in = net.obs_dim(), h = net.hidden(), a = net.action_dim();
  auto relu = [](double x) { return x > 0 ? x : 0.0; };
  std::vector<double> h1(h), h2(h);
  int o = 0;
  // W1 column-major: entry (r, c) at o + c*h + r.
  for (int r = 0; r < h; ++r) {
    double z = p[o + h * in + r];  // b1
    for (int c = 0; c < in; ++c) z += p[o + c * h + r] * obs[c];
    h1[r] = relu(z);
  }
  o += h * in + h;
  for (int r = 0; r < h; ++r) {
    double z = p[o + h * h + r];
    for (int c = 0; c < h; ++c) z += p[o + c * h + r] * h1[c];
    h2[r] = relu(z);
  }
  o += h * h + h;
  NaiveForward f;
  f.mean.resize(a);
  for (int r = 0; r < a; ++r) {
    double z = p[o + a * h + r];
    for (int c = 0; c < h; ++c) z += p[o + c * a + r] * h2[c];
    f.mean[r] = z;
  }
  o += a * h + a;
  double z = p[o + h];
  for (int c = 0; c < h; ++c) z += p[o + c] * h2[c];
  f.value = z;
  return f;
}

// A segment with mixed rewards, a double-eval step, and a bootstrap.
TrajectorySegment fixture_segment(const ActorCriticNet& net, Rng& rng) {
  TrajectorySegment seg;
  auto rand_obs = [&] {
    VectorXd v(net.obs_dim());
    for (int i = 0; i < net.obs_dim(); ++i) v[i] = rng.normal();
    return v;
  };
  auto rand_u = [&] {
    VectorXd v(net.action_dim());
    for (int i = 0; i < net.action_dim(); ++i) v[i] = 0.5 * rng.normal();
    return v;
  };
  const double rewards[3] = {0.5, -0.3, 0.8};
  for (int i = 0; i < 3; ++i) {
    SegmentStep st;
    st.reward = rewards[i];
    st.evals.push_back(PolicyEval{rand_obs(), rand_u()});
    if (i == 1) st.evals.push_back(PolicyEval{rand_obs(), rand_u()});
    seg.steps.push_back(std::move(st));
  }
  seg.bootstrap_value = 0.7;
  seg.terminal = false;
  return seg;
}

// The segment objective with advantages frozen at the reference parameters,
// matching the estimator's stop-gradient semantics.
double frozen_adv_loss(const ActorCriticNet& net, const VectorXd& theta,
                       const TrajectorySegment& seg, const A3cConfig& cfg,
                       const std::vector<double>& frozen_adv) {
  std::vector<double> rewards;
  for (const auto& s : seg.steps) rewards.push_back(s.reward);
  const auto returns = n_step_returns(
      rewards, cfg.gamma, seg.terminal ? 0.0 : seg.bootstrap_value);
  double loss = 0;
  for (size_t i = 0; i < seg.steps.size(); ++i) {
    const auto f0 = net.forward(seg.steps[i].evals[0].obs, theta);
    const double dv = returns[i] - f0.value;
    loss += cfg.value_coef * dv * dv;
    for (const auto& ev : seg.steps[i].evals) {
      const auto fe = net.forward(ev.obs, theta);
      loss -= frozen_adv[i] * gaussian_log_prob(ev.presquash, fe.mean, fe.log_std);
      loss -= cfg.entropy_coef * policy_entropy(fe.log_std);
    }
  }
  return loss;
}

// Single-state bandit: reward peaks at action 0.3, episodes are one step.
class BanditEnv : public Env {
 public:
  int obs_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  VectorXd reset(std::uint64_t) override { return VectorXd::Ones(1); }
  StepOut step(const VectorXd& a) override {
    const double d = a[0] - 0.3;
    return StepOut{VectorXd::Ones(1), -d * d, true};
  }
};

// Endless unit reward; only the critic has anything to learn.
class ConstantRewardEnv : public Env {
 public:
  int obs_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  VectorXd reset(std::uint64_t) override { return VectorXd::Ones(1); }
  StepOut step(const VectorXd&) override {
    return StepOut{VectorXd::Ones(1), 1.0, false};
  }
};

// Deterministic scalar tracking task used for the byte-determinism check.
class DriftEnv : public Env {
 public:
  int obs_dim() const override { return 2; }
  int action_dim() const override { return 1; }
  VectorXd reset(std::uint64_t seed) override {
    Rng r(seed);
    x_ = r.normal();
    t_ = 0;
    return obs();
  }
  StepOut step(const VectorXd& a) override {
    x_ = 0.9 * x_ + 0.2 * a[0];
    ++t_;
    return StepOut{obs(), -x_ * x_, t_ >= 32};
  }

 private:
  VectorXd obs() const {
    VectorXd o(2);
    o << x_, 1.0;
    return o;
  }
  double x_ = 0;
  int t_ = 0;
};

}  // namespace

TEST_SUITE("mlp") {
  TEST_CASE("parameter layout and count") {
    const ActorCriticNet net(4, 2, 5);
    // 20 + 5 + 25 + 5 + 10 + 2 + 5 + 1 + 2
    CHECK(net.param_count() == 75);
    CHECK(net.log_std_offset() == 73);
    CHECK(net.layer_sizes() == std::vector<int>{4, 5, 5, 2});
    CHECK_THROWS_AS(ActorCriticNet(0, 1, 4), std::invalid_argument);
  }

  TEST_CASE("forward agrees with a plain-loop implementation") {
    const ActorCriticNet net(4, 2, 5);
    Rng rng(42);
    const VectorXd params = net.init_params(rng, -0.5);
    for (int trial = 0; trial < 10; ++trial) {
      VectorXd obs(4);
      for (int i = 0; i < 4; ++i) obs[i] = rng.normal();
      const auto f = net.forward(obs, params);
      const auto g = naive_forward(net, obs, params);
      for (int i = 0; i < 2; ++i)
        CHECK(f.mean[i] == doctest::Approx(g.mean[i]).epsilon(1e-13));
      CHECK(f.value == doctest::Approx(g.value).epsilon(1e-13));
      CHECK(f.log_std[0] == -0.5);
      CHECK(f.log_std[1] == -0.5);
    }
    CHECK_THROWS_AS(net.forward(VectorXd::Zero(3), params),
                    std::invalid_argument);
  }

  TEST_CASE("backward matches finite differences of the head outputs") {
    const ActorCriticNet net(3, 2, 6);
    Rng rng(7);
    const VectorXd params = net.init_params(rng, -0.3);
    VectorXd obs(3);
    obs << 0.4, -1.1, 0.7;
    VectorXd cm(2), cl(2);
    cm << 0.8, -0.5;
    cl << 0.3, 0.9;
    const double cv = -0.6;

    auto scalar = [&](const VectorXd& p) {
      const auto f = net.forward(obs, p);
      return cm.dot(f.mean) + cv * f.value + cl.dot(f.log_std);
    };

    VectorXd grad = VectorXd::Zero(net.param_count());
    const auto f = net.forward(obs, params);
    net.backward(f, params, cm, cv, cl, grad);

    Rng pick(99);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
      const int idx =
          static_cast<int>(pick.uniform() * net.param_count());
      const double h = 1e-6 * std::max(1.0, std::abs(params[idx]));
      VectorXd pp = params, pm = params;
      pp[idx] += h;
      pm[idx] -= h;
      const double fd = (scalar(pp) - scalar(pm)) / (2 * h);
      CHECK(grad[idx] == doctest::Approx(fd).epsilon(1e-6));
      ++checked;
    }
    CHECK(checked >= 40);
  }
}

TEST_SUITE("policy") {
  TEST_CASE("samples follow the requested distribution") {
    Rng rng(5);
    VectorXd mean(1), log_std(1);
    mean << 0.4;
    log_std << std::log(0.7);
    double sum = 0, sumsq = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
      const auto s = sample_policy(mean, log_std, 2.0, rng);
      sum += s.presquash[0];
      sumsq += s.presquash[0] * s.presquash[0];
      CHECK(s.action[0] == doctest::Approx(2.0 * std::tanh(s.presquash[0])));
      CHECK(std::abs(s.action[0]) < 2.0);
    }
    const double m = sum / n;
    const double sd = std::sqrt(sumsq / n - m * m);
    CHECK(m == doctest::Approx(0.4).epsilon(0.05));
    CHECK(sd == doctest::Approx(0.7).epsilon(0.03));
  }

  TEST_CASE("squashed density integrates to one over the action range") {
    VectorXd mean(1), log_std(1);
    mean << 0.2;
    log_std << std::log(0.5);
    const double scale = 2.0;
    // Simpson over a in (-scale, scale) via the pre-squash coordinate.
    const int n = 4000;
    const double lo = -0.999999 * scale, hi = 0.999999 * scale;
    const double dx = (hi - lo) / n;
    double integral = 0;
    for (int i = 0; i <= n; ++i) {
      const double a = lo + i * dx;
      VectorXd u(1);
      u << std::atanh(a / scale);
      const double p = std::exp(squashed_log_prob(u, mean, log_std, scale));
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      integral += w * p;
    }
    integral *= dx / 3.0;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("entropy matches a Monte Carlo estimate") {
    Rng rng(11);
    VectorXd mean(2), log_std(2);
    mean << -0.3, 0.8;
    log_std << std::log(0.4), std::log(1.3);
    const double h = policy_entropy(log_std);
    double acc = 0;
    const int n = 60000;
    for (int i = 0; i < n; ++i) {
      const auto s = sample_policy(mean, log_std, 1.0, rng);
      acc -= gaussian_log_prob(s.presquash, mean, log_std);
    }
    CHECK(acc / n == doctest::Approx(h).epsilon(0.02));
  }

  TEST_CASE("log-prob gradient matches finite differences") {
    VectorXd mean(2), log_std(2), u(2);
    mean << 0.1, -0.6;
    log_std << std::log(0.9), std::log(0.3);
    u << 0.5, -0.2;
    VectorXd dm, dl;
    gaussian_log_prob_grad(u, mean, log_std, dm, dl);
    const double h = 1e-7;
    for (int i = 0; i < 2; ++i) {
      VectorXd mp = mean, mm = mean;
      mp[i] += h;
      mm[i] -= h;
      const double fd =
          (gaussian_log_prob(u, mp, log_std) - gaussian_log_prob(u, mm, log_std)) /
          (2 * h);
      CHECK(dm[i] == doctest::Approx(fd).epsilon(1e-6));
      VectorXd lp = log_std, lm = log_std;
      lp[i] += h;
      lm[i] -= h;
      const double fdl =
          (gaussian_log_prob(u, mean, lp) - gaussian_log_prob(u, mean, lm)) /
          (2 * h);
      CHECK(dl[i] == doctest::Approx(fdl).epsilon(1e-6));
    }
  }
}

TEST_SUITE("rl") {
  TEST_CASE("n-step returns, by hand") {
    const auto r1 = n_step_returns({1.0, 1.0, 1.0}, 0.9, 0.0);
    REQUIRE(r1.size() == 3);
    CHECK(r1[0] == doctest::Approx(2.71).epsilon(1e-12));
    CHECK(r1[1] == doctest::Approx(1.9).epsilon(1e-12));
    CHECK(r1[2] == doctest::Approx(1.0).epsilon(1e-12));

    const auto r2 = n_step_returns({1.0, 2.0}, 0.5, 10.0);
    CHECK(r2[0] == doctest::Approx(4.5).epsilon(1e-12));
    CHECK(r2[1] == doctest::Approx(7.0).epsilon(1e-12));
  }

  TEST_CASE("policy gradient matches finite differences") {
    const ActorCriticNet net(4, 2, 6);
    Rng rng(2024);
    const VectorXd params = net.init_params(rng, -0.4);
    const TrajectorySegment seg = fixture_segment(net, rng);
    A3cConfig cfg;
    cfg.gamma = 0.95;
    cfg.value_coef = 0.5;
    cfg.entropy_coef = 0.01;
    cfg.grad_clip = 0;  // no clipping; FD needs the raw gradient

    // Freeze advantages at the reference parameters.
    std::vector<double> rewards;
    for (const auto& s : seg.steps) rewards.push_back(s.reward);
    const auto returns = n_step_returns(rewards, cfg.gamma, seg.bootstrap_value);
    std::vector<double> adv;
    for (size_t i = 0; i < seg.steps.size(); ++i)
      adv.push_back(returns[i] -
                    net.forward(seg.steps[i].evals[0].obs, params).value);

    VectorXd grad;
    compute_gradients(net, params, seg, cfg, grad);

    Rng pick(31);
    int compared = 0;
    const double gmax = grad.cwiseAbs().maxCoeff();
    for (int trial = 0; trial < 200 && compared < 24; ++trial) {
      const int idx = static_cast<int>(pick.uniform() * net.param_count());
      if (std::abs(grad[idx]) < 1e-6 * gmax) continue;  // dead ReLU paths
      const double h = 1e-5 * std::max(1.0, std::abs(params[idx]));
      VectorXd pp = params, pm = params;
      pp[idx] += h;
      pm[idx] -= h;
      const double fd = (frozen_adv_loss(net, pp, seg, cfg, adv) -
                         frozen_adv_loss(net, pm, seg, cfg, adv)) /
                        (2 * h);
      const double rel =
          std::abs(grad[idx] - fd) / std::max(std::abs(fd), 1e-10);
      CHECK(rel < 1e-4);
      ++compared;
    }
    CHECK(compared >= 24);

    // The log-std entries always carry gradient; check them explicitly.
    for (int i = 0; i < 2; ++i) {
      const int idx = net.log_std_offset() + i;
      const double h = 1e-6;
      VectorXd pp = params, pm = params;
      pp[idx] += h;
      pm[idx] -= h;
      const double fd = (frozen_adv_loss(net, pp, seg, cfg, adv) -
                         frozen_adv_loss(net, pm, seg, cfg, adv)) /
                        (2 * h);
      CHECK(grad[idx] == doctest::Approx(fd).epsilon(1e-5));
    }
  }

  TEST_CASE("gradient is linear in the advantage") {
    const ActorCriticNet net(3, 1, 5);
    Rng rng(8);
    VectorXd params = net.init_params(rng, -0.2);
    // Kill the value head so advantages equal returns exactly.
    const int head = net.param_count() - 1 /*bv*/ - net.hidden() - 1 /*ls*/;
    params.segment(head, net.hidden() + 1).setZero();

    A3cConfig cfg;
    cfg.value_coef = 0;
    cfg.entropy_coef = 0;
    cfg.grad_clip = 0;

    TrajectorySegment seg = fixture_segment(
        ActorCriticNet(3, 1, 5), rng);  // same dims, fresh random content
    for (auto& s : seg.steps) s.evals.resize(1);
    seg.terminal = true;

    VectorXd g1, g2;
    compute_gradients(net, params, seg, cfg, g1);
    for (auto& s : seg.steps) s.reward *= 2.0;
    compute_gradients(net, params, seg, cfg, g2);
    CHECK((g2 - 2.0 * g1).cwiseAbs().maxCoeff() < 1e-12 * g1.cwiseAbs().maxCoeff());
  }

  TEST_CASE("zero advantage yields zero gradient") {
    const ActorCriticNet net(2, 1, 4);
    Rng rng(13);
    VectorXd params = net.init_params(rng, -0.1);
    // Value head: weights zero, bias equal to the (sole) return.
    params.segment(net.param_count() - 2 - net.hidden(), net.hidden()).setZero();
    params[net.param_count() - 2] = 1.25;  // bv

    TrajectorySegment seg;
    SegmentStep st;
    st.reward = 1.25;
    VectorXd obs(2);
    obs << 0.3, -0.8;
    VectorXd u(1);
    u << 0.4;
    st.evals.push_back(PolicyEval{obs, u});
    seg.steps.push_back(st);
    seg.terminal = true;

    A3cConfig cfg;
    cfg.entropy_coef = 0;
    cfg.grad_clip = 0;
    VectorXd grad;
    const auto stats = compute_gradients(net, params, seg, cfg, grad);
    CHECK(grad.cwiseAbs().maxCoeff() == 0.0);
    CHECK(stats.grad_norm == 0.0);
  }

  TEST_CASE("global-norm clipping") {
    const ActorCriticNet net(2, 1, 4);
    Rng rng(3);
    const VectorXd params = net.init_params(rng, 0.0);
    TrajectorySegment seg;
    SegmentStep st;
    st.reward = 1e4;  // huge advantage
    VectorXd obs(2);
    obs << 1.0, -0.5;
    VectorXd u(1);
    u << 2.0;
    st.evals.push_back(PolicyEval{obs, u});
    seg.steps.push_back(st);
    seg.terminal = true;

    A3cConfig cfg;
    cfg.grad_clip = 5.0;
    VectorXd grad;
    const auto stats = compute_gradients(net, params, seg, cfg, grad);
    CHECK(stats.grad_norm == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(grad.norm() == doctest::Approx(5.0).epsilon(1e-12));
  }

  TEST_CASE("sgd and adam updates") {
    A3cConfig cfg;
    cfg.learning_rate = 0.1;
    VectorXd p0 = VectorXd::Zero(3);
    p0 << 1.0, -2.0, 0.5;

    ParamStore sgd(p0, cfg, 2, 1);
    VectorXd g(3);
    g << 0.5, -1.0, 0.0;
    sgd.apply_gradient(g);
    const VectorXd p1 = sgd.snapshot();
    CHECK(p1[0] == doctest::Approx(0.95).epsilon(1e-15));
    CHECK(p1[1] == doctest::Approx(-1.9).epsilon(1e-15));
    CHECK(sgd.version() == 1);

    // Two Adam steps on one parameter, values pinned from an independent
    // reference run.
    cfg.optimizer = A3cConfig::Optimizer::Adam;
    ParamStore adam(VectorXd::Ones(1), cfg, 0, 0);
    VectorXd g1(1), g2(1);
    g1 << 0.5;
    g2 << -0.3;
    adam.apply_gradient(g1);
    CHECK(adam.snapshot()[0] ==
          doctest::Approx(0.90000000199999997).epsilon(1e-14));
    adam.apply_gradient(g2);
    CHECK(adam.snapshot()[0] ==
          doctest::Approx(0.88085019894177519).epsilon(1e-14));
  }

  TEST_CASE("log-std stays inside its bounds after updates") {
    A3cConfig cfg;
    cfg.learning_rate = 1.0;
    cfg.log_std_min = -5.0;
    cfg.log_std_max = 2.0;
    ParamStore store(VectorXd::Zero(4), cfg, 3, 1);
    VectorXd g = VectorXd::Zero(4);
    g[3] = -100.0;  // pushes log_std to +100 without projection
    store.apply_gradient(g);
    CHECK(store.snapshot()[3] == 2.0);
    g[3] = 100.0;
    store.apply_gradient(g);
    store.apply_gradient(g);
    CHECK(store.snapshot()[3] == -5.0);
  }

  TEST_CASE("snapshots are never torn while a writer runs") {
    A3cConfig cfg;
    cfg.learning_rate = 1e-3;
    const int dim = 512;
    ParamStore store(VectorXd::Zero(dim), cfg, 0, 0);
    const VectorXd g = VectorXd::Ones(dim);

    std::thread writer([&] {
      for (int i = 0; i < 2000; ++i) store.apply_gradient(g);
    });
    int inconsistent = 0;
    for (int i = 0; i < 400; ++i) {
      const VectorXd snap = store.snapshot();
      const double k0 = snap[0];
      for (int j = 1; j < dim; ++j)
        if (std::abs(snap[j] - k0) > 1e-12) ++inconsistent;
    }
    writer.join();
    CHECK(inconsistent == 0);
    CHECK(store.version() == 2000);
    CHECK(store.snapshot()[0] == doctest::Approx(-2.0).epsilon(1e-9));
  }

  TEST_CASE("unsafe async mode runs lock-free and stays finite") {
    A3cConfig cfg;
    cfg.learning_rate = 1e-4;
    ParamStore store(VectorXd::Zero(64), cfg, 0, 0);
    store.set_unsafe_async(true);
    const VectorXd g = VectorXd::Ones(64);
    std::thread a([&] {
      for (int i = 0; i < 500; ++i) store.apply_gradient(g);
    });
    std::thread b([&] {
      for (int i = 0; i < 500; ++i) store.apply_gradient(g);
    });
    a.join();
    b.join();
    const VectorXd p = store.snapshot();
    CHECK(p.allFinite());
    // Plain fetch_add commutes: with SGD the result is exact even racing.
    CHECK(p[0] == doctest::Approx(-0.1).epsilon(1e-9));
    CHECK(store.version() == 1000);
  }

  TEST_CASE("training is reproducible bit for bit") {
    auto train_once = [](std::uint64_t seed) {
      const ActorCriticNet net(2, 1, 8);
      Rng init(seed);
      A3cConfig cfg;
      cfg.n_steps = 16;
      cfg.learning_rate = 1e-3;
      ParamStore store(net.init_params(init, cfg.init_log_std), cfg,
                       net.log_std_offset(), net.action_dim());
      DriftEnv env;
      WorkerConfig wc;
      wc.seed = seed;
      wc.max_env_steps = 4000;
      worker_loop(env, store, net, wc);
      return store.snapshot();
    };
    const VectorXd a = train_once(77);
    const VectorXd b = train_once(77);
    REQUIRE(a.size() == b.size());
    CHECK((a.array() == b.array()).all());
    const VectorXd c = train_once(78);
    CHECK_FALSE((a.array() == c.array()).all());
  }

  TEST_CASE("bandit: the policy mean converges to the optimum") {
    const ActorCriticNet net(1, 1, 16);
    Rng init(1234);
    A3cConfig cfg;
    cfg.optimizer = A3cConfig::Optimizer::Adam;
    cfg.learning_rate = 5e-3;
    cfg.entropy_coef = 1e-3;
    cfg.gamma = 0.99;
    ParamStore store(net.init_params(init, cfg.init_log_std), cfg,
                     net.log_std_offset(), net.action_dim());
    BanditEnv env;
    WorkerConfig wc;
    wc.seed = 9;
    wc.max_env_steps = 6000;
    worker_loop(env, store, net, wc);

    const auto f = net.forward(VectorXd::Ones(1), store.snapshot());
    const double a = cfg.action_scale * std::tanh(f.mean[0]);
    CHECK(a == doctest::Approx(0.3).epsilon(0.17));  // |a - 0.3| < ~0.05
    CHECK(std::abs(a - 0.3) < 0.05);
  }

  TEST_CASE("critic learns the discounted constant-reward value") {
    const ActorCriticNet net(1, 1, 16);
    Rng init(555);
    A3cConfig cfg;
    cfg.optimizer = A3cConfig::Optimizer::Adam;
    cfg.learning_rate = 1e-2;
    cfg.gamma = 0.95;
    cfg.n_steps = 20;
    ParamStore store(net.init_params(init, cfg.init_log_std), cfg,
                     net.log_std_offset(), net.action_dim());
    ConstantRewardEnv env;
    WorkerConfig wc;
    wc.seed = 4;
    wc.max_env_steps = 30000;
    worker_loop(env, store, net, wc);
    const auto f = net.forward(VectorXd::Ones(1), store.snapshot());
    CHECK(f.value == doctest::Approx(20.0).epsilon(0.05));  // 1/(1-gamma)
  }

  TEST_CASE("parameter files round-trip at fp32 precision") {
    namespace fs = std::filesystem;
    const ActorCriticNet net(3, 2, 4);
    Rng rng(21);
    const VectorXd params = net.init_params(rng, -0.9);
    const auto path = fs::temp_directory_path() / "wecmarl_params_test.bin";
    save_params(path.string(), net, params);
    const VectorXd loaded = load_params(path.string(), net);
    for (Eigen::Index i = 0; i < params.size(); ++i)
      CHECK(loaded[i] == static_cast<double>(static_cast<float>(params[i])));

    // Same content twice -> identical bytes.
    const auto path2 = fs::temp_directory_path() / "wecmarl_params_test2.bin";
    save_params(path2.string(), net, params);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), {});
    const std::string b2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(b1 == b2);

    const ActorCriticNet other(3, 2, 5);
    CHECK_THROWS_AS(load_params(path.string(), other), std::runtime_error);
    fs::remove(path);
    fs::remove(path2);
  }

  TEST_CASE("training checkpoints restore exactly") {
    namespace fs = std::filesystem;
    const ActorCriticNet net(2, 1, 4);
    Rng rng(31);
    TrainingCheckpoint ck;
    ck.layer_sizes = net.layer_sizes();
    ck.params = net.init_params(rng, -0.2);
    ck.opt.adam_m = VectorXd::Random(net.param_count());
    ck.opt.adam_v = VectorXd::Random(net.param_count()).cwiseAbs();
    ck.opt.adam_t = 1234;
    ck.env_steps = 98765;
    ck.rng_state = rng.state();
    const auto path = fs::temp_directory_path() / "wecmarl_ckpt_test.bin";
    save_training_checkpoint(path.string(), ck);
    const TrainingCheckpoint lk = load_training_checkpoint(path.string());
    CHECK(lk.layer_sizes == ck.layer_sizes);
    CHECK((lk.params.array() == ck.params.array()).all());
    CHECK((lk.opt.adam_m.array() == ck.opt.adam_m.array()).all());
    CHECK((lk.opt.adam_v.array() == ck.opt.adam_v.array()).all());
    CHECK(lk.opt.adam_t == 1234);
    CHECK(lk.env_steps == 98765);
    CHECK(lk.rng_state == ck.rng_state);
    fs::remove(path);
  }
}
