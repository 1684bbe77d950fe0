#include "wecmarl/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace wecmarl {

using Eigen::Map;
using Eigen::MatrixXd;

ActorCriticNet::ActorCriticNet(int obs_dim, int action_dim, int hidden)
    : obs_dim_(obs_dim), action_dim_(action_dim), hidden_(hidden) {
  if (obs_dim < 1 || action_dim < 1 || hidden < 1)
    throw std::invalid_argument("net: dimensions must be positive");
  w1_ = 0;
  b1_ = w1_ + hidden_ * obs_dim_;
  w2_ = b1_ + hidden_;
  b2_ = w2_ + hidden_ * hidden_;
  wm_ = b2_ + hidden_;
  bm_ = wm_ + action_dim_ * hidden_;
  wv_ = bm_ + action_dim_;
  bv_ = wv_ + hidden_;
  ls_ = bv_ + 1;
  param_count_ = ls_ + action_dim_;
}

ActorCriticNet::Forward ActorCriticNet::forward(const VectorXd& obs,
                                                const VectorXd& params) const {
  if (obs.size() != obs_dim_)
    throw std::invalid_argument("net: observation size mismatch");
  if (params.size() != param_count_)
    throw std::invalid_argument("net: parameter size mismatch");

  const Map<const MatrixXd> w1(params.data() + w1_, hidden_, obs_dim_);
  const Map<const VectorXd> b1(params.data() + b1_, hidden_);
  const Map<const MatrixXd> w2(params.data() + w2_, hidden_, hidden_);
  const Map<const VectorXd> b2(params.data() + b2_, hidden_);
  const Map<const MatrixXd> wm(params.data() + wm_, action_dim_, hidden_);
  const Map<const VectorXd> bm(params.data() + bm_, action_dim_);
  const Map<const VectorXd> wv(params.data() + wv_, hidden_);
  const double bv = params[bv_];

  Forward f;
  f.input = obs;
  f.h1 = ((w1 * obs + b1).array().max(0.0)).matrix();
  f.h2 = ((w2 * f.h1 + b2).array().max(0.0)).matrix();
  f.mean = wm * f.h2 + bm;
  f.value = wv.dot(f.h2) + bv;
  f.log_std = params.segment(ls_, action_dim_);
  return f;
}

void ActorCriticNet::backward(const Forward& fwd, const VectorXd& params,
                              const VectorXd& mean_grad, double value_grad,
                              const VectorXd& log_std_grad,
                              VectorXd& grad) const {
  if (grad.size() != param_count_)
    throw std::invalid_argument("net: gradient size mismatch");

  const Map<const MatrixXd> w2(params.data() + w2_, hidden_, hidden_);
  const Map<const MatrixXd> wm(params.data() + wm_, action_dim_, hidden_);
  const Map<const VectorXd> wv(params.data() + wv_, hidden_);

  Map<MatrixXd> dw1(grad.data() + w1_, hidden_, obs_dim_);
  Map<VectorXd> db1(grad.data() + b1_, hidden_);
  Map<MatrixXd> dw2(grad.data() + w2_, hidden_, hidden_);
  Map<VectorXd> db2(grad.data() + b2_, hidden_);
  Map<MatrixXd> dwm(grad.data() + wm_, action_dim_, hidden_);
  Map<VectorXd> dbm(grad.data() + bm_, action_dim_);
  Map<VectorXd> dwv(grad.data() + wv_, hidden_);

  grad.segment(ls_, action_dim_) += log_std_grad;
  dwm.noalias() += mean_grad * fwd.h2.transpose();
  dbm += mean_grad;
  dwv += value_grad * fwd.h2;
  grad[bv_] += value_grad;

  VectorXd dh2 = wm.transpose() * mean_grad + value_grad * wv;
  // ReLU mask from the cached post-activations.
  VectorXd dz2 =
      (fwd.h2.array() > 0.0).select(dh2.array(), 0.0).matrix();
  dw2.noalias() += dz2 * fwd.h1.transpose();
  db2 += dz2;

  VectorXd dh1 = w2.transpose() * dz2;
  VectorXd dz1 =
      (fwd.h1.array() > 0.0).select(dh1.array(), 0.0).matrix();
  dw1.noalias() += dz1 * fwd.input.transpose();
  db1 += dz1;
}

VectorXd ActorCriticNet::init_params(Rng& rng, double init_log_std) const {
  VectorXd p = VectorXd::Zero(param_count_);
  const double s1 = std::sqrt(2.0 / obs_dim_);
  const double s2 = std::sqrt(2.0 / hidden_);
  for (int i = 0; i < hidden_ * obs_dim_; ++i) p[w1_ + i] = s1 * rng.normal();
  for (int i = 0; i < hidden_ * hidden_; ++i) p[w2_ + i] = s2 * rng.normal();
  // Small mean head: the fresh policy stays near zero force so exploration
  // is driven by the log-std, not by random large biases.
  const double sm = 0.01 / std::sqrt(static_cast<double>(hidden_));
  for (int i = 0; i < action_dim_ * hidden_; ++i)
    p[wm_ + i] = sm * rng.normal();
  const double sv = 1.0 / std::sqrt(static_cast<double>(hidden_));
  for (int i = 0; i < hidden_; ++i) p[wv_ + i] = sv * rng.normal();
  p.segment(ls_, action_dim_).setConstant(init_log_std);
  return p;
}

}  // namespace wecmarl
