#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wecmarl/rng.hpp"

namespace wecmarl {

using Eigen::VectorXd;

// Two-hidden-layer ReLU network with a Gaussian-mean head, a scalar value
// head, and a state-independent learnable log-std vector. All parameters
// live in one flat vector so snapshots, updates, and checkpoints are single
// contiguous copies; this class only describes the layout and the math.
//
// Flat layout: W1 | b1 | W2 | b2 | W_mean | b_mean | W_value | b_value |
// log_std, matrices stored column-major.
class ActorCriticNet {
 public:
  ActorCriticNet(int obs_dim, int action_dim, int hidden = 256);

  int obs_dim() const { return obs_dim_; }
  int action_dim() const { return action_dim_; }
  int hidden() const { return hidden_; }
  int param_count() const { return param_count_; }
  // log_std occupies the tail of the parameter vector.
  int log_std_offset() const { return param_count_ - action_dim_; }
  std::vector<int> layer_sizes() const {
    return {obs_dim_, hidden_, hidden_, action_dim_};
  }

  struct Forward {
    VectorXd mean;
    double value = 0;
    VectorXd log_std;
    // Caches for backward.
    VectorXd input, h1, h2;
  };

  Forward forward(const VectorXd& obs, const VectorXd& params) const;

  // Accumulate d(mean_grad . mean + value_grad * value + log_std_grad .
  // log_std)/d(params) into grad. `fwd` must come from forward() with the
  // same params.
  void backward(const Forward& fwd, const VectorXd& params,
                const VectorXd& mean_grad, double value_grad,
                const VectorXd& log_std_grad, VectorXd& grad) const;

  // He-initialised hidden layers, small mean head, zero biases.
  VectorXd init_params(Rng& rng, double init_log_std) const;

 private:
  int obs_dim_, action_dim_, hidden_, param_count_;
  // Segment offsets into the flat vector.
  int w1_, b1_, w2_, b2_, wm_, bm_, wv_, bv_, ls_;
};

}  // namespace wecmarl
