#pragma once

#include <Eigen/Dense>

#include "wecmarl/rng.hpp"

namespace wecmarl {

using Eigen::VectorXd;

// Squashed-Gaussian policy: a = scale * tanh(u), u ~ N(mean, diag(std^2)).
// Gradients of the objective are taken at the stored pre-squash sample u, so
// the (parameter-independent) tanh change of variables never enters them.

struct PolicySample {
  VectorXd presquash;  // u
  VectorXd action;     // scale * tanh(u)
};

VectorXd squash_action(const VectorXd& presquash, double scale);

PolicySample sample_policy(const VectorXd& mean, const VectorXd& log_std,
                           double scale, Rng& rng);

// log N(u | mean, diag(exp(log_std)^2)).
double gaussian_log_prob(const VectorXd& presquash, const VectorXd& mean,
                         const VectorXd& log_std);

// Density of the squashed action (tanh + scale change of variables).
double squashed_log_prob(const VectorXd& presquash, const VectorXd& mean,
                         const VectorXd& log_std, double scale);

// d log N(u|mean,std) / d(mean, log_std) at fixed u.
void gaussian_log_prob_grad(const VectorXd& presquash, const VectorXd& mean,
                            const VectorXd& log_std, VectorXd& d_mean,
                            VectorXd& d_log_std);

// Entropy of the pre-squash Gaussian (the exploration knob the entropy bonus
// actually regularises).
double policy_entropy(const VectorXd& log_std);

}  // namespace wecmarl
