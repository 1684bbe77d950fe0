#include "wecmarl/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace wecmarl {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
}

VectorXd squash_action(const VectorXd& presquash, double scale) {
  return scale * presquash.array().tanh().matrix();
}

PolicySample sample_policy(const VectorXd& mean, const VectorXd& log_std,
                           double scale, Rng& rng) {
  if (mean.size() != log_std.size())
    throw std::invalid_argument("policy: mean/log_std size mismatch");
  PolicySample s;
  s.presquash.resize(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i)
    s.presquash[i] = mean[i] + std::exp(log_std[i]) * rng.normal();
  s.action = squash_action(s.presquash, scale);
  return s;
}

double gaussian_log_prob(const VectorXd& presquash, const VectorXd& mean,
                         const VectorXd& log_std) {
  double lp = 0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double z = (presquash[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i] - 0.5 * kLogTwoPi;
  }
  return lp;
}

double squashed_log_prob(const VectorXd& presquash, const VectorXd& mean,
                         const VectorXd& log_std, double scale) {
  double lp = gaussian_log_prob(presquash, mean, log_std);
  for (Eigen::Index i = 0; i < presquash.size(); ++i) {
    const double t = std::tanh(presquash[i]);
    // |da/du| = scale * (1 - tanh(u)^2); log1p keeps precision at large |u|.
    lp -= std::log(scale) + std::log1p(-t * t);
  }
  return lp;
}

void gaussian_log_prob_grad(const VectorXd& presquash, const VectorXd& mean,
                            const VectorXd& log_std, VectorXd& d_mean,
                            VectorXd& d_log_std) {
  const Eigen::Index n = mean.size();
  d_mean.resize(n);
  d_log_std.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double inv_var = std::exp(-2.0 * log_std[i]);
    const double diff = presquash[i] - mean[i];
    d_mean[i] = diff * inv_var;
    d_log_std[i] = diff * diff * inv_var - 1.0;
  }
}

double policy_entropy(const VectorXd& log_std) {
  return log_std.sum() +
         0.5 * static_cast<double>(log_std.size()) * (1.0 + kLogTwoPi);
}

}  // namespace wecmarl
