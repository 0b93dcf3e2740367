#pragma once

#include <span>
#include <vector>

namespace permstab {

inline constexpr double kDefaultBeta = 0.4;

/// Sequence log-probabilities of the preferred (w) and dispreferred (l)
/// responses under the trained policy and the frozen reference.
struct DpoExample {
  double logp_policy_w = 0.0;
  double logp_policy_l = 0.0;
  double logp_ref_w = 0.0;
  double logp_ref_l = 0.0;
};

struct DpoGradient {
  double policy_w = 0.0;
  double policy_l = 0.0;
};

struct DpoReport {
  double loss = 0.0;
  double mean_margin = 0.0;
  std::vector<double> margins;
  std::vector<DpoGradient> gradients;
};

/// Mean of -log sigmoid(margin) over the batch, where
/// margin = beta * ((pw - rw) - (pl - rl)). Gradients are with respect to
/// the policy log-probabilities only.
DpoReport dpo_loss(std::span<const DpoExample> batch, double beta = kDefaultBeta);

/// log pi(y|x) from per-token log-probabilities.
double sequence_logprob(std::span<const double> token_logprobs);

/// log(1 + exp(x)) without overflow.
double softplus(double x) noexcept;

}  // namespace permstab
