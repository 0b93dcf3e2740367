#include "permstab/dpo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "permstab/error.hpp"

namespace permstab {
namespace {

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Fixed-order pairwise reduction.
double pairwise_sum(std::span<const double> v) {
  if (v.empty()) return 0.0;
  if (v.size() == 1) return v[0];
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace

double softplus(double x) noexcept { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

DpoReport dpo_loss(std::span<const DpoExample> batch, double beta) {
  if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "dpo_loss needs at least one example");
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::NonPositiveBeta, "beta must be positive, got " + std::to_string(beta));
  }
  const double count = static_cast<double>(batch.size());
  DpoReport report;
  report.margins.reserve(batch.size());
  report.gradients.reserve(batch.size());
  std::vector<double> losses;
  losses.reserve(batch.size());
  for (const DpoExample& e : batch) {
    if (!std::isfinite(e.logp_policy_w) || !std::isfinite(e.logp_policy_l) || !std::isfinite(e.logp_ref_w) ||
        !std::isfinite(e.logp_ref_l)) {
      throw Error(ErrorCode::InvalidArgument, "log-probabilities must be finite");
    }
    const double margin = beta * ((e.logp_policy_w - e.logp_ref_w) - (e.logp_policy_l - e.logp_ref_l));
    report.margins.push_back(margin);
    losses.push_back(softplus(-margin));
    const double g = beta * sigmoid(-margin) / count;
    report.gradients.push_back({-g, g});
  }
  report.loss = pairwise_sum(losses) / count;
  report.mean_margin = pairwise_sum(report.margins) / count;
  return report;
}

double sequence_logprob(std::span<const double> token_logprobs) {
  double s = 0.0;
  for (double v : token_logprobs) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "token log-probability is not finite");
    s += v;
  }
  return s;
}

}  // namespace permstab
