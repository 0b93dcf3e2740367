#include "permstab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "permstab/error.hpp"
#include "permstab/random.hpp"

namespace permstab {
namespace {

constexpr std::size_t kBruteForceLimit = 12;
constexpr int kLabelRedraws = 64;

double pairs(double n) { return n * (n - 1.0) / 2.0; }

std::vector<std::vector<double>> orthonormal_modes(std::size_t count, std::size_t dim, Rng& rng) {
  std::vector<std::vector<double>> modes;
  while (modes.size() < count) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal();
    for (const auto& m : modes) {
      const double proj = dot(v, m);
      for (std::size_t j = 0; j < dim; ++j) v[j] -= proj * m[j];
    }
    const double norm = std::sqrt(dot(v, v));
    if (norm < 1e-8) continue;
    for (double& x : v) x /= norm;
    modes.push_back(std::move(v));
  }
  return modes;
}

double partition_cost(const DenseMatrix& points, const std::vector<std::size_t>& labels, std::size_t k) {
  const std::size_t d = points.cols();
  std::vector<double> sums(k * d, 0.0);
  std::vector<double> counts(k, 0.0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) sums[labels[i] * d + j] += points(i, j);
    counts[labels[i]] += 1.0;
  }
  double cost = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = points(i, j) - sums[labels[i] * d + j] / counts[labels[i]];
      cost += diff * diff;
    }
  }
  return cost;
}

}  // namespace

LabeledBundle generate(const SynthSpec& spec) {
  const std::size_t k = spec.true_modes;
  const std::size_t n = spec.n_states;
  if (k < 2 || k > n) throw Error(ErrorCode::InfeasibleSpec, "need 2 <= modes <= states");
  if (spec.dim < k) throw Error(ErrorCode::InfeasibleSpec, "dimension must be at least the mode count");
  if (n > kMaxPermutations) throw Error(ErrorCode::InfeasibleSpec, "at most 5040 states");
  if (!(spec.noise_std > 0.0) || !std::isfinite(spec.noise_std)) {
    throw Error(ErrorCode::InfeasibleSpec, "noise_std must be positive");
  }
  std::vector<double> weights = spec.size_weights.empty() ? std::vector<double>(k, 1.0) : spec.size_weights;
  if (weights.size() != k) throw Error(ErrorCode::InfeasibleSpec, "size_weights must have one entry per mode");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::InfeasibleSpec, "every mode needs a positive size weight");
    }
    total += w;
  }

  Rng rng(spec.seed);
  const auto modes = orthonormal_modes(k, spec.dim, rng);

  std::vector<std::size_t> labels(n);
  bool covered = false;
  for (int attempt = 0; attempt < kLabelRedraws && !covered; ++attempt) {
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      std::size_t label = k - 1;
      for (std::size_t m = 0; m < k; ++m) {
        acc += weights[m];
        if (u < acc) {
          label = m;
          break;
        }
      }
      labels[i] = label;
      ++counts[label];
    }
    covered = std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
  }
  if (!covered) throw Error(ErrorCode::InfeasibleSpec, "a mode received no states");

  std::vector<double> values(n * spec.dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < spec.dim; ++j) {
      const double v = modes[labels[i]][j] + spec.noise_std * rng.normal();
      values[i * spec.dim + j] = static_cast<double>(static_cast<float>(v));
    }
  }

  // Smallest document count whose orderings cover every state.
  std::size_t docs = 1;
  std::size_t orderings = 1;
  while (orderings < n) orderings *= ++docs;

  LabeledBundle out;
  HiddenStateBundle& b = out.bundle;
  b.query_id = "synth-" + std::to_string(spec.seed);
  b.query = "Which latent mode produced this state?";
  for (std::size_t j = 0; j < docs; ++j) b.documents.push_back("Synthetic passage " + std::to_string(j) + ".");
  b.gold_answers = spec.gold_answers;
  b.permutations = lexicographic_permutations(docs, n);
  b.states = DenseMatrix(n, spec.dim, std::move(values));
  b.answers.emplace();
  for (std::size_t l : labels) b.answers->push_back("mode-" + std::to_string(l));
  b.model_id = "synthetic";
  b.layer_index = "final";
  out.true_labels = std::move(labels);
  return out;
}

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "label vectors differ in length");
  if (a.empty()) throw Error(ErrorCode::InvalidArgument, "label vectors are empty");
  if (a.size() == 1) return 1.0;  // no pairs to disagree on
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  std::map<std::size_t, double> rows;
  std::map<std::size_t, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [key, c] : joint) index += pairs(c);
  double sum_a = 0.0;
  for (const auto& [key, c] : rows) sum_a += pairs(c);
  double sum_b = 0.0;
  for (const auto& [key, c] : cols) sum_b += pairs(c);
  const double expected = sum_a * sum_b / pairs(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

Assignment brute_force_best_partition(const DenseMatrix& points, std::size_t k) {
  const std::size_t n = points.rows();
  if (n > kBruteForceLimit) {
    throw Error(ErrorCode::TooLargeForBruteForce, std::to_string(n) + " points exceeds the limit of 12");
  }
  if (k == 0 || k > n) throw Error(ErrorCode::KTooLarge, "k must be in [1, N]");

  // Restricted growth strings enumerate each set partition once, in
  // lexicographic order of their label vectors.
  std::vector<std::size_t> labels(n, 0);
  std::vector<std::size_t> prefix_max(n, 0);
  std::vector<std::size_t> best;
  double best_cost = std::numeric_limits<double>::infinity();
  while (true) {
    if (prefix_max[n - 1] + 1 == k) {
      const double cost = partition_cost(points, labels, k);
      if (best.empty() || cost < best_cost - 1e-12 * std::max(1.0, best_cost)) {
        best_cost = cost;
        best = labels;
      }
    }
    std::size_t i = n - 1;
    while (i > 0 && labels[i] >= std::min(prefix_max[i - 1] + 1, k - 1)) --i;
    if (i == 0) break;
    ++labels[i];
    prefix_max[i] = std::max(prefix_max[i - 1], labels[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      labels[j] = 0;
      prefix_max[j] = prefix_max[i];
    }
  }
  return Assignment{std::move(best), k};
}

}  // namespace permstab
