#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "permstab/bundle.hpp"
#include "permstab/kmeans.hpp"
#include "permstab/matrix.hpp"

namespace permstab {

struct SynthSpec {
  std::size_t true_modes = 3;
  std::size_t dim = 64;
  std::size_t n_states = 120;
  double noise_std = 0.05;
  std::vector<double> size_weights;  // empty means uniform
  std::uint64_t seed = 42;
  std::vector<std::string> gold_answers{"mode-0"};
};

struct LabeledBundle {
  HiddenStateBundle bundle;
  std::vector<std::size_t> true_labels;
};

/// States drawn around orthonormal mode directions with isotropic Gaussian
/// noise, rounded to float precision so they survive the binary format
/// unchanged. Every state's answer is "mode-<label>".
LabeledBundle generate(const SynthSpec& spec);

/// Pair-counting adjusted Rand index. Two single-cluster labelings of the
/// same points score 1.
double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b);

/// Exact minimum within-cluster sum of squares over all partitions of at
/// most 12 points into exactly k non-empty clusters. Labels come out in
/// first-occurrence form; the lexicographically smallest wins ties.
Assignment brute_force_best_partition(const DenseMatrix& points, std::size_t k);

}  // namespace permstab
