#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "permstab/matrix.hpp"

namespace permstab {

inline constexpr std::size_t kMaxPermutations = 5040;
inline constexpr std::size_t kMaxDocuments = 255;
inline constexpr double kDefaultTemperature = 0.01;

using Permutation = std::vector<std::size_t>;

/// Hidden states of one query under N document orderings.
///
/// Row i of `states` is the final-layer, last-prompt-token hidden state
/// recorded while the documents were presented in the order
/// `permutations[i]`. `answers`, when present, holds one decoded answer slot
/// per permutation; slots that were not decoded are empty.
struct HiddenStateBundle {
  std::string query_id;
  std::string query;
  std::vector<std::string> documents;
  std::vector<std::string> gold_answers;
  std::vector<Permutation> permutations;
  DenseMatrix states;
  std::optional<std::vector<std::optional<std::string>>> answers;
  std::string model_id;
  std::string layer_index;
  double temperature = kDefaultTemperature;

  std::size_t size() const noexcept { return permutations.size(); }

  /// True when every permutation carries a decoded answer.
  bool has_full_answers() const noexcept;

  /// Throws InvalidPermutation for a malformed or duplicated ordering and
  /// BundleInvalid for any other broken invariant.
  void validate() const;

  friend bool operator==(const HiddenStateBundle&, const HiddenStateBundle&) = default;
};

/// The first `count` permutations of {0..n-1} in lexicographic order.
std::vector<Permutation> lexicographic_permutations(std::size_t n, std::size_t count);

/// Documents reordered so that slot j holds documents[order[j]].
std::vector<std::string> reorder(const std::vector<std::string>& documents, const Permutation& order);

}  // namespace permstab
