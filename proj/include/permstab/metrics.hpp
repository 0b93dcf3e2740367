#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "permstab/bundle.hpp"
#include "permstab/modes.hpp"

namespace permstab {

inline constexpr std::string_view kAbstention = "I don't know";

/// Lowercased, punctuation replaced by spaces, articles removed.
struct NormalizedAnswer {
  std::string raw;
  std::vector<std::string> tokens;

  std::string joined() const;
};

NormalizedAnswer normalize_answer(std::string_view text);

/// True when the token sequence of `needle` occurs contiguously inside
/// `haystack` after normalization. An answer that normalizes to nothing
/// never matches.
bool contains_answer(std::string_view haystack, std::string_view needle);

/// 1 when any gold alias occurs in the prediction (word-aligned substring
/// of the normalized strings), else 0.
int sub_em(std::string_view prediction, const std::vector<std::string>& gold_answers);

/// Max over gold aliases of the token-level F1.
double token_f1(std::string_view prediction, const std::vector<std::string>& gold_answers);

/// Per-instance correctness flags for one gold-document slot (1-based).
struct PermutationOutcome {
  std::size_t gold_position = 1;
  std::vector<bool> correct;
};

/// Perturbation success rate: incorrect flags over all flags, pooled across
/// outcomes. Throws PositionMismatch if an outcome has another position.
double psr(const std::vector<PermutationOutcome>& outcomes, std::size_t position);

/// Fraction of predictions equal to the abstention string after trimming.
double abstention_rate(const std::vector<std::string>& predictions,
                       std::string_view abstention = kAbstention);

double shuffle_drop(double subem_original, double subem_shuffled) noexcept;

struct Fidelity {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// How well each cluster's representative answer stands for its members,
/// micro-averaged over states. Needs decoded answers for every permutation.
Fidelity cluster_answer_fidelity(const ModePartition& partition, const HiddenStateBundle& bundle,
                                 const RepresentativeSet& reps);

}  // namespace permstab
