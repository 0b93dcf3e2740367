#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "permstab/bundle.hpp"
#include "permstab/metrics.hpp"
#include "permstab/modes.hpp"

namespace permstab {

enum class Category { FC, PC, FU, FA };

std::string_view to_string(Category c) noexcept;
/// Throws MalformedInput for anything other than "FC", "PC", "FU", "FA".
Category category_from_string(std::string_view s);

struct AnswerEntry {
  std::string answer;
  std::size_t weight = 0;
  bool correct = false;

  friend bool operator==(const AnswerEntry&, const AnswerEntry&) = default;
};

/// Weighted multiset of the answers one query produced across orderings.
struct AnswerProfile {
  std::string query_id;
  std::string query;
  std::vector<std::string> documents;
  std::vector<std::string> gold_answers;
  bool gold_in_docs = false;
  std::vector<AnswerEntry> entries;  // first-occurrence order
  Permutation chosen_permutation;    // empty means retrieval order
};

struct PreferenceTuple {
  std::string query_id;
  std::string query;
  std::vector<std::string> documents;  // in the order presented in x
  std::string y_w;
  std::string y_l;
  Category category = Category::PC;

  friend bool operator==(const PreferenceTuple&, const PreferenceTuple&) = default;
};

bool gold_in_documents(const std::vector<std::string>& gold_answers, const std::vector<std::string>& documents);

Category categorize(const AnswerProfile& profile);

/// FC yields nothing. PC prefers the heaviest correct answer over the
/// heaviest incorrect one, FU prefers abstaining over the heaviest incorrect
/// answer, FA prefers the first gold answer over abstaining. Weight ties go
/// to the earlier entry.
std::optional<PreferenceTuple> build_preference(const AnswerProfile& profile,
                                                std::string_view abstention = kAbstention);

enum class ProfileMode { Representative, Exhaustive };

/// Representative mode: one entry per cluster weighted by cluster size.
/// Exhaustive mode: one entry per permutation answer. Entries whose answers
/// normalize identically are merged, keeping the first surface form.
AnswerProfile profile_from_partition(const ModePartition& partition, const RepresentativeSet& reps,
                                     const HiddenStateBundle& bundle,
                                     ProfileMode mode = ProfileMode::Representative);

}  // namespace permstab
