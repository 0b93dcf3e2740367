#include "permstab/preference.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "permstab/error.hpp"

namespace permstab {
namespace {

// Heaviest entry satisfying `keep`; the earlier entry wins ties.
template <typename Pred>
const AnswerEntry* heaviest(const std::vector<AnswerEntry>& entries, Pred keep) {
  const AnswerEntry* best = nullptr;
  for (const AnswerEntry& e : entries) {
    if (!keep(e)) continue;
    if (best == nullptr || e.weight > best->weight) best = &e;
  }
  return best;
}

void add_entry(std::vector<AnswerEntry>& entries, std::map<std::string, std::size_t>& index,
               const std::string& answer, std::size_t weight, const std::vector<std::string>& gold) {
  const std::string key = normalize_answer(answer).joined();
  const auto it = index.find(key);
  if (it != index.end()) {
    entries[it->second].weight += weight;
    return;
  }
  index.emplace(key, entries.size());
  entries.push_back({answer, weight, sub_em(answer, gold) == 1});
}

}  // namespace

std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::FC: return "FC";
    case Category::PC: return "PC";
    case Category::FU: return "FU";
    case Category::FA: return "FA";
  }
  return "?";
}

Category category_from_string(std::string_view s) {
  if (s == "FC") return Category::FC;
  if (s == "PC") return Category::PC;
  if (s == "FU") return Category::FU;
  if (s == "FA") return Category::FA;
  throw Error(ErrorCode::MalformedInput, "unknown category '" + std::string(s) + "'");
}

bool gold_in_documents(const std::vector<std::string>& gold_answers, const std::vector<std::string>& documents) {
  for (const auto& doc : documents)
    for (const auto& g : gold_answers)
      if (contains_answer(doc, g)) return true;
  return false;
}

Category categorize(const AnswerProfile& profile) {
  if (profile.entries.empty()) throw Error(ErrorCode::InvalidArgument, "answer profile has no entries");
  const bool any_correct =
      std::any_of(profile.entries.begin(), profile.entries.end(), [](const AnswerEntry& e) { return e.correct; });
  const bool all_correct =
      std::all_of(profile.entries.begin(), profile.entries.end(), [](const AnswerEntry& e) { return e.correct; });
  if (all_correct) return Category::FC;
  if (any_correct) return Category::PC;
  return profile.gold_in_docs ? Category::FA : Category::FU;
}

std::optional<PreferenceTuple> build_preference(const AnswerProfile& profile, std::string_view abstention) {
  const Category category = categorize(profile);
  if (category == Category::FC) return std::nullopt;

  PreferenceTuple t;
  t.query_id = profile.query_id;
  t.query = profile.query;
  t.documents = profile.chosen_permutation.empty() ? profile.documents
                                                   : reorder(profile.documents, profile.chosen_permutation);
  t.category = category;

  switch (category) {
    case Category::PC: {
      const AnswerEntry* win = heaviest(profile.entries, [](const AnswerEntry& e) { return e.correct; });
      const AnswerEntry* lose = heaviest(profile.entries, [](const AnswerEntry& e) { return !e.correct; });
      if (lose == nullptr) throw Error(ErrorCode::NoIncorrectCandidate, "PC profile without an incorrect answer");
      t.y_w = win->answer;
      t.y_l = lose->answer;
      break;
    }
    case Category::FU: {
      const AnswerEntry* lose = heaviest(profile.entries, [&](const AnswerEntry& e) {
        return !e.correct && e.answer != abstention;
      });
      if (lose == nullptr) {
        throw Error(ErrorCode::NoIncorrectCandidate, "FU profile has no answer other than the abstention");
      }
      t.y_w = std::string(abstention);
      t.y_l = lose->answer;
      break;
    }
    case Category::FA:
      if (profile.gold_answers.empty()) throw Error(ErrorCode::InvalidArgument, "FA profile without gold answers");
      t.y_w = profile.gold_answers.front();
      t.y_l = std::string(abstention);
      break;
    case Category::FC:
      break;
  }
  return t;
}

AnswerProfile profile_from_partition(const ModePartition& partition, const RepresentativeSet& reps,
                                     const HiddenStateBundle& bundle, ProfileMode mode) {
  if (bundle.gold_answers.empty()) throw Error(ErrorCode::InvalidArgument, "bundle has no gold answers");
  AnswerProfile p;
  p.query_id = bundle.query_id;
  p.query = bundle.query;
  p.documents = bundle.documents;
  p.gold_answers = bundle.gold_answers;
  p.gold_in_docs = gold_in_documents(bundle.gold_answers, bundle.documents);

  std::map<std::string, std::size_t> index;
  if (mode == ProfileMode::Exhaustive) {
    if (!bundle.has_full_answers()) {
      throw Error(ErrorCode::MissingFullAnswers, "exhaustive mode needs an answer for every permutation");
    }
    for (const auto& a : *bundle.answers) add_entry(p.entries, index, *a, 1, bundle.gold_answers);
    return p;
  }

  if (reps.clusters.size() != partition.k || partition.cluster_sizes.size() != partition.k) {
    throw Error(ErrorCode::MismatchedPartition, "representatives do not match the partition");
  }
  for (const Representative& rep : reps.clusters) {
    if (!rep.representative_answer) {
      throw Error(ErrorCode::MissingRepresentativeAnswer,
                  "cluster " + std::to_string(rep.cluster) + " has no decoded representative answer");
    }
    if (rep.cluster >= partition.k) throw Error(ErrorCode::MismatchedPartition, "cluster index out of range");
    add_entry(p.entries, index, *rep.representative_answer, partition.cluster_sizes[rep.cluster],
              bundle.gold_answers);
  }
  return p;
}

}  // namespace permstab
