#include "permstab/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <string>

#include "permstab/error.hpp"

namespace permstab {
namespace {

bool is_article(std::string_view t) { return t == "a" || t == "an" || t == "the"; }

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\n\r\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\n\r\f\v");
  return s.substr(first, last - first + 1);
}

double f1_tokens(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::map<std::string_view, int> counts;
  for (const auto& t : gold) ++counts[t];
  std::size_t common = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

std::string NormalizedAnswer::joined() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

NormalizedAnswer normalize_answer(std::string_view text) {
  NormalizedAnswer out{std::string(text), {}};
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !is_article(current)) out.tokens.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || std::ispunct(c)) {
      flush();
    } else {
      current += static_cast<char>(std::tolower(c));
    }
  }
  flush();
  return out;
}

bool contains_answer(std::string_view haystack, std::string_view needle) {
  const std::string n = normalize_answer(needle).joined();
  if (n.empty()) return false;
  const std::string h = " " + normalize_answer(haystack).joined() + " ";
  return h.find(" " + n + " ") != std::string::npos;
}

int sub_em(std::string_view prediction, const std::vector<std::string>& gold_answers) {
  for (const auto& g : gold_answers)
    if (contains_answer(prediction, g)) return 1;
  return 0;
}

double token_f1(std::string_view prediction, const std::vector<std::string>& gold_answers) {
  const auto pred = normalize_answer(prediction).tokens;
  double best = 0.0;
  for (const auto& g : gold_answers) best = std::max(best, f1_tokens(pred, normalize_answer(g).tokens));
  return best;
}

double psr(const std::vector<PermutationOutcome>& outcomes, std::size_t position) {
  if (outcomes.empty()) throw Error(ErrorCode::InvalidArgument, "psr needs at least one outcome");
  std::size_t total = 0;
  std::size_t incorrect = 0;
  for (const auto& o : outcomes) {
    if (o.gold_position != position) {
      throw Error(ErrorCode::PositionMismatch, "outcome at position " + std::to_string(o.gold_position) +
                                                   ", expected " + std::to_string(position));
    }
    if (o.correct.empty()) throw Error(ErrorCode::InvalidArgument, "outcome with no permutation flags");
    total += o.correct.size();
    incorrect += static_cast<std::size_t>(std::count(o.correct.begin(), o.correct.end(), false));
  }
  return static_cast<double>(incorrect) / static_cast<double>(total);
}

double abstention_rate(const std::vector<std::string>& predictions, std::string_view abstention) {
  if (predictions.empty()) throw Error(ErrorCode::InvalidArgument, "abstention_rate needs predictions");
  const auto hits = std::count_if(predictions.begin(), predictions.end(),
                                  [&](const std::string& p) { return trim(p) == abstention; });
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double shuffle_drop(double subem_original, double subem_shuffled) noexcept {
  return subem_original - subem_shuffled;
}

Fidelity cluster_answer_fidelity(const ModePartition& partition, const HiddenStateBundle& bundle,
                                 const RepresentativeSet& reps) {
  if (!bundle.has_full_answers()) {
    throw Error(ErrorCode::MissingFullAnswers, "fidelity needs a decoded answer for every permutation");
  }
  const auto& labels = partition.assignment.labels;
  if (labels.size() != bundle.size() || reps.clusters.size() != partition.k) {
    throw Error(ErrorCode::MismatchedPartition, "partition, representatives and bundle disagree");
  }
  std::vector<std::string> normalized;
  normalized.reserve(labels.size());
  std::map<std::string, std::size_t> answer_totals;
  for (const auto& a : *bundle.answers) {
    normalized.push_back(normalize_answer(*a).joined());
    ++answer_totals[normalized.back()];
  }

  std::size_t matched = 0;
  std::size_t recall_denominator = 0;
  for (const Representative& rep : reps.clusters) {
    if (!rep.representative_answer) {
      throw Error(ErrorCode::MissingRepresentativeAnswer, "cluster " + std::to_string(rep.cluster));
    }
    const std::string target = normalize_answer(*rep.representative_answer).joined();
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == rep.cluster && normalized[i] == target) ++matched;
    const auto it = answer_totals.find(target);
    recall_denominator += it == answer_totals.end() ? 0 : it->second;
  }

  Fidelity f;
  f.precision = static_cast<double>(matched) / static_cast<double>(labels.size());
  f.recall = recall_denominator == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(recall_denominator);
  f.f1 = (f.precision + f.recall) > 0.0 ? 2.0 * f.precision * f.recall / (f.precision + f.recall) : 0.0;
  return f;
}

}  // namespace permstab
