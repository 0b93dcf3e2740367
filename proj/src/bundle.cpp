#include "permstab/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "permstab/error.hpp"

namespace permstab {
namespace {

std::size_t factorial_capped(std::size_t n, std::size_t cap) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) {
    f *= i;
    if (f > cap) return cap + 1;
  }
  return f;
}

}  // namespace

bool HiddenStateBundle::has_full_answers() const noexcept {
  if (!answers || answers->size() != size()) return false;
  return std::all_of(answers->begin(), answers->end(), [](const auto& a) { return a.has_value(); });
}

void HiddenStateBundle::validate() const {
  const std::size_t n = documents.size();
  const std::size_t count = permutations.size();
  if (count == 0) throw Error(ErrorCode::BundleInvalid, "bundle has no permutations");
  if (count > kMaxPermutations) {
    throw Error(ErrorCode::BundleInvalid, "bundle has " + std::to_string(count) + " permutations, cap is 5040");
  }
  if (n == 0 || n > kMaxDocuments) {
    throw Error(ErrorCode::BundleInvalid, "document count " + std::to_string(n) + " outside [1, 255]");
  }
  if (count > factorial_capped(n, kMaxPermutations)) {
    throw Error(ErrorCode::BundleInvalid, "more permutations than n!");
  }
  if (states.rows() != count || states.cols() == 0) {
    throw Error(ErrorCode::BundleInvalid, "states must be N x d with N = permutation count and d > 0");
  }
  for (double v : states.values()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteState, "hidden state value is not finite");
  }
  std::set<Permutation> seen;
  std::vector<char> hit(n);
  for (std::size_t i = 0; i < count; ++i) {
    const Permutation& p = permutations[i];
    if (p.size() != n) {
      throw Error(ErrorCode::InvalidPermutation, "permutation " + std::to_string(i) + " has wrong length");
    }
    std::fill(hit.begin(), hit.end(), 0);
    for (std::size_t v : p) {
      if (v >= n || hit[v]) {
        throw Error(ErrorCode::InvalidPermutation, "permutation " + std::to_string(i) + " is not a permutation");
      }
      hit[v] = 1;
    }
    if (!seen.insert(p).second) {
      throw Error(ErrorCode::InvalidPermutation, "permutation " + std::to_string(i) + " is a duplicate");
    }
  }
  if (answers && answers->size() != count) {
    throw Error(ErrorCode::BundleInvalid, "answers length differs from permutation count");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::BundleInvalid, "temperature must be positive");
  }
}

std::vector<Permutation> lexicographic_permutations(std::size_t n, std::size_t count) {
  std::vector<Permutation> out;
  Permutation p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  do {
    if (out.size() == count) break;
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

std::vector<std::string> reorder(const std::vector<std::string>& documents, const Permutation& order) {
  std::vector<std::string> out;
  out.reserve(order.size());
  for (std::size_t idx : order) out.push_back(documents.at(idx));
  return out;
}

}  // namespace permstab
