#include "permstab/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "permstab/error.hpp"
#include "permstab/random.hpp"
#include "permstab/spectral.hpp"

namespace permstab {
namespace {

constexpr double kMinSigma = 1e-6;
constexpr double kPairwiseFloorFraction = 0.05;

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

// Orients a component so its largest-magnitude loading is positive; the
// first index wins among equal magnitudes.
double loading_sign(std::span<const double> direction) {
  std::size_t argmax = 0;
  for (std::size_t i = 1; i < direction.size(); ++i)
    if (std::abs(direction[i]) > std::abs(direction[argmax])) argmax = i;
  return direction[argmax] < 0.0 ? -1.0 : 1.0;
}

}  // namespace

double default_sigma(const DenseMatrix& distances) {
  const std::size_t n = distances.rows();
  if (n < 2) return kMinSigma;
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<double> pairwise;
  pairwise.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distances(i, j);
      pairwise.push_back(d);
      nearest[i] = std::min(nearest[i], d);
      nearest[j] = std::min(nearest[j], d);
    }
  }
  const double floor = kPairwiseFloorFraction * median(std::move(pairwise));
  return std::max({median(std::move(nearest)), floor, kMinSigma});
}

std::uint64_t bundle_seed(std::uint64_t seed, const std::string& query_id) noexcept {
  return seed ^ stable_hash(query_id);
}

ModePartition cluster_permutations(const HiddenStateBundle& bundle, std::optional<double> sigma,
                                   std::uint64_t seed) {
  const std::size_t n = bundle.states.rows();
  if (n < 3) {
    throw Error(ErrorCode::BundleTooSmall, "clustering needs at least 3 hidden states, got " + std::to_string(n));
  }
  for (double v : bundle.states.values()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteState, "hidden state value is not finite");
  }

  const DenseMatrix distances = cosine_distances(bundle.states);
  ModePartition out;
  out.query_id = bundle.query_id;
  out.sigma_used = sigma ? *sigma : default_sigma(distances);
  const DenseMatrix laplacian = normalized_laplacian(affinity_from_distances(distances, out.sigma_used));
  const EigenSystem eigen = symmetric_eigen(laplacian);
  out.eigenvalues = eigen.eigenvalues;
  out.k = select_k_eigengap(eigen.eigenvalues);
  out.embedding = spectral_embed(eigen, out.k);
  out.assignment = kmeans(out.embedding, out.k, bundle_seed(seed, bundle.query_id));
  out.cluster_sizes = out.assignment.cluster_sizes();
  return out;
}

RepresentativeSet representatives(const ModePartition& partition, const HiddenStateBundle& bundle) {
  const DenseMatrix& states = bundle.states;
  const std::size_t n = states.rows();
  const auto& labels = partition.assignment.labels;
  const std::size_t k = partition.k;
  if (labels.size() != n || partition.assignment.k != k || k == 0) {
    throw Error(ErrorCode::MismatchedPartition, "partition does not cover the bundle's hidden states");
  }
  if (!partition.query_id.empty() && partition.query_id != bundle.query_id) {
    throw Error(ErrorCode::MismatchedPartition,
                "partition is for query '" + partition.query_id + "', bundle is '" + bundle.query_id + "'");
  }
  if (bundle.answers && bundle.answers->size() != n) {
    throw Error(ErrorCode::MismatchedPartition, "answers length differs from state count");
  }

  RepresentativeSet out;
  out.query_id = bundle.query_id;
  out.clusters.resize(k);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t c = 0; c < k; ++c) {
    out.clusters[c].cluster = c;
    out.clusters[c].centroid.assign(states.cols(), 0.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= k) throw Error(ErrorCode::MismatchedPartition, "label out of range");
    auto& centroid = out.clusters[labels[i]].centroid;
    const auto row = states.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) centroid[j] += row[j];
    ++counts[labels[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) throw Error(ErrorCode::MismatchedPartition, "cluster " + std::to_string(c) + " is empty");
    for (double& x : out.clusters[c].centroid) x /= static_cast<double>(counts[c]);
  }

  std::vector<double> best(k, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    Representative& rep = out.clusters[labels[i]];
    const double d = squared_distance(states.row(i), rep.centroid);
    if (d < best[labels[i]]) {
      best[labels[i]] = d;
      rep.representative_index = i;
    }
  }
  if (bundle.answers) {
    for (Representative& rep : out.clusters) rep.representative_answer = (*bundle.answers)[rep.representative_index];
  }
  return out;
}

DenseMatrix pca_project(const DenseMatrix& states, std::size_t dims) {
  const std::size_t n = states.rows();
  const std::size_t d = states.cols();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "pca_project needs at least 2 rows");
  if (dims == 0 || dims > std::min(n, d)) {
    throw Error(ErrorCode::InvalidArgument, "pca dims must be in [1, min(N, d)]");
  }

  DenseMatrix centered(states);
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += states(i, j);
  for (double& m : mean) m /= static_cast<double>(n);
  double energy = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      centered(i, j) -= mean[j];
      energy += centered(i, j) * centered(i, j);
    }
  if (!(energy > 0.0)) throw Error(ErrorCode::DegenerateInput, "all rows identical after centering");

  // Unit principal directions in feature space, one per output column.
  DenseMatrix directions(d, dims);
  if (d <= n) {
    DenseMatrix cov = multiply(centered.transpose(), centered);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) cov(i, j) /= static_cast<double>(n - 1);
    const EigenSystem eig = symmetric_eigen(cov);
    for (std::size_t c = 0; c < dims; ++c) {
      const std::size_t src = d - 1 - c;
      for (std::size_t j = 0; j < d; ++j) directions(j, c) = eig.eigenvectors(j, src);
    }
  } else {
    const EigenSystem eig = symmetric_eigen(multiply(centered, centered.transpose()));
    const double cutoff = 1e-12 * std::max(1.0, eig.eigenvalues.back());
    for (std::size_t c = 0; c < dims; ++c) {
      const std::size_t src = n - 1 - c;
      if (eig.eigenvalues[src] <= cutoff) continue;
      double norm = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += centered(i, j) * eig.eigenvectors(i, src);
        directions(j, c) = s;
        norm += s * s;
      }
      norm = std::sqrt(norm);
      for (std::size_t j = 0; j < d; ++j) directions(j, c) /= norm;
    }
  }

  const DenseMatrix dir_t = directions.transpose();
  DenseMatrix out = multiply(centered, directions);
  for (std::size_t c = 0; c < dims; ++c) {
    const double sign = loading_sign(dir_t.row(c));
    if (sign < 0.0)
      for (std::size_t i = 0; i < n; ++i) out(i, c) = -out(i, c);
  }
  return out;
}

}  // namespace permstab
