#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "permstab/bundle.hpp"
#include "permstab/kmeans.hpp"
#include "permstab/matrix.hpp"

namespace permstab {

/// Latent reasoning modes found in one bundle: one cluster per mode.
struct ModePartition {
  std::string query_id;
  std::vector<double> eigenvalues;
  std::size_t k = 0;
  DenseMatrix embedding;
  Assignment assignment;
  std::vector<std::size_t> cluster_sizes;
  double sigma_used = 0.0;

  friend bool operator==(const ModePartition&, const ModePartition&) = default;
};

struct Representative {
  std::size_t cluster = 0;
  std::vector<double> centroid;
  std::size_t representative_index = 0;
  std::optional<std::string> representative_answer;

  friend bool operator==(const Representative&, const Representative&) = default;
};

/// One representative permutation per cluster; only these need decoding.
struct RepresentativeSet {
  std::string query_id;
  std::vector<Representative> clusters;

  std::size_t decode_count() const noexcept { return clusters.size(); }
  friend bool operator==(const RepresentativeSet&, const RepresentativeSet&) = default;
};

/// Kernel width used when none is supplied: the median over rows of the
/// nearest-neighbour cosine distance, floored at 5% of the median pairwise
/// cosine distance and at 1e-6.
double default_sigma(const DenseMatrix& cosine_distances);

/// Seed actually handed to k-means for a bundle: seed XOR hash(query_id).
std::uint64_t bundle_seed(std::uint64_t seed, const std::string& query_id) noexcept;

/// Affinity -> normalized Laplacian -> eigengap K -> row-normalized spectral
/// embedding -> k-means. Throws BundleTooSmall below 3 permutations.
ModePartition cluster_permutations(const HiddenStateBundle& bundle, std::optional<double> sigma,
                                   std::uint64_t seed);

/// Per cluster: the raw-space centroid of member states and the member
/// closest to it (lowest permutation index on ties).
RepresentativeSet representatives(const ModePartition& partition, const HiddenStateBundle& bundle);

/// Principal-component scores of the rows, N x dims. Components are ordered
/// by decreasing variance and signed so the largest-magnitude loading is
/// positive. Uses the N x N Gram matrix when d > N.
DenseMatrix pca_project(const DenseMatrix& states, std::size_t dims);

}  // namespace permstab
