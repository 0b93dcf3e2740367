#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "permstab/matrix.hpp"

namespace permstab {

/// Hard cluster labels, 0-based, with every cluster in [0, k) non-empty.
struct Assignment {
  std::vector<std::size_t> labels;
  std::size_t k = 0;

  std::vector<std::size_t> cluster_sizes() const;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
  double tolerance = 1e-8;  // total squared center movement
};

/// Lloyd's algorithm with k-means++ seeding. Keeps the restart with the
/// lowest within-cluster sum of squares (earliest restart on ties).
/// Point-to-center ties go to the lowest center index. A cluster left empty
/// is refilled with the point farthest from its center among clusters that
/// can spare one.
Assignment kmeans(const DenseMatrix& points, std::size_t k, std::uint64_t seed,
                  const KMeansOptions& options = {});

/// Sum over points of squared distance to the mean of their cluster.
double within_cluster_ss(const DenseMatrix& points, const Assignment& assignment);

}  // namespace permstab
