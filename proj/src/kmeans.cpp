#include "permstab/kmeans.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "permstab/error.hpp"
#include "permstab/random.hpp"

namespace permstab {
namespace {

struct Run {
  std::vector<std::size_t> labels;
  double wcss = std::numeric_limits<double>::infinity();
};

DenseMatrix cluster_means(const DenseMatrix& points, const std::vector<std::size_t>& labels,
                          std::size_t k) {
  DenseMatrix means(k, points.cols());
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto m = means.row(labels[i]);
    const auto p = points.row(i);
    for (std::size_t c = 0; c < p.size(); ++c) m[c] += p[c];
    ++counts[labels[i]];
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] == 0) continue;
    for (double& x : means.row(j)) x /= static_cast<double>(counts[j]);
  }
  return means;
}

DenseMatrix seed_plus_plus(const DenseMatrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  DenseMatrix centers(k, points.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t chosen = static_cast<std::size_t>(rng.below(n));
  for (std::size_t j = 0;; ++j) {
    const auto src = points.row(chosen);
    std::copy(src.begin(), src.end(), centers.row(j).begin());
    if (j + 1 == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), src));
      total += d2[i];
    }
    if (!(total > 0.0)) {
      chosen = static_cast<std::size_t>(rng.below(n));
      continue;
    }
    const double target = rng.uniform() * total;
    double acc = 0.0;
    chosen = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] == 0.0) continue;
      acc += d2[i];
      chosen = i;
      if (acc > target) break;
    }
  }
  return centers;
}

void assign(const DenseMatrix& points, const DenseMatrix& centers, std::vector<std::size_t>& labels,
            std::vector<double>& dist) {
  for (std::size_t i = 0; i < points.rows(); ++i) {
    std::size_t best = 0;
    double best_d = squared_distance(points.row(i), centers.row(0));
    for (std::size_t j = 1; j < centers.rows(); ++j) {
      const double d = squared_distance(points.row(i), centers.row(j));
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    labels[i] = best;
    dist[i] = best_d;
  }
}

void repair_empty(const DenseMatrix& points, DenseMatrix& centers, std::vector<std::size_t>& labels,
                  std::vector<double>& dist) {
  const std::size_t k = centers.rows();
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t l : labels) ++counts[l];
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] != 0) continue;
    std::size_t far = points.rows();
    for (std::size_t i = 0; i < points.rows(); ++i) {
      if (counts[labels[i]] < 2) continue;
      if (far == points.rows() || dist[i] > dist[far]) far = i;
    }
    --counts[labels[far]];
    ++counts[j];
    labels[far] = j;
    dist[far] = 0.0;
    const auto src = points.row(far);
    std::copy(src.begin(), src.end(), centers.row(j).begin());
  }
}

Run lloyd(const DenseMatrix& points, std::size_t k, Rng& rng, const KMeansOptions& options) {
  DenseMatrix centers = seed_plus_plus(points, k, rng);
  Run run;
  run.labels.assign(points.rows(), 0);
  std::vector<double> dist(points.rows(), 0.0);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    assign(points, centers, run.labels, dist);
    repair_empty(points, centers, run.labels, dist);
    DenseMatrix next = cluster_means(points, run.labels, k);
    double movement = 0.0;
    for (std::size_t j = 0; j < k; ++j) movement += squared_distance(next.row(j), centers.row(j));
    centers = std::move(next);
    if (movement <= options.tolerance) break;
  }
  run.wcss = within_cluster_ss(points, Assignment{run.labels, k});
  return run;
}

}  // namespace

std::vector<std::size_t> Assignment::cluster_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t l : labels) ++sizes.at(l);
  return sizes;
}

double within_cluster_ss(const DenseMatrix& points, const Assignment& assignment) {
  const DenseMatrix means = cluster_means(points, assignment.labels, assignment.k);
  double s = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i)
    s += squared_distance(points.row(i), means.row(assignment.labels[i]));
  return s;
}

Assignment kmeans(const DenseMatrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "kmeans: k must be positive");
  if (k > points.rows()) {
    throw Error(ErrorCode::KTooLarge,
                "k=" + std::to_string(k) + " exceeds point count " + std::to_string(points.rows()));
  }
  Rng rng(seed);
  Run best;
  for (int r = 0; r < options.restarts; ++r) {
    Run run = lloyd(points, k, rng, options);
    if (run.wcss < best.wcss) best = std::move(run);
  }
  return Assignment{std::move(best.labels), k};
}

}  // namespace permstab
