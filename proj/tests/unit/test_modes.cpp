#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "permstab/error.hpp"
#include "permstab/modes.hpp"
#include "permstab/spectral.hpp"
#include "permstab/synth.hpp"

using namespace permstab;

namespace {

HiddenStateBundle bundle_from(DenseMatrix states) {
  HiddenStateBundle b;
  b.query_id = "q";
  std::size_t docs = 1;
  std::size_t orderings = 1;
  while (orderings < states.rows()) orderings *= ++docs;
  for (std::size_t i = 0; i < docs; ++i) b.documents.push_back("doc " + std::to_string(i));
  b.gold_answers = {"x"};
  b.permutations = lexicographic_permutations(docs, states.rows());
  b.states = std::move(states);
  return b;
}

ModePartition manual_partition(std::vector<std::size_t> labels, std::size_t k) {
  ModePartition p;
  p.query_id = "q";
  p.k = k;
  p.assignment = Assignment{std::move(labels), k};
  p.cluster_sizes = p.assignment.cluster_sizes();
  return p;
}

LabeledBundle synth(std::size_t modes, std::uint64_t seed) {
  SynthSpec s;
  s.true_modes = modes;
  s.dim = 64;
  s.n_states = 120;
  s.noise_std = 0.05;
  s.seed = seed;
  return generate(s);
}

}  // namespace

TEST_CASE("cluster_permutations recovers three synthetic modes") {
  const auto lb = synth(3, 7);
  const auto p = cluster_permutations(lb.bundle, std::nullopt, 42);
  CHECK(p.k == 3);
  CHECK(adjusted_rand_index(p.assignment.labels, lb.true_labels) >= 0.95);
  CHECK(std::accumulate(p.cluster_sizes.begin(), p.cluster_sizes.end(), std::size_t{0}) == 120);
  CHECK(p.embedding.rows() == 120);
  CHECK(p.embedding.cols() == 3);
  CHECK(p.sigma_used > 0.0);
}

TEST_CASE("nearly identical states fall back to two modes") {
  std::vector<double> v(10 * 4);
  for (std::size_t i = 0; i < 10; ++i) {
    v[i * 4 + 0] = 1.0 + 1e-13 * static_cast<double>(i);
    v[i * 4 + 1] = 0.5;
    v[i * 4 + 2] = -0.25;
    v[i * 4 + 3] = 2.0;
  }
  const auto p = cluster_permutations(bundle_from(DenseMatrix(10, 4, v)), std::nullopt, 42);
  CHECK(p.k == 2);
  CHECK(p.cluster_sizes[0] > 0);
  CHECK(p.cluster_sizes[1] > 0);
}

TEST_CASE("minimal bundle co-clusters the coincident pair") {
  const auto b = bundle_from(DenseMatrix(3, 2, {1, 0, 1, 0, 0, 1}));
  const auto p = cluster_permutations(b, std::nullopt, 42);
  CHECK(p.k == 2);
  CHECK(p.assignment.labels[0] == p.assignment.labels[1]);
  CHECK(p.assignment.labels[0] != p.assignment.labels[2]);
  // Oracle: exhaustive search over all 3-point partitions of the embedding.
  const auto best = brute_force_best_partition(p.embedding, 2);
  CHECK(adjusted_rand_index(best.labels, p.assignment.labels) == doctest::Approx(1.0));
}

TEST_CASE("cluster_permutations rejects bundles below three states") {
  try {
    cluster_permutations(bundle_from(DenseMatrix(2, 2, {1, 0, 0, 1})), std::nullopt, 42);
    FAIL("expected BundleTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BundleTooSmall);
  }
}

TEST_CASE("clustering is equivariant under reordering of the states") {
  const auto lb = synth(4, 21);
  const auto base = cluster_permutations(lb.bundle, std::nullopt, 42);
  std::vector<std::size_t> perm(120);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(4);
  std::shuffle(perm.begin(), perm.end(), rng);
  HiddenStateBundle shuffled = lb.bundle;
  for (std::size_t i = 0; i < 120; ++i) {
    shuffled.permutations[i] = lb.bundle.permutations[perm[i]];
    for (std::size_t j = 0; j < 64; ++j) shuffled.states(i, j) = lb.bundle.states(perm[i], j);
  }
  const auto moved = cluster_permutations(shuffled, std::nullopt, 42);
  std::vector<std::size_t> composed(120);
  for (std::size_t i = 0; i < 120; ++i) composed[i] = base.assignment.labels[perm[i]];
  CHECK(moved.k == base.k);
  CHECK(adjusted_rand_index(moved.assignment.labels, composed) == doctest::Approx(1.0));
}

TEST_CASE("positive rescaling leaves the partition unchanged") {
  const auto lb = synth(3, 5);
  const auto base = cluster_permutations(lb.bundle, std::nullopt, 42);
  for (double c : {0.5, 4.0, 1024.0}) {
    HiddenStateBundle scaled = lb.bundle;
    for (std::size_t i = 0; i < 120; ++i)
      for (double& x : scaled.states.row(i)) x *= c;
    CHECK(cosine_affinity(scaled.states, 0.1) == cosine_affinity(lb.bundle.states, 0.1));
    CHECK(cluster_permutations(scaled, std::nullopt, 42).assignment == base.assignment);
  }
  HiddenStateBundle scaled = lb.bundle;
  for (std::size_t i = 0; i < 120; ++i)
    for (double& x : scaled.states.row(i)) x *= 3.7;
  CHECK(cluster_permutations(scaled, std::nullopt, 42).assignment == base.assignment);
}

TEST_CASE("explicit sigma is honoured") {
  const auto lb = synth(2, 9);
  const auto p = cluster_permutations(lb.bundle, 0.2, 42);
  CHECK(p.sigma_used == 0.2);
  CHECK_THROWS_AS(cluster_permutations(lb.bundle, -1.0, 42), Error);
}

TEST_CASE("default_sigma follows nearest-neighbour scale") {
  // Distances: pair (0,1) at 0.1, everything else at 1.
  DenseMatrix d(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) d(i, j) = 1.0;
  d(0, 1) = d(1, 0) = 0.1;
  d(2, 3) = d(3, 2) = 0.3;
  // Nearest distances (0.1, 0.1, 0.3, 0.3) have median 0.2.
  CHECK(default_sigma(d) == doctest::Approx(0.2));
  // Identical points hit the absolute floor.
  CHECK(default_sigma(DenseMatrix(3, 3)) == doctest::Approx(1e-6));
  // Median pairwise 1.0 floors the estimate at 0.05.
  DenseMatrix e(3, 3, {0, 0, 1, 0, 0, 1, 1, 1, 0});
  CHECK(default_sigma(e) == doctest::Approx(0.05));
}

TEST_CASE("representatives pick the member closest to the centroid") {
  SUBCASE("three-member cluster") {
    const auto b = bundle_from(DenseMatrix(4, 2, {0, 0, 2, 0, 1, 0.5, 9, 9}));
    const auto reps = representatives(manual_partition({0, 0, 0, 1}, 2), b);
    REQUIRE(reps.clusters.size() == 2);
    CHECK(reps.clusters[0].centroid[0] == doctest::Approx(1.0));
    CHECK(reps.clusters[0].centroid[1] == doctest::Approx(1.0 / 6.0));
    CHECK(reps.clusters[0].representative_index == 2);
    CHECK(reps.decode_count() == 2);
  }
  SUBCASE("singleton") {
    const auto b = bundle_from(DenseMatrix(3, 2, {0, 0, 2, 0, 5, 5}));
    const auto reps = representatives(manual_partition({0, 0, 1}, 2), b);
    CHECK(reps.clusters[1].representative_index == 2);
    CHECK(reps.clusters[1].centroid == std::vector<double>{5, 5});
  }
  SUBCASE("equidistant members resolve to the smaller index") {
    const auto b = bundle_from(DenseMatrix(3, 2, {5, 5, 0, 0, 2, 0}));
    const auto reps = representatives(manual_partition({1, 0, 0}, 2), b);
    CHECK(reps.clusters[0].representative_index == 1);
  }
  SUBCASE("answers are copied from the representative slot") {
    auto b = bundle_from(DenseMatrix(3, 2, {0, 0, 2, 0, 1, 0.1}));
    b.answers = std::vector<std::optional<std::string>>{"a", std::nullopt, "c"};
    const auto reps = representatives(manual_partition({0, 0, 1}, 2), b);
    CHECK(reps.clusters[0].representative_answer == "a");
    CHECK(reps.clusters[1].representative_answer == "c");
  }
  SUBCASE("mismatched partition") {
    const auto b = bundle_from(DenseMatrix(3, 2, {0, 0, 2, 0, 1, 0.1}));
    try {
      representatives(manual_partition({0, 1}, 2), b);
      FAIL("expected MismatchedPartition");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MismatchedPartition);
    }
  }
}

TEST_CASE("every representative belongs to its cluster") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto lb = synth(2 + seed % 4, seed);
    const auto p = cluster_permutations(lb.bundle, std::nullopt, 42);
    const auto reps = representatives(p, lb.bundle);
    CHECK(reps.decode_count() == p.k);
    CHECK(reps.decode_count() < 120);
    for (const auto& r : reps.clusters) CHECK(p.assignment.labels[r.representative_index] == r.cluster);
  }
}

TEST_CASE("pca_project") {
  SUBCASE("points on y = x") {
    const DenseMatrix pts(4, 2, {0, 0, 1, 1, 2, 2, 3, 3});
    const auto proj = pca_project(pts, 2);
    const double r = std::sqrt(2.0);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(proj(i, 0) == doctest::Approx((static_cast<double>(i) - 1.5) * r));
      CHECK(std::abs(proj(i, 1)) <= 1e-9);
    }
  }
  SUBCASE("isotropic Gaussian sample") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<double> v(2000);
    for (double& x : v) x = g(rng);
    const DenseMatrix pts(1000, 2, v);
    const auto proj = pca_project(pts, 2);
    double var[2] = {0, 0};
    for (std::size_t i = 0; i < 1000; ++i)
      for (int c = 0; c < 2; ++c) var[c] += proj(i, static_cast<std::size_t>(c)) * proj(i, static_cast<std::size_t>(c)) / 999.0;
    // Oracle: closed-form eigenvalues of the 2x2 sample covariance.
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
      mx += pts(i, 0) / 1000.0;
      my += pts(i, 1) / 1000.0;
    }
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
      sxx += (pts(i, 0) - mx) * (pts(i, 0) - mx) / 999.0;
      syy += (pts(i, 1) - my) * (pts(i, 1) - my) / 999.0;
      sxy += (pts(i, 0) - mx) * (pts(i, 1) - my) / 999.0;
    }
    const double mid = 0.5 * (sxx + syy);
    const double rad = std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
    CHECK(var[0] == doctest::Approx(mid + rad).epsilon(1e-9));
    CHECK(var[1] == doctest::Approx(mid - rad).epsilon(1e-9));
    CHECK(var[1] >= 0.8 * var[0]);
  }
  SUBCASE("full-dimensional projection is an isometry") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    std::vector<double> v(20 * 5);
    for (double& x : v) x = g(rng);
    const DenseMatrix pts(20, 5, v);
    const auto proj = pca_project(pts, 5);
    for (std::size_t i = 0; i < 20; ++i)
      for (std::size_t j = 0; j < 20; ++j)
        CHECK(std::abs(std::sqrt(squared_distance(pts.row(i), pts.row(j))) -
                       std::sqrt(squared_distance(proj.row(i), proj.row(j)))) <= 1e-8);
  }
  SUBCASE("wide data uses the Gram route with the same scores") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    std::vector<double> v(6 * 10);
    for (double& x : v) x = g(rng);
    const DenseMatrix wide(6, 10, v);
    const auto proj = pca_project(wide, 2);
    // Variance of each score column equals the matching covariance eigenvalue.
    DenseMatrix centered = wide;
    for (std::size_t j = 0; j < 10; ++j) {
      double m = 0;
      for (std::size_t i = 0; i < 6; ++i) m += wide(i, j) / 6.0;
      for (std::size_t i = 0; i < 6; ++i) centered(i, j) -= m;
    }
    const auto gram = symmetric_eigen(multiply(centered, centered.transpose()));
    for (std::size_t c = 0; c < 2; ++c) {
      double s = 0;
      for (std::size_t i = 0; i < 6; ++i) s += proj(i, c) * proj(i, c);
      CHECK(s == doctest::Approx(gram.eigenvalues[5 - c]).epsilon(1e-9));
    }
  }
  SUBCASE("degenerate input") {
    try {
      pca_project(DenseMatrix(3, 2, {1, 1, 1, 1, 1, 1}), 1);
      FAIL("expected DegenerateInput");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateInput);
    }
  }
}
