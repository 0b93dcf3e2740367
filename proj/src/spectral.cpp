#include "permstab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "permstab/error.hpp"

namespace permstab {
namespace {

constexpr std::size_t kMaxSide = 5040;
constexpr int kMaxSweeps = 100;
constexpr double kOffDiagonalTolerance = 1e-12;
constexpr double kSymmetryTolerance = 1e-10;

void require_square(const DenseMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": matrix must be square and non-empty");
  }
}

double off_diagonal_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) s += 2.0 * a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

DenseMatrix cosine_distances(const DenseMatrix& states) {
  const std::size_t n = states.rows();
  std::vector<double> unit(states.values());
  for (std::size_t i = 0; i < n; ++i) {
    const double norm = std::sqrt(dot(states.row(i), states.row(i)));
    if (!(norm > 1e-12)) {
      throw Error(ErrorCode::ZeroNormRow, "hidden state " + std::to_string(i) + " has near-zero norm");
    }
    for (std::size_t c = 0; c < states.cols(); ++c) unit[i * states.cols() + c] /= norm;
  }
  const DenseMatrix u(n, states.cols(), std::move(unit));
  DenseMatrix dist(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double cosine = std::clamp(dot(u.row(i), u.row(j)), -1.0, 1.0);
      const double d = 1.0 - cosine;
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }
  return dist;
}

DenseMatrix affinity_from_distances(const DenseMatrix& distances, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::NonPositiveSigma, "sigma must be positive, got " + std::to_string(sigma));
  }
  require_square(distances, "affinity");
  const std::size_t n = distances.rows();
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = std::exp(-distances(i, j) / sigma);
      a(i, j) = w;
      a(j, i) = w;
    }
  }
  return a;
}

DenseMatrix cosine_affinity(const DenseMatrix& states, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::NonPositiveSigma, "sigma must be positive, got " + std::to_string(sigma));
  }
  return affinity_from_distances(cosine_distances(states), sigma);
}

DenseMatrix normalized_laplacian(const DenseMatrix& affinity) {
  require_square(affinity, "normalized_laplacian");
  const std::size_t n = affinity.rows();
  std::vector<double> inv_sqrt_degree(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (affinity(i, i) != 0.0) {
      throw Error(ErrorCode::InvalidArgument, "affinity diagonal must be zero");
    }
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = affinity(i, j);
      if (w < 0.0) throw Error(ErrorCode::InvalidArgument, "affinity must be non-negative");
      if (w != affinity(j, i)) throw Error(ErrorCode::InvalidArgument, "affinity must be symmetric");
      degree += w;
    }
    if (!(degree > 0.0)) {
      throw Error(ErrorCode::IsolatedNode, "node " + std::to_string(i) + " has zero degree");
    }
    inv_sqrt_degree[i] = 1.0 / std::sqrt(degree);
  }
  DenseMatrix l = DenseMatrix::identity(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = -affinity(i, j) * inv_sqrt_degree[i] * inv_sqrt_degree[j];
      l(i, j) = v;
      l(j, i) = v;
    }
  }
  return l;
}

EigenSystem symmetric_eigen(const DenseMatrix& m) {
  require_square(m, "symmetric_eigen");
  const std::size_t n = m.rows();
  if (n > kMaxSide) {
    throw Error(ErrorCode::InvalidArgument, "symmetric_eigen: side " + std::to_string(n) + " exceeds 5040");
  }
  double max_abs = 0.0;
  for (double v : m.values()) max_abs = std::max(max_abs, std::abs(v));
  const double sym_tol = kSymmetryTolerance * std::max(1.0, max_abs);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(m(i, j) - m(j, i)) > sym_tol) {
        throw Error(ErrorCode::NotSymmetric, "entries (" + std::to_string(i) + "," + std::to_string(j) +
                                                 ") and transpose differ");
      }

  DenseMatrix a(m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = avg;
      a(j, i) = avg;
    }
  DenseMatrix v = DenseMatrix::identity(n);
  const double target = kOffDiagonalTolerance * m.frobenius_norm();

  bool converged = false;
  for (int sweep = 0; sweep <= kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) {
      converged = true;
      break;
    }
    if (sweep == kMaxSweeps) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        // Entries below rounding level of both diagonals are dropped rather
        // than rotated; rotating them stalls convergence on repeated
        // eigenvalues.
        if (std::abs(apq) <= std::numeric_limits<double>::epsilon() * std::sqrt(std::abs(a(p, p) * a(q, q)))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          const double new_kp = c * akp - s * akq;
          const double new_kq = s * akp + c * akq;
          a(k, p) = new_kp;
          a(p, k) = new_kp;
          a(k, q) = new_kq;
          a(q, k) = new_kq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    throw Error(ErrorCode::NoConvergence, "Jacobi sweep budget exhausted");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  EigenSystem out;
  out.eigenvalues.resize(n);
  out.eigenvectors = DenseMatrix(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    const std::size_t src = order[col];
    out.eigenvalues[col] = a(src, src);
    double norm = 0.0;
    std::size_t argmax = 0;
    for (std::size_t k = 0; k < n; ++k) {
      norm += v(k, src) * v(k, src);
      if (std::abs(v(k, src)) > std::abs(v(argmax, src))) argmax = k;
    }
    norm = std::sqrt(norm);
    const double scale = (v(argmax, src) < 0.0 ? -1.0 : 1.0) / norm;
    for (std::size_t k = 0; k < n; ++k) out.eigenvectors(k, col) = v(k, src) * scale;
  }
  return out;
}

std::size_t select_k_eigengap(std::span<const double> eigenvalues) {
  if (eigenvalues.size() < 3) {
    throw Error(ErrorCode::TooFewEigenvalues,
                "need at least 3 eigenvalues, got " + std::to_string(eigenvalues.size()));
  }
  std::size_t best = 0;
  double best_gap = -1.0;
  for (std::size_t i = 0; i + 1 < eigenvalues.size(); ++i) {
    const double gap = eigenvalues[i + 1] - eigenvalues[i];
    if (gap < 0.0) throw Error(ErrorCode::InvalidArgument, "eigenvalues must be ascending");
    if (gap > best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return std::max<std::size_t>(2, best + 1);
}

DenseMatrix spectral_embed(const EigenSystem& eigen, std::size_t k) {
  const std::size_t n = eigen.eigenvalues.size();
  if (k < 2 || k > n) {
    throw Error(ErrorCode::InvalidArgument, "spectral_embed: k=" + std::to_string(k) + " outside [2, " +
                                                std::to_string(n) + "]");
  }
  DenseMatrix emb(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = emb.row(i);
    for (std::size_t c = 0; c < k; ++c) row[c] = eigen.eigenvectors(i, c);
    const double norm = std::sqrt(dot(row, row));
    if (norm == 0.0) {
      row[0] = 1.0;
      continue;
    }
    for (double& x : row) x /= norm;
  }
  return emb;
}

DenseMatrix spectral_embed(const DenseMatrix& laplacian, std::size_t k) {
  return spectral_embed(symmetric_eigen(laplacian), k);
}

}  // namespace permstab
