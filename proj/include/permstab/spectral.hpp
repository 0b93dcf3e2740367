#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "permstab/matrix.hpp"

namespace permstab {

/// Full spectrum of a symmetric matrix. eigenvalues are ascending and
/// column i of eigenvectors is the unit eigenvector paired with eigenvalue i.
struct EigenSystem {
  std::vector<double> eigenvalues;
  DenseMatrix eigenvectors;
};

/// Pairwise cosine distances 1 - cos(h_i, h_j), diagonal 0, entries clamped
/// to [0, 2]. Throws ZeroNormRow when a row has 2-norm <= 1e-12.
DenseMatrix cosine_distances(const DenseMatrix& states);

/// A_ij = exp(-(1 - cos(h_i, h_j)) / sigma) off the diagonal, 0 on it.
DenseMatrix cosine_affinity(const DenseMatrix& states, double sigma);
DenseMatrix affinity_from_distances(const DenseMatrix& distances, double sigma);

/// L = I - D^{-1/2} A D^{-1/2} with D the diagonal of row sums of A.
/// Throws IsolatedNode when a row sum is zero.
DenseMatrix normalized_laplacian(const DenseMatrix& affinity);

/// Cyclic Jacobi eigensolver for dense symmetric matrices up to 5040 x 5040.
/// Converges when the off-diagonal Frobenius norm drops to 1e-12 ||M||_F;
/// gives up with NoConvergence after 100 sweeps. Each eigenvector is signed
/// so that its largest-magnitude component is positive.
EigenSystem symmetric_eigen(const DenseMatrix& m);

/// Number of clusters from the largest consecutive gap of an ascending
/// spectrum: K = max(2, i* + 1) where i* is the 0-based index of the first
/// largest gap lambda[i+1] - lambda[i].
std::size_t select_k_eigengap(std::span<const double> eigenvalues);

/// Rows of the first k eigenvectors, each scaled to unit length. An all-zero
/// row is replaced by e_1.
DenseMatrix spectral_embed(const EigenSystem& eigen, std::size_t k);
DenseMatrix spectral_embed(const DenseMatrix& laplacian, std::size_t k);

}  // namespace permstab
