#pragma once

#include <utility>
#include <vector>

#include "mhparse/tensor.hpp"

namespace mhparse {

// Smallest-k eigenpairs of a symmetric matrix, eigenvalues ascending,
// eigenvectors as columns of an N x k tensor. Cyclic Jacobi sweeps to an
// off-diagonal Frobenius norm of 1e-12 relative to the matrix scale.
// Throws contract_error when m is not symmetric within 1e-9 and
// argument_error when k is out of range.
std::pair<std::vector<double>, Tensor> sym_eigs(const Tensor& m, int k);

// Lloyd k-means with farthest-point initialization. The first center is the
// seed-selected point, the rest maximize distance to the chosen set, so the
// result is a pure function of (points, k, seed). Returns one label in
// [0, k) per row of points. When wcss_history is given it records the
// within-cluster sum of squares after every assignment pass.
std::vector<int> kmeans(const Tensor& points, int k, std::uint64_t seed,
                        std::vector<double>* wcss_history = nullptr);

// Within-cluster sum of squared distances for a given labeling.
double kmeans_wcss(const Tensor& points, const std::vector<int>& labels, int k);

}  // namespace mhparse
