#pragma once

#include "ubssd/types.hpp"

namespace ubssd {

/// G = W_isa * W_pca * H_0, viewed in d x d blocks.
struct GlobalMatrix {
  Eigen::MatrixXd g;   // D_s x D_s
  int block_dim = 0;   // d
  int num_blocks = 0;  // M

  GlobalMatrix() = default;
  GlobalMatrix(Eigen::MatrixXd matrix, int d);
};

GlobalMatrix global_matrix(const LinearMap& w_isa, const LinearMap& w_pca,
                           const LinearMap& h0, int block_dim);

/// Normalized Amari error over the d x d block structure; 0 iff G is a
/// block-permutation matrix, 1 in the worst case.
double amari_index(const GlobalMatrix& g);

/// True iff exactly one block per block-row and block-column carries
/// Frobenius mass above tol * (total mass / M).
bool is_block_permutation(const GlobalMatrix& g, double tol = 1e-3);

}  // namespace ubssd
