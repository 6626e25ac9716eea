#include "ubssd/metrics.hpp"

namespace ubssd {

GlobalMatrix::GlobalMatrix(Eigen::MatrixXd matrix, int d)
    : g(std::move(matrix)), block_dim(d) {
  if (g.rows() != g.cols()) throw DimensionError("GlobalMatrix must be square");
  if (d < 1 || g.rows() % d != 0)
    throw DimensionError("GlobalMatrix dimension must be a multiple of the block size");
  num_blocks = static_cast<int>(g.rows()) / d;
}

GlobalMatrix global_matrix(const LinearMap& w_isa, const LinearMap& w_pca,
                           const LinearMap& h0, int block_dim) {
  if (w_isa.cols() != w_pca.rows() || w_pca.cols() != h0.rows())
    throw DimensionError("global_matrix: shape chain mismatch");
  return GlobalMatrix(w_isa * (w_pca * h0), block_dim);
}

namespace {

// g^{i,j}: sum of absolute entries per d x d block.
Eigen::MatrixXd block_abs_sums(const GlobalMatrix& gm) {
  const int M = gm.num_blocks;
  const int d = gm.block_dim;
  Eigen::MatrixXd s(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      s(i, j) = gm.g.block(i * d, j * d, d, d).cwiseAbs().sum();
  return s;
}

}  // namespace

double amari_index(const GlobalMatrix& gm) {
  const int M = gm.num_blocks;
  if (M < 2) throw DimensionError("amari_index undefined for M < 2");
  const Eigen::MatrixXd s = block_abs_sums(gm);
  double total = 0.0;
  for (int i = 0; i < M; ++i) {
    const double mx = s.row(i).maxCoeff();
    if (mx <= 0.0) throw DataError("amari_index: all-zero block row");
    total += s.row(i).sum() / mx - 1.0;
  }
  for (int j = 0; j < M; ++j) {
    const double mx = s.col(j).maxCoeff();
    if (mx <= 0.0) throw DataError("amari_index: all-zero block column");
    total += s.col(j).sum() / mx - 1.0;
  }
  return total / (2.0 * M * (M - 1));
}

bool is_block_permutation(const GlobalMatrix& gm, double tol) {
  const int M = gm.num_blocks;
  const int d = gm.block_dim;
  Eigen::MatrixXd mass(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      mass(i, j) = gm.g.block(i * d, j * d, d, d).norm();
  const double threshold = tol * (mass.sum() / M);
  for (int i = 0; i < M; ++i)
    if ((mass.row(i).array() > threshold).count() != 1) return false;
  for (int j = 0; j < M; ++j)
    if ((mass.col(j).array() > threshold).count() != 1) return false;
  return true;
}

}  // namespace ubssd
