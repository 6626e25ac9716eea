#pragma once

#include "ubssd/types.hpp"
#include "ubssd/util.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace testutil {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = gauss(rng);
  return m;
}

// AR coefficients scaled until the companion matrix is comfortably stable
inline std::vector<Eigen::MatrixXd> random_stable_ar(int order, int dim,
                                                     std::uint64_t seed,
                                                     double target_radius = 0.7) {
  std::vector<Eigen::MatrixXd> coeffs;
  for (int q = 0; q < order; ++q)
    coeffs.push_back(random_matrix(dim, dim, seed + static_cast<std::uint64_t>(q)) /
                     (2.0 * order));
  for (;;) {
    Eigen::MatrixXd companion =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(order) * dim,
                              static_cast<Eigen::Index>(order) * dim);
    for (int q = 0; q < order; ++q)
      companion.block(0, static_cast<Eigen::Index>(q) * dim, dim, dim) =
          coeffs[static_cast<std::size_t>(q)];
    if (order > 1)
      companion.block(dim, 0, static_cast<Eigen::Index>(order - 1) * dim,
                      static_cast<Eigen::Index>(order - 1) * dim) =
          Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(order - 1) * dim,
                                    static_cast<Eigen::Index>(order - 1) * dim);
    const double radius = companion.eigenvalues().cwiseAbs().maxCoeff();
    if (radius <= target_radius) return coeffs;
    for (auto& a : coeffs) a *= 0.9;
  }
}

// simulate x(t) = sum A_q x(t-q) + e(t), e ~ N(0, I), with burn-in; also
// returns the driving noise so innovations can be checked exactly
struct ArSimulation {
  Eigen::MatrixXd x;      // dim x T
  Eigen::MatrixXd noise;  // dim x T (aligned with x)
};

inline ArSimulation simulate_ar(const std::vector<Eigen::MatrixXd>& coeffs,
                                long T, std::uint64_t seed, long burn_in = 500) {
  const auto dim = coeffs.empty() ? 1 : coeffs.front().rows();
  const int order = static_cast<int>(coeffs.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const long total = T + burn_in;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, total);
  Eigen::MatrixXd e(dim, total);
  for (long t = 0; t < total; ++t) {
    for (Eigen::Index r = 0; r < dim; ++r) e(r, t) = gauss(rng);
    x.col(t) = e.col(t);
    for (int q = 1; q <= order && t - q >= 0; ++q)
      x.col(t) += coeffs[static_cast<std::size_t>(q - 1)] * x.col(t - q);
  }
  return {x.rightCols(T), e.rightCols(T)};
}

// principal angles (degrees) between the column spans of two bases
inline Eigen::VectorXd principal_angles_deg(const Eigen::MatrixXd& a,
                                            const Eigen::MatrixXd& b) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qa(a), qb(b);
  const Eigen::MatrixXd ua =
      qa.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXd ub =
      qb.householderQ() * Eigen::MatrixXd::Identity(b.rows(), b.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ua.transpose() * ub);
  return svd.singularValues()
      .cwiseMin(1.0)
      .array()
      .acos()
      .matrix() *
      (180.0 / 3.141592653589793);
}

// block-permutation matrix with random invertible d x d blocks
inline Eigen::MatrixXd random_block_permutation(int m, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> perm(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m) * d,
                                            static_cast<Eigen::Index>(m) * d);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < m; ++i) {
    Eigen::MatrixXd block(d, d);
    do {
      for (Eigen::Index c = 0; c < d; ++c)
        for (Eigen::Index r = 0; r < d; ++r) block(r, c) = gauss(rng);
    } while (std::fabs(block.determinant()) < 1e-3);
    g.block(static_cast<Eigen::Index>(i) * d,
            static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]) * d, d, d) = block;
  }
  return g;
}

}  // namespace testutil
