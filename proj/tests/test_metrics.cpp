#include "ubssd/metrics.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <random>

using namespace ubssd;

TEST_SUITE("metrics") {

TEST_CASE("identity gives zero") {
  CHECK(amari_index(GlobalMatrix(Eigen::MatrixXd::Identity(2, 2), 1)) == 0.0);
  CHECK(amari_index(GlobalMatrix(Eigen::MatrixXd::Identity(6, 6), 2)) == 0.0);
  CHECK(amari_index(GlobalMatrix(Eigen::MatrixXd::Identity(12, 12), 3)) == 0.0);
}

TEST_CASE("all-ones gives one") {
  CHECK(amari_index(GlobalMatrix(Eigen::MatrixXd::Ones(4, 4), 2)) == doctest::Approx(1.0));
  CHECK(amari_index(GlobalMatrix(Eigen::MatrixXd::Ones(6, 6), 1)) == doctest::Approx(1.0));
}

TEST_CASE("hand-computed 2x2 case") {
  Eigen::MatrixXd g(2, 2);
  g << 1, 1, 0, 1;
  CHECK(amari_index(GlobalMatrix(g, 1)) == doctest::Approx(0.5));
}

TEST_CASE("permutation global matrix gives zero") {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(4, 4);
  p(0, 2) = 1; p(1, 3) = 1; p(2, 0) = 1; p(3, 1) = 1;  // swap the two 2x2 blocks
  const auto g = global_matrix(p, Eigen::MatrixXd::Identity(4, 4),
                               Eigen::MatrixXd::Identity(4, 4), 2);
  CHECK(amari_index(g) == 0.0);
  CHECK(is_block_permutation(g));
}

TEST_CASE("global_matrix matches naive triple product") {
  const auto w_isa = testutil::random_matrix(4, 4, 50);
  const auto w_pca = testutil::random_matrix(4, 8, 51);
  const auto h0 = testutil::random_matrix(8, 4, 52);
  const auto g = global_matrix(w_isa, w_pca, h0, 2);
  Eigen::MatrixXd naive = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 8; ++k)
        for (int l = 0; l < 4; ++l) naive(i, j) += w_isa(i, l) * w_pca(l, k) * h0(k, j);
  CHECK((g.g - naive).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fuzz: index stays in [0,1]") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 3);
    const int m = 2 + static_cast<int>(rng() % 4);
    Eigen::MatrixXd g(m * d, m * d);
    for (Eigen::Index c = 0; c < g.cols(); ++c)
      for (Eigen::Index r = 0; r < g.rows(); ++r) g(r, c) = u(rng);
    const double r = amari_index(GlobalMatrix(g, d));
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("fuzz: block permutations give zero and are detected") {
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 3;
    const int m = 2 + trial % 5;
    const auto g = testutil::random_block_permutation(m, d, 100 + trial);
    const GlobalMatrix gm(g, d);
    CHECK(amari_index(gm) < 1e-10);
    CHECK(is_block_permutation(gm, 1e-6));
    // breaking one zero block must break both properties
    Eigen::MatrixXd broken = g;
    broken.array() += 0.3;
    const GlobalMatrix bm(broken, d);
    CHECK(amari_index(bm) > 1e-3);
    CHECK_FALSE(is_block_permutation(bm, 1e-2));
  }
}

TEST_CASE("invariance under block permutation and block sign flips") {
  const int d = 2, m = 3;
  Eigen::MatrixXd g = testutil::random_matrix(d * m, d * m, 60).cwiseAbs();
  const double base = amari_index(GlobalMatrix(g, d));

  Eigen::MatrixXd rows_swapped = g;
  rows_swapped.middleRows(0, d).swap(rows_swapped.middleRows(d, d));
  CHECK(amari_index(GlobalMatrix(rows_swapped, d)) == doctest::Approx(base));

  Eigen::MatrixXd cols_swapped = g;
  cols_swapped.middleCols(2 * d, d).swap(cols_swapped.middleCols(0, d));
  CHECK(amari_index(GlobalMatrix(cols_swapped, d)) == doctest::Approx(base));

  Eigen::MatrixXd negated = g;
  negated.block(d, d, d, d) *= -1.0;
  CHECK(amari_index(GlobalMatrix(negated, d)) == doctest::Approx(base));
}

TEST_CASE("block detection survives noise and block-row scaling") {
  const auto g = testutil::random_block_permutation(4, 2, 70);
  Eigen::MatrixXd noisy = g + 1e-6 * testutil::random_matrix(8, 8, 71);
  CHECK(is_block_permutation(GlobalMatrix(noisy, 2), 1e-3));
  noisy.middleRows(2, 2) *= 40.0;
  CHECK(is_block_permutation(GlobalMatrix(noisy, 2), 1e-3));
  CHECK_FALSE(is_block_permutation(GlobalMatrix(Eigen::MatrixXd::Ones(8, 8), 2), 1e-3));
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS_AS(amari_index(GlobalMatrix(Eigen::MatrixXd::Identity(2, 2), 2)),
                  DimensionError);  // M = 1
  Eigen::MatrixXd zero_row = Eigen::MatrixXd::Identity(4, 4);
  zero_row.row(0).setZero();
  zero_row.row(1).setZero();
  CHECK_THROWS_AS(amari_index(GlobalMatrix(zero_row, 2)), DataError);
  CHECK_THROWS_AS(GlobalMatrix(Eigen::MatrixXd::Identity(5, 5), 2), DimensionError);
}

}  // TEST_SUITE
