#include "ubssd/arfit.hpp"

#include "ubssd/datagen.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

using namespace ubssd;

TEST_SUITE("arfit") {

TEST_CASE("white noise selects order zero") {
  const TimeSeries x(testutil::random_matrix(3, 10000, 80));
  const ArModel m = fit_ar(x, 0, 5);
  CHECK(m.order == 0);
  CHECK(m.coeffs.empty());
  CHECK(m.sbc_curve.size() == 6);
  // noise covariance should be close to identity
  CHECK((m.noise_cov - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("ar(1) coefficients recovered to 0.02") {
  const auto coeffs = testutil::random_stable_ar(1, 4, 81);
  const auto sim = testutil::simulate_ar(coeffs, 100000, 82);
  const ArModel m = fit_ar(TimeSeries(sim.x), 0, 4);
  REQUIRE(m.order >= 1);
  CHECK((m.coeffs[0] - coeffs[0]).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("ar(2) order selected in most trials") {
  int hits = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto coeffs = testutil::random_stable_ar(2, 3, 90 + static_cast<std::uint64_t>(trial));
    const auto sim = testutil::simulate_ar(coeffs, 20000, 200 + static_cast<std::uint64_t>(trial));
    const ArModel m = fit_ar(TimeSeries(sim.x), 0, 6);
    if (m.order == 2) ++hits;
  }
  CHECK(hits >= 9);
}

TEST_CASE("innovation with order zero is the series itself") {
  const TimeSeries x(testutil::random_matrix(2, 100, 83));
  ArModel m;
  m.order = 0;
  m.noise_cov = Eigen::MatrixXd::Identity(2, 2);
  const auto innov = innovation(x, m);
  CHECK(innov.values == x.values);
}

TEST_CASE("innovation with the true model reproduces the driving noise") {
  const auto coeffs = testutil::random_stable_ar(1, 3, 84);
  const auto sim = testutil::simulate_ar(coeffs, 5000, 85, 0);  // no burn-in
  ArModel m;
  m.order = 1;
  m.coeffs = coeffs;
  m.noise_cov = Eigen::MatrixXd::Identity(3, 3);
  const auto innov = innovation(TimeSeries(sim.x), m);
  REQUIRE(innov.len() == 4999);
  CHECK((innov.values - sim.noise.rightCols(4999)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fitted innovation is white up to 4/sqrt(T)") {
  const auto coeffs = testutil::random_stable_ar(2, 3, 86);
  const long T = 50000;
  const auto sim = testutil::simulate_ar(coeffs, T, 87);
  const ArModel m = fit_ar(TimeSeries(sim.x), 0, 6);
  const auto innov = innovation(TimeSeries(sim.x), m);
  const Eigen::MatrixXd z =
      innov.values.colwise() - innov.values.rowwise().mean().eval();
  const Eigen::MatrixXd var = z * z.transpose() / static_cast<double>(z.cols());
  const Eigen::VectorXd scale = var.diagonal().cwiseSqrt();
  for (int lag = 1; lag <= std::max(1, m.order); ++lag) {
    const Eigen::Index n = z.cols() - lag;
    const Eigen::MatrixXd cross =
        z.rightCols(n) * z.leftCols(n).transpose() / static_cast<double>(n);
    const Eigen::MatrixXd rho =
        scale.cwiseInverse().asDiagonal() * cross * scale.cwiseInverse().asDiagonal();
    CHECK(rho.cwiseAbs().maxCoeff() < 4.0 / std::sqrt(static_cast<double>(T)));
  }
}

TEST_CASE("sbc curve is deterministic and complete") {
  const TimeSeries x(testutil::random_matrix(2, 3000, 88));
  const ArModel a = fit_ar(x, 0, 4);
  const ArModel b = fit_ar(x, 0, 4);
  CHECK(a.sbc_curve == b.sbc_curve);
  for (std::size_t i = 0; i < a.sbc_curve.size(); ++i)
    CHECK(a.sbc_curve[i].first == static_cast<int>(i));
}

TEST_CASE("insufficient samples rejected") {
  const TimeSeries x(testutil::random_matrix(4, 30, 89));
  CHECK_THROWS_AS(fit_ar(x, 0, 10), DataError);
  CHECK_THROWS_AS(fit_ar(x, 2, 1), DimensionError);
}

TEST_CASE("duplicated channel triggers the ridge fallback") {
  const auto coeffs = testutil::random_stable_ar(1, 2, 95);
  const auto sim = testutil::simulate_ar(coeffs, 5000, 96);
  Eigen::MatrixXd dup(3, sim.x.cols());
  dup.topRows(2) = sim.x;
  dup.row(2) = sim.x.row(0);  // exactly collinear regressors
  const ArModel m = fit_ar(TimeSeries(dup), 1, 3);
  CHECK(m.regularized);
  CHECK(m.order >= 1);
  const auto innov = innovation(TimeSeries(dup), m);
  CHECK(innov.values.allFinite());
}

TEST_CASE("innovation covariance of a letters scene has rank D_s") {
  SourceSpec spec;
  spec.kind = SourceKind::letters;
  spec.M = 2;
  spec.d = 2;
  const ModelDims dims{2, 2, 8, 1, 20000};
  const Scene scene = make_scene(spec, dims, 4242);

  const ArModel m = fit_ar(scene.observation, 0, 2 * (dims.L + 1));
  const auto innov = innovation(scene.observation, m);

  const Eigen::MatrixXd z =
      innov.effective().colwise() - innov.effective().rowwise().mean().eval();
  const Eigen::MatrixXd cov = z * z.transpose() / static_cast<double>(z.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd lam = es.eigenvalues().reverse();  // descending
  const int ds = dims.D_s();
  for (int i = ds; i < dims.D_x; ++i) CHECK(lam(i) < 0.05 * lam(ds - 1));

  // principal subspace aligns with col(H0)
  Eigen::MatrixXd top(dims.D_x, ds);
  for (int i = 0; i < ds; ++i) top.col(i) = es.eigenvectors().col(dims.D_x - 1 - i);
  const auto angles = testutil::principal_angles_deg(top, scene.ground_truth_h0);
  CHECK(angles.maxCoeff() < 5.0);
}

}  // TEST_SUITE
