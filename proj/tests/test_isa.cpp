#include "ubssd/isa.hpp"

#include "ubssd/datagen.hpp"
#include "ubssd/metrics.hpp"
#include "ubssd/serialize.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace ubssd;

namespace {

TimeSeries standardized(Eigen::MatrixXd values) {
  values.colwise() -= values.rowwise().mean().eval();
  const Eigen::MatrixXd cov =
      values * values.transpose() / static_cast<double>(values.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::MatrixXd w = es.operatorInverseSqrt();
  return TimeSeries(w * values);
}

Eigen::MatrixXd uniform_sources(Eigen::Index dim, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-std::sqrt(3.0), std::sqrt(3.0));
  Eigen::MatrixXd s(dim, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < dim; ++r) s(r, c) = u(rng);
  return s;
}

bool is_signed_permutation(const Eigen::MatrixXd& m, double dominant) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index j;
    if (m.row(i).cwiseAbs().maxCoeff(&j) < dominant) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("isa") {

TEST_CASE("pca_whiten keeps an already-white input white") {
  const TimeSeries x = standardized(testutil::random_matrix(4, 20000, 110));
  const PcaResult p = pca_whiten(x, 4);
  const Eigen::MatrixXd z =
      p.whitened.values.colwise() - p.whitened.values.rowwise().mean().eval();
  const Eigen::MatrixXd cov = z * z.transpose() / static_cast<double>(z.cols());
  CHECK((cov - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(p.discarded_mass == 0.0);
}

TEST_CASE("rank-deficient input loses almost no eigenvalue mass") {
  const Eigen::MatrixXd h0 = testutil::random_matrix(8, 4, 111);
  const Eigen::MatrixXd s = uniform_sources(4, 10000, 112);
  const TimeSeries x(h0 * s);
  const PcaResult p = pca_whiten(x, 4);
  CHECK(p.discarded_mass < 1e-6);
  CHECK_FALSE(p.ill_separated);
  const Eigen::MatrixXd z =
      p.whitened.values.colwise() - p.whitened.values.rowwise().mean().eval();
  const Eigen::MatrixXd cov = z * z.transpose() / static_cast<double>(z.cols());
  CHECK((cov - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("pca_whiten is scale equivariant") {
  const TimeSeries x(testutil::random_matrix(5, 5000, 113));
  const TimeSeries x10(10.0 * x.values);
  const PcaResult a = pca_whiten(x, 3);
  const PcaResult b = pca_whiten(x10, 3);
  CHECK((a.whitened.values - b.whitened.values).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("pca_whiten flags a poorly separated spectrum") {
  // two comparable directions, cut in between
  Eigen::MatrixXd v = testutil::random_matrix(3, 20000, 114);
  v.row(0) *= 2.0;
  v.row(1) *= 1.9;
  v.row(2) *= 1.8;
  const PcaResult p = pca_whiten(TimeSeries(v), 2);
  CHECK(p.ill_separated);
}

TEST_CASE("ica on independent channels returns a signed permutation") {
  const TimeSeries white(uniform_sources(3, 100000, 115));
  IcaOptions opts;
  opts.seed = 1;
  const IcaResult r = ica(white, opts);
  CHECK(r.converged);
  CHECK_FALSE(r.unidentifiable);
  CHECK((r.w * r.w.transpose() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
        1e-8);
  CHECK(is_signed_permutation(r.w, 0.95));
}

TEST_CASE("ica flags Gaussian input as unidentifiable") {
  const TimeSeries white = standardized(testutil::random_matrix(3, 20000, 116));
  IcaOptions opts;
  opts.seed = 2;
  opts.restarts = 2;
  opts.max_iter = 200;
  const IcaResult r = ica(white, opts);
  CHECK(r.unidentifiable);
  CHECK((r.w * r.w.transpose() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
        1e-8);
}

TEST_CASE("ica undoes a planted rotation within two degrees") {
  const double angle = 30.0 * 3.141592653589793 / 180.0;
  Eigen::MatrixXd rot(2, 2);
  rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  const TimeSeries mixed(rot * uniform_sources(2, 100000, 117));
  IcaOptions opts;
  opts.seed = 3;
  const IcaResult r = ica(mixed, opts);
  const Eigen::MatrixXd recovered = r.w * rot;
  // W * R should be a signed permutation; the dominant entry's angle error
  for (Eigen::Index i = 0; i < 2; ++i) {
    Eigen::Index j;
    const double v = recovered.row(i).cwiseAbs().maxCoeff(&j);
    CHECK(std::acos(std::min(v, 1.0)) * 180.0 / 3.141592653589793 < 2.0);
  }
}

TEST_CASE("grouping recovers pre-grouped components") {
  const auto s = gen_geom3d(2, 20000, 118);  // channels 0-2 and 3-5
  const GroupingResult g = group_components(s, 3, 2);
  CHECK(g.exhaustive);
  CHECK(g.partition.groups() == std::vector<std::vector<int>>{{0, 1, 2}, {3, 4, 5}});
  CHECK(g.permutation.isIdentity(0.0));
}

TEST_CASE("grouping with d=1 is trivial") {
  const TimeSeries y(uniform_sources(3, 1000, 119));
  const GroupingResult g = group_components(y, 1, 3);
  CHECK(g.partition.groups() == std::vector<std::vector<int>>{{0}, {1}, {2}});
  CHECK(g.permutation.isIdentity(0.0));
  CHECK(g.objective == 0.0);
}

TEST_CASE("grouping untangles interleaved channels") {
  const auto s = gen_letters(20000, 120);  // components (0,1) and (2,3)
  Eigen::MatrixXd inter(4, s.len());
  inter.row(0) = s.values.row(0);
  inter.row(1) = s.values.row(2);
  inter.row(2) = s.values.row(1);
  inter.row(3) = s.values.row(3);
  const GroupingResult g = group_components(TimeSeries(inter), 2, 2);
  CHECK(g.partition.groups() == std::vector<std::vector<int>>{{0, 2}, {1, 3}});
}

TEST_CASE("greedy grouping agrees with exhaustive on small instances") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto s = gen_geom3d(2, 20000, 130 + seed);
    Eigen::MatrixXd shuffled(6, s.len());
    const int order[6] = {2, 5, 0, 3, 1, 4};  // interleave the two components
    for (int i = 0; i < 6; ++i) shuffled.row(i) = s.values.row(order[i]);
    const TimeSeries y(shuffled);
    const GroupingResult ex = group_components(y, 3, 2, false);
    const GroupingResult gr = group_components(y, 3, 2, true);
    REQUIRE(ex.exhaustive);
    REQUIRE_FALSE(gr.exhaustive);
    CHECK(ex.partition.groups() == gr.partition.groups());
    CHECK(gr.objective == doctest::Approx(ex.objective));
  }
}

TEST_CASE("grouping rejects non-divisible dimensions") {
  const TimeSeries y(uniform_sources(5, 500, 121));
  CHECK_THROWS_AS(group_components(y, 2, 2), DimensionError);
}

TEST_CASE("solve_isa separates an instantaneous letters mixture") {
  SourceSpec spec;
  spec.kind = SourceKind::letters;
  const ModelDims dims{2, 2, 8, 0, 100000};
  const Scene scene = make_scene(spec, dims, 131);
  IsaOptions opts;
  opts.ica.seed = 4;
  const IsaResult r = solve_isa(scene.observation, 2, 2, opts);
  CHECK((r.w_isa * r.w_isa.transpose() - Eigen::MatrixXd::Identity(4, 4))
            .cwiseAbs()
            .maxCoeff() < 1e-8);
  CHECK((r.components.values - r.w_isa * (r.w_pca * scene.observation.values))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  const double err = amari_index(global_matrix(r.w_isa, r.w_pca, scene.ground_truth_h0, 2));
  CHECK(err < 0.01);
}

TEST_CASE("solve_isa with d=1 performs plain ICA") {
  const Eigen::MatrixXd mixing = testutil::random_matrix(6, 3, 132);
  const TimeSeries x(mixing * uniform_sources(3, 100000, 133));
  IsaOptions opts;
  opts.ica.seed = 5;
  const IsaResult r = solve_isa(x, 1, 3, opts);
  const double err = amari_index(global_matrix(r.w_isa, r.w_pca, mixing, 1));
  CHECK(err < 0.01);
}

TEST_CASE("isa result round-trips through the cache format") {
  SourceSpec spec;
  spec.kind = SourceKind::letters;
  const ModelDims dims{2, 2, 8, 0, 5000};
  const Scene scene = make_scene(spec, dims, 140);
  IsaOptions opts;
  opts.ica.seed = 8;
  const IsaResult r = solve_isa(scene.observation, 2, 2, opts);

  const auto path = std::filesystem::temp_directory_path() / "ubssd_test.isar";
  save_isa_result(r, path);
  const IsaResult back = load_isa_result(path);
  CHECK(back.w_pca == r.w_pca);
  CHECK(back.w_isa == r.w_isa);
  CHECK(back.partition == r.partition);
  CHECK(back.components.values == r.components.values);
  CHECK(back.ica_iterations == r.ica_iterations);
  CHECK(back.grouping_objective == r.grouping_objective);
  CHECK(back.ica_converged == r.ica_converged);
  std::filesystem::remove(path);
}

TEST_CASE("solve_isa is deterministic given the seed") {
  SourceSpec spec;
  spec.kind = SourceKind::letters;
  const ModelDims dims{2, 2, 8, 0, 20000};
  const Scene scene = make_scene(spec, dims, 134);
  IsaOptions opts;
  opts.ica.seed = 6;
  const IsaResult a = solve_isa(scene.observation, 2, 2, opts);
  const IsaResult b = solve_isa(scene.observation, 2, 2, opts);
  CHECK(a.w_isa == b.w_isa);
  CHECK(a.w_pca == b.w_pca);
  CHECK(a.ica_iterations == b.ica_iterations);
}

}  // TEST_SUITE
