#include "ubssd/pipelines.hpp"

#include "ubssd/filter.hpp"
#include "ubssd/util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace ubssd {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// ingestion contract: pipelines operate on mean-free observations
TimeSeries centered(const TimeSeries& x) {
  Eigen::MatrixXd v = x.values;
  v.colwise() -= Eigen::VectorXd(x.effective().rowwise().mean());
  return TimeSeries(std::move(v), x.transient);
}

// block-Toeplitz mixing of the stacked observation: block (i, j) = H_{j-i}
Eigen::MatrixXd stacked_mixing(const FirFilter& mixing, int depth) {
  const Eigen::Index dx = mixing.rows();
  const Eigen::Index ds = mixing.cols();
  const Eigen::Index L = mixing.degree();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dx * depth, ds * (L + depth));
  for (Eigen::Index i = 0; i < depth; ++i)
    for (Eigen::Index l = 0; l <= L; ++l)
      h.block(i * dx, (i + l) * ds, dx, ds) = mixing.taps[static_cast<std::size_t>(l)];
  return h;
}

// max over the nonlinearity bank of |corr(f(a_i), f(b_j))|
Eigen::MatrixXd cross_dependence(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(a.rows(), b.rows());
  for (int bank = 0; bank < 3; ++bank) {
    auto apply = [bank](const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
      switch (bank) {
        case 0: return m.array().square();
        case 1: return m.array().abs();
        default: return m.array().tanh();
      }
    };
    Eigen::MatrixXd fa = apply(a);
    Eigen::MatrixXd fb = apply(b);
    fa.colwise() -= fa.rowwise().mean().eval();
    fb.colwise() -= fb.rowwise().mean().eval();
    for (Eigen::Index i = 0; i < fa.rows(); ++i) {
      const double norm = fa.row(i).norm();
      if (norm > 0.0) fa.row(i) /= norm;
    }
    for (Eigen::Index i = 0; i < fb.rows(); ++i) {
      const double norm = fb.row(i).norm();
      if (norm > 0.0) fb.row(i) /= norm;
    }
    s = s.cwiseMax((fa * fb.transpose()).cwiseAbs());
  }
  return s;
}

}  // namespace

std::string to_string(Method m) { return m == Method::LPA ? "lpa" : "tcc"; }

Method parse_method(const std::string& name) {
  if (name == "lpa" || name == "LPA") return Method::LPA;
  if (name == "tcc" || name == "TCC") return Method::TCC;
  throw DataError("unknown method: " + name);
}

int tcc_stacking_depth(const ModelDims& dims, int max_depth) {
  for (int lp = 1; lp <= max_depth; ++lp)
    if (static_cast<long>(dims.D_x) * lp >=
        static_cast<long>(dims.D_s()) * (dims.L + lp))
      return lp;
  throw DataError("tcc: no feasible stacking depth (need D_x sufficiently above D_s)");
}

DeconvResult lpa_deconvolve(const TimeSeries& x, const ModelDims& dims,
                            std::uint64_t seed, const Scene* ground_truth) {
  dims.validate();
  if (x.dim() != dims.D_x)
    throw DimensionError("lpa_deconvolve: observation dim != D_x");
  const auto t_total = Clock::now();
  DeconvResult res;
  res.method = Method::LPA;

  const TimeSeries xc = centered(x);

  auto t0 = Clock::now();
  const int q_max = 2 * (dims.L + 1);
  const ArModel ar = fit_ar(xc, 0, q_max);
  const TimeSeries innov = innovation(xc, ar);
  res.timings.ar_ms = ms_since(t0);
  res.ar_order = ar.order;

  t0 = Clock::now();
  IsaOptions iopts;
  iopts.ica.seed = seed_chain(seed, 0x15A);
  const IsaResult isa = solve_isa(innov, dims.d, dims.M, iopts);
  res.timings.isa_ms = ms_since(t0);
  res.ica_iterations = isa.ica_iterations;
  res.grouping_objective = isa.grouping_objective;
  res.ica_converged = isa.ica_converged;
  res.pca_ill_separated = isa.pca_ill_separated;

  res.demixer = compose_demixer(isa.w_isa, isa.w_pca, ar);
  res.estimates = apply_fir(res.demixer, xc).trimmed();

  if (ground_truth) {
    res.g_matrix = global_matrix(isa.w_isa, isa.w_pca,
                                 ground_truth->ground_truth_h0, dims.d);
    if (dims.M >= 2) res.amari = amari_index(*res.g_matrix);
  }
  res.timings.total_ms = ms_since(t_total);
  return res;
}

DeconvResult tcc_deconvolve(const TimeSeries& x, const ModelDims& dims,
                            std::uint64_t seed, const Scene* ground_truth) {
  dims.validate();
  if (x.dim() != dims.D_x)
    throw DimensionError("tcc_deconvolve: observation dim != D_x");
  const auto t_total = Clock::now();
  DeconvResult res;
  res.method = Method::TCC;

  const int depth = tcc_stacking_depth(dims);
  res.stacking_depth = depth;
  const int stacked_components = dims.M * (dims.L + depth);
  const Eigen::Index stacked_dim = static_cast<Eigen::Index>(dims.D_x) * depth;
  const Eigen::Index hidden_dim = static_cast<Eigen::Index>(dims.D_s()) * (dims.L + depth);
  if (stacked_dim < hidden_dim)
    throw DataError("tcc: stacking bookkeeping violated");

  const TimeSeries xc = centered(x);
  const Eigen::Index T = xc.len();
  // Concatenation cuts the time axis into length-depth blocks: the stacked
  // samples X(tau_k) = [x(tau_k); ...; x(tau_k - depth + 1)] are decimated by
  // the depth, so the associated ISA task sees floor(T / depth) draws.
  const Eigen::Index n_st = T / depth;
  if (n_st < hidden_dim + 1) throw DataError("tcc: series too short to stack");
  Eigen::MatrixXd stacked(stacked_dim, n_st);
  for (Eigen::Index k = 0; k < n_st; ++k) {
    const Eigen::Index t = depth - 1 + k * depth;
    for (int i = 0; i < depth; ++i)
      stacked.col(k).segment(static_cast<Eigen::Index>(i) * dims.D_x, dims.D_x) =
          xc.values.col(t - i);
  }
  // column k is clean once its oldest entry x(k*depth) clears the warm-up
  const Eigen::Index stacked_transient =
      std::min(n_st, (xc.transient + depth - 1) / depth);
  const TimeSeries stacked_ts(std::move(stacked), stacked_transient);

  auto t0 = Clock::now();
  IsaOptions iopts;
  iopts.ica.seed = seed_chain(seed, 0x7CC);
  const IsaResult isa = solve_isa(stacked_ts, dims.d, stacked_components, iopts);
  res.timings.isa_ms = ms_since(t0);
  res.ica_iterations = isa.ica_iterations;
  res.grouping_objective = isa.grouping_objective;
  res.ica_converged = isa.ica_converged;
  res.pca_ill_separated = isa.pca_ill_separated;

  // Lag-0 proxy: the whitened innovation spans the instantaneous source
  // directions, and only lag-0 subspaces depend on it.
  t0 = Clock::now();
  const ArModel ar = fit_ar(xc, 0, 2 * (dims.L + 1));
  const TimeSeries innov = innovation(xc, ar);
  const PcaResult innov_pca = pca_whiten(innov, dims.D_s());
  res.timings.ar_ms = ms_since(t0);
  res.ar_order = ar.order;

  // align on absolute time: stacked column k is t = depth - 1 + k*depth,
  // innovation column c is t = c + Q
  Eigen::Index k0 = stacked_ts.transient;
  while (k0 < n_st && depth - 1 + k0 * depth <
                          ar.order + innov_pca.whitened.transient)
    ++k0;
  const Eigen::Index n_common = n_st - k0;
  if (n_common < 2) throw DataError("tcc: no overlap for lag-0 selection");
  const Eigen::MatrixXd y_common = isa.components.values.rightCols(n_common);
  Eigen::MatrixXd z_common(dims.D_s(), n_common);
  for (Eigen::Index k = k0; k < n_st; ++k)
    z_common.col(k - k0) =
        innov_pca.whitened.values.col(depth - 1 + k * depth - ar.order);

  const Eigen::MatrixXd affinity_matrix = cross_dependence(y_common, z_common);
  struct Ranked {
    double affinity;
    double linear_mass;
    int index;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(static_cast<std::size_t>(stacked_components));
  Eigen::MatrixXd yc = y_common;
  yc.colwise() -= yc.rowwise().mean().eval();
  Eigen::MatrixXd zc = z_common;
  zc.colwise() -= zc.rowwise().mean().eval();
  const Eigen::MatrixXd cross_cov =
      yc * zc.transpose() / static_cast<double>(n_common);
  for (int k = 0; k < stacked_components; ++k) {
    const auto rows = static_cast<Eigen::Index>(k) * dims.d;
    ranked.push_back(
        {affinity_matrix.middleRows(rows, dims.d).sum(),
         cross_cov.middleRows(rows, dims.d).norm(), k});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.affinity != b.affinity) return a.affinity > b.affinity;
    if (a.linear_mass != b.linear_mass) return a.linear_mass > b.linear_mass;
    return a.index < b.index;
  });
  std::vector<int> selected(static_cast<std::size_t>(dims.M));
  for (int m = 0; m < dims.M; ++m) selected[static_cast<std::size_t>(m)] = ranked[static_cast<std::size_t>(m)].index;
  std::sort(selected.begin(), selected.end());

  // demixer rows of the selected subspaces, sliced back into FIR taps
  const Eigen::MatrixXd w_full = isa.w_isa * isa.w_pca;  // hidden_dim x stacked_dim
  Eigen::MatrixXd w_sel(dims.D_s(), stacked_dim);
  for (int m = 0; m < dims.M; ++m)
    w_sel.middleRows(static_cast<Eigen::Index>(m) * dims.d, dims.d) =
        w_full.middleRows(static_cast<Eigen::Index>(selected[static_cast<std::size_t>(m)]) * dims.d,
                          dims.d);
  std::vector<Eigen::MatrixXd> taps;
  taps.reserve(static_cast<std::size_t>(depth));
  for (int l = 0; l < depth; ++l)
    taps.push_back(w_sel.middleCols(static_cast<Eigen::Index>(l) * dims.D_x, dims.D_x));
  res.demixer = FirFilter(std::move(taps));

  // dense estimates from the learned demixer, trimmed to t >= max(Q, L + depth)
  const Eigen::Index trim_t = std::max<Eigen::Index>(
      {static_cast<Eigen::Index>(ar.order),
       static_cast<Eigen::Index>(dims.L) + depth,
       xc.transient + depth - 1});
  if (trim_t >= T) throw DataError("tcc: nothing left after transient trimming");
  TimeSeries dense = apply_fir(res.demixer, xc);
  res.estimates = TimeSeries(dense.values.rightCols(T - trim_t), 0);

  if (ground_truth) {
    const Eigen::MatrixXd h_stack = stacked_mixing(ground_truth->mixing, depth);
    const Eigen::MatrixXd g_full = w_full * h_stack;  // hidden_dim square
    if (stacked_components >= 2)
      res.amari_stacked = amari_index(GlobalMatrix(g_full, dims.d));
    Eigen::MatrixXd g_sel(dims.D_s(), dims.D_s());
    for (int m = 0; m < dims.M; ++m)
      g_sel.middleRows(static_cast<Eigen::Index>(m) * dims.d, dims.d) =
          g_full
              .middleRows(
                  static_cast<Eigen::Index>(selected[static_cast<std::size_t>(m)]) * dims.d,
                  dims.d)
              .leftCols(dims.D_s());
    res.g_matrix = GlobalMatrix(std::move(g_sel), dims.d);
    if (dims.M >= 2) res.amari = amari_index(*res.g_matrix);
  }
  res.timings.total_ms = ms_since(t_total);
  return res;
}

DeconvResult deconvolve(Method method, const TimeSeries& x, const ModelDims& dims,
                        std::uint64_t seed, const Scene* ground_truth) {
  return method == Method::LPA ? lpa_deconvolve(x, dims, seed, ground_truth)
                               : tcc_deconvolve(x, dims, seed, ground_truth);
}

}  // namespace ubssd
