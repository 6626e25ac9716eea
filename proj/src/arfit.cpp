#include "ubssd/arfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ubssd {
namespace {

// log det of a residual covariance; eigenvalues are floored so that a
// numerically singular matrix yields a large negative value instead of -inf.
double logdet_spd(const Eigen::MatrixXd& c) {
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() == Eigen::Success) {
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  const double floor = 1e-15 * std::max(c.trace(), std::numeric_limits<double>::min());
  return es.eigenvalues().cwiseMax(floor).array().log().sum();
}

}  // namespace

ArModel fit_ar(const TimeSeries& x, int q_min, int q_max) {
  if (q_min < 0 || q_max < q_min)
    throw DimensionError("fit_ar requires 0 <= q_min <= q_max");
  const Eigen::Index D = x.dim();
  const Eigen::Index T = x.len();
  // Predicted rows start where no regressor reaches into the warm-up region.
  const Eigen::Index presamples = x.transient + q_max;
  const Eigen::Index n = T - presamples;  // effective sample count T'
  if (n < static_cast<Eigen::Index>(q_max) * D + D + 1)
    throw DataError("fit_ar: not enough samples for the requested order range");

  const Eigen::Index m = static_cast<Eigen::Index>(q_max) * D;

  // Augmented regression matrix [x(t-1)' ... x(t-q_max)' | x(t)'] for
  // t = presamples..T-1. One QR serves all candidate orders: regressing on
  // the first q*D columns leaves residual cross-products equal to the sum of
  // outer products of the R rows below q*D in the response columns.
  Eigen::MatrixXd a(n, m + D);
  for (Eigen::Index q = 1; q <= q_max; ++q)
    a.middleCols((q - 1) * D, D) =
        x.values.middleCols(presamples - q, n).transpose();
  a.rightCols(D) = x.values.middleCols(presamples, n).transpose();

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd r =
      qr.matrixQR().topRows(m + D).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_y = r.rightCols(D);

  // Residual cross-products per order, accumulated bottom-up.
  std::vector<Eigen::MatrixXd> resid(static_cast<std::size_t>(q_max) + 1);
  Eigen::MatrixXd acc = r_y.bottomRows(D).transpose() * r_y.bottomRows(D);
  resid[static_cast<std::size_t>(q_max)] = acc;
  for (int q = q_max - 1; q >= 0; --q) {
    const Eigen::MatrixXd rows = r_y.middleRows(static_cast<Eigen::Index>(q) * D, D);
    acc += rows.transpose() * rows;
    resid[static_cast<std::size_t>(q)] = acc;
  }

  ArModel model;
  const double log_n = std::log(static_cast<double>(n));
  int best_q = q_min;
  double best_sbc = std::numeric_limits<double>::infinity();
  for (int q = q_min; q <= q_max; ++q) {
    const Eigen::MatrixXd sigma = resid[static_cast<std::size_t>(q)] / static_cast<double>(n);
    const double sbc = logdet_spd(sigma) +
                       log_n * static_cast<double>(q) * static_cast<double>(D * D) /
                           static_cast<double>(n);
    model.sbc_curve.emplace_back(q, sbc);
    if (sbc < best_sbc) {
      best_sbc = sbc;
      best_q = q;
    }
  }

  model.order = best_q;
  model.noise_cov = resid[static_cast<std::size_t>(best_q)] / static_cast<double>(n);
  model.noise_cov = 0.5 * (model.noise_cov + model.noise_cov.transpose()).eval();

  if (best_q > 0) {
    const Eigen::Index k = static_cast<Eigen::Index>(best_q) * D;
    const Eigen::MatrixXd r11 = r.topLeftCorner(k, k);
    const Eigen::VectorXd diag = r11.diagonal().cwiseAbs();
    Eigen::MatrixXd b;  // k x D, stacked [A_1'; ...; A_Q']
    if (diag.minCoeff() > 1e-12 * diag.maxCoeff()) {
      b = r11.triangularView<Eigen::Upper>().solve(r_y.topRows(k));
    } else {
      // near-singular regressor: ridge on the normal equations
      Eigen::MatrixXd gram = r11.transpose() * r11;
      const double ridge = 1e-10 * gram.diagonal().mean();
      gram.diagonal().array() += ridge;
      b = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(r11.transpose() * r_y.topRows(k));
      model.regularized = true;
    }
    model.coeffs.reserve(static_cast<std::size_t>(best_q));
    for (int q = 0; q < best_q; ++q)
      model.coeffs.push_back(b.middleRows(static_cast<Eigen::Index>(q) * D, D).transpose());
  }
  return model;
}

TimeSeries innovation(const TimeSeries& x, const ArModel& model) {
  if (model.order > 0 && x.dim() != model.dim())
    throw DimensionError("innovation: model dimension does not match series");
  const int Q = model.order;
  if (Q == 0) return x;
  const Eigen::Index T = x.len();
  if (T <= Q) throw DataError("innovation: series shorter than the AR order");
  const Eigen::Index n = T - Q;
  Eigen::MatrixXd out = x.values.rightCols(n);
  for (int q = 1; q <= Q; ++q)
    out.noalias() -= model.coeffs[static_cast<std::size_t>(q) - 1] *
                     x.values.middleCols(Q - q, n);
  // Column c holds time t = Q + c; it is clean once its oldest regressor
  // x(t - Q) = x(c) sits past the warm-up region.
  return TimeSeries(std::move(out), std::min(x.transient, n));
}

}  // namespace ubssd
