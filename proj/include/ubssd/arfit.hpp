#pragma once

#include "ubssd/types.hpp"

#include <utility>
#include <vector>

namespace ubssd {

/// Fitted multivariate AR(Q) model: x(t) ~ sum_{q=1..Q} A_q x(t-q) + e(t).
/// Realizes the whitening polynomial W_ar[z] = I - sum_q A_q z^-q.
struct ArModel {
  int order = 0;                          // Q
  std::vector<Eigen::MatrixXd> coeffs;    // A_1..A_Q, each D x D
  Eigen::MatrixXd noise_cov;              // residual covariance at Q
  std::vector<std::pair<int, double>> sbc_curve;  // (order, criterion)
  bool regularized = false;  // ridge fallback was needed

  Eigen::Index dim() const { return noise_cov.rows(); }
};

/// Least-squares AR fit over orders [q_min, q_max] with Schwarz's Bayesian
/// Criterion selecting the order. One QR factorization of the full-order
/// regressor serves every candidate order; the effective sample count
/// T' = T - max(q_max, transient) is shared so criterion values compare.
/// Input is expected mean-free (no intercept is fitted).
ArModel fit_ar(const TimeSeries& x, int q_min, int q_max);

/// x~(t) = x(t) - sum_q A_q x(t-q) for t > Q; output length shrinks by Q.
TimeSeries innovation(const TimeSeries& x, const ArModel& model);

}  // namespace ubssd
