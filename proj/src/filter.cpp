#include "ubssd/filter.hpp"

#include "ubssd/arfit.hpp"

#include <algorithm>

namespace ubssd {

TimeSeries apply_fir(const FirFilter& filter, const TimeSeries& input) {
  if (filter.cols() != input.dim())
    throw DimensionError("apply_fir: filter has " + std::to_string(filter.cols()) +
                         " input columns, series has " + std::to_string(input.dim()) +
                         " channels");
  const Eigen::Index T = input.len();
  const Eigen::Index L = filter.degree();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(filter.rows(), T);
  for (Eigen::Index l = 0; l <= L; ++l) {
    if (l >= T) break;
    // out(:, l..T-1) += H_l * in(:, 0..T-1-l); samples before t=1 are zero
    out.rightCols(T - l).noalias() += filter.taps[l] * input.values.leftCols(T - l);
  }
  return TimeSeries(std::move(out), std::min(T, input.transient + L));
}

TimeSeries apply_linear(const LinearMap& map, const TimeSeries& input) {
  if (map.cols() != input.dim())
    throw DimensionError("apply_linear: map expects " + std::to_string(map.cols()) +
                         " channels, series has " + std::to_string(input.dim()));
  return TimeSeries(map * input.values, input.transient);
}

FirFilter compose_demixer(const LinearMap& w_isa, const LinearMap& w_pca,
                          const ArModel& w_ar) {
  if (w_isa.cols() != w_pca.rows() || w_pca.cols() != w_ar.dim())
    throw DimensionError("compose_demixer: shape chain mismatch");
  const Eigen::MatrixXd front = w_isa * w_pca;
  std::vector<Eigen::MatrixXd> taps;
  taps.reserve(static_cast<std::size_t>(w_ar.order) + 1);
  taps.push_back(front);  // W_ar tap 0 is the identity
  for (const auto& a : w_ar.coeffs) taps.push_back(-(front * a));
  return FirFilter(std::move(taps));
}

}  // namespace ubssd
