#include "ubssd/types.hpp"

namespace ubssd {

TimeSeries::TimeSeries(Eigen::MatrixXd v, Eigen::Index transient_samples)
    : values(std::move(v)), transient(transient_samples) {
  if (values.rows() < 1 || values.cols() < 1)
    throw DimensionError("TimeSeries requires dim >= 1 and len >= 1");
  if (!values.allFinite())
    throw DataError("TimeSeries contains NaN or Inf");
  if (transient < 0) throw DimensionError("negative transient count");
  if (transient > values.cols()) transient = values.cols();
}

TimeSeries TimeSeries::trimmed() const {
  if (transient == 0) return *this;
  if (effective_len() < 1)
    throw DataError("series is all transient; nothing left after trimming");
  return TimeSeries(values.rightCols(effective_len()), 0);
}

FirFilter::FirFilter(std::vector<Eigen::MatrixXd> t) : taps(std::move(t)) {
  if (taps.empty()) throw DimensionError("FirFilter requires at least one tap");
  const auto r = taps.front().rows();
  const auto c = taps.front().cols();
  if (r < 1 || c < 1) throw DimensionError("FirFilter taps must be non-empty");
  for (const auto& tap : taps) {
    if (tap.rows() != r || tap.cols() != c)
      throw DimensionError("FirFilter taps must share one shape");
    if (!tap.allFinite()) throw DataError("FirFilter tap contains NaN or Inf");
  }
}

FirFilter FirFilter::identity(Eigen::Index dim) {
  return FirFilter({Eigen::MatrixXd::Identity(dim, dim)});
}

Partition::Partition(int m, int d, std::vector<int> assign)
    : num_groups(m), group_dim(d), assignment(std::move(assign)) {
  if (m < 1 || d < 1) throw DimensionError("Partition requires M >= 1, d >= 1");
  if (static_cast<int>(assignment.size()) != m * d)
    throw DimensionError("Partition assignment must cover M*d channels");
  std::vector<int> counts(m, 0);
  for (int g : assignment) {
    if (g < 0 || g >= m) throw DimensionError("Partition group index out of range");
    ++counts[g];
  }
  for (int c : counts)
    if (c != d) throw DimensionError("every Partition group must have d members");
}

Partition Partition::contiguous(int m, int d) {
  std::vector<int> assign(static_cast<std::size_t>(m) * d);
  for (int c = 0; c < m * d; ++c) assign[c] = c / d;
  return Partition(m, d, std::move(assign));
}

std::vector<std::vector<int>> Partition::groups() const {
  std::vector<std::vector<int>> out(num_groups);
  for (int c = 0; c < dim(); ++c) out[assignment[c]].push_back(c);
  return out;
}

void ModelDims::validate() const {
  if (d < 1 || M < 1) throw DimensionError("ModelDims requires d >= 1, M >= 1");
  if (L < 0) throw DimensionError("ModelDims requires L >= 0");
  if (T < 1) throw DimensionError("ModelDims requires T >= 1");
  if (D_x <= D_s())
    throw DimensionError("undercomplete regime requires D_x > D_s");
}

}  // namespace ubssd
