#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace ubssd {

/// Instantaneous linear map acting per-sample (rows x cols dense matrix).
using LinearMap = Eigen::MatrixXd;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// D-channel real signal over T integer time steps, stored channels x samples.
/// `transient` counts leading warm-up samples produced by causal filtering;
/// every statistic computed downstream skips them.
struct TimeSeries {
  Eigen::MatrixXd values;  // dim x len
  Eigen::Index transient = 0;

  TimeSeries() = default;
  explicit TimeSeries(Eigen::MatrixXd v, Eigen::Index transient_samples = 0);

  Eigen::Index dim() const { return values.rows(); }
  Eigen::Index len() const { return values.cols(); }
  Eigen::Index effective_len() const { return values.cols() - transient; }

  /// Columns past the warm-up region.
  Eigen::Ref<const Eigen::MatrixXd> effective() const {
    return values.rightCols(values.cols() - transient);
  }

  /// Copy with the warm-up columns removed.
  TimeSeries trimmed() const;
};

/// Causal polynomial matrix H[z] = sum_{l=0..L} taps[l] z^-l.
/// All taps share one rows x cols shape; degree L = taps.size()-1 >= 0.
struct FirFilter {
  std::vector<Eigen::MatrixXd> taps;

  FirFilter() = default;
  explicit FirFilter(std::vector<Eigen::MatrixXd> t);

  static FirFilter identity(Eigen::Index dim);

  Eigen::Index degree() const {
    return static_cast<Eigen::Index>(taps.size()) - 1;
  }
  Eigen::Index rows() const { return taps.front().rows(); }
  Eigen::Index cols() const { return taps.front().cols(); }
};

/// Assignment of M*d scalar channels into M groups of size d.
struct Partition {
  int num_groups = 0;
  int group_dim = 0;
  std::vector<int> assignment;  // channel index -> group index

  Partition() = default;
  Partition(int m, int d, std::vector<int> assign);

  /// Groups 0..M-1 laid out contiguously: channel c belongs to group c/d.
  static Partition contiguous(int m, int d);

  int dim() const { return num_groups * group_dim; }

  /// Member channel indices per group, each list ascending.
  std::vector<std::vector<int>> groups() const;

  bool operator==(const Partition&) const = default;
};

/// Problem dimensions of one deconvolution instance.
struct ModelDims {
  int d = 0;   // dimension of one hidden component
  int M = 0;   // number of hidden components
  int D_x = 0; // observation channels
  int L = 0;   // mixing filter degree (L+1 taps)
  long T = 0;  // sample count

  int D_s() const { return d * M; }

  /// Throws unless the instance is sane and strictly undercomplete.
  void validate() const;
};

}  // namespace ubssd
