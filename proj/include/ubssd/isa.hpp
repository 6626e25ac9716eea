#pragma once

#include "ubssd/types.hpp"

#include <cstdint>

namespace ubssd {

struct PcaResult {
  LinearMap w_pca;          // target_dim x input_dim
  TimeSeries whitened;      // w_pca applied to the raw input
  double discarded_mass = 0.0;  // eigenvalue mass dropped / total
  bool ill_separated = false;   // spectrum gap at the cut is poor
};

/// Rank reduction + whitening from the top eigenpairs of the sample
/// covariance: W_pca = Lambda^{-1/2} U^T. The output is the pure linear image
/// of the input (no recentering), so its sample covariance is identity as
/// long as the input is mean-free.
PcaResult pca_whiten(const TimeSeries& x, int target_dim);

struct IcaOptions {
  int restarts = 5;
  int max_iter = 1000;
  double tol = 1e-10;
  std::uint64_t seed = 0;
};

struct IcaResult {
  LinearMap w;              // orthogonal demixing matrix
  int iterations = 0;       // iterations of the winning restart
  double contrast = 0.0;    // sum of squared non-Gaussianity deviations
  bool converged = true;
  bool unidentifiable = false;  // contrast flat: no non-Gaussian direction
};

/// Symmetric fixed-point ICA with tanh contrast on whitened input.
/// Multi-restart; the restart with the best contrast wins (ties go to the
/// lowest restart index), so the result is deterministic given the seed.
IcaResult ica(const TimeSeries& white, const IcaOptions& opts = {});

struct GroupingResult {
  Partition partition;      // grouping of the input channels
  LinearMap permutation;    // reorders channels so groups are contiguous
  double objective = 0.0;   // within-group dependence mass
  bool exhaustive = false;  // search mode actually used
};

/// Pairwise dependence matrix: S_ij = max over f in {u^2, |u|, tanh u} of
/// |corr(f(y_i), f(y_j))|, zero diagonal.
Eigen::MatrixXd dependence_matrix(const TimeSeries& y);

/// Partition M*d channels into M groups of size d maximizing within-group
/// dependence: exhaustive when the partition count is small, otherwise greedy
/// agglomeration refined by pairwise swap hill-climbing. force_greedy skips
/// the exhaustive path regardless of size.
GroupingResult group_components(const TimeSeries& y, int d, int m,
                                bool force_greedy = false);

struct IsaResult {
  LinearMap w_pca;          // D_s x D_x
  LinearMap w_isa;          // D_s x D_s, orthogonal
  Partition partition;      // contiguous after w_isa reordering
  TimeSeries components;    // w_isa * w_pca * input
  // diagnostics
  int ica_iterations = 0;
  double grouping_objective = 0.0;
  double discarded_mass = 0.0;
  bool ica_converged = true;
  bool ica_unidentifiable = false;
  bool pca_ill_separated = false;
};

struct IsaOptions {
  IcaOptions ica;
};

/// Full ISA on a (near-)rank-D_s input: PCA to D_s dims, ICA, then component
/// grouping. w_isa = P * W_ica with P the grouping permutation.
IsaResult solve_isa(const TimeSeries& x, int d, int m, const IsaOptions& opts = {});

}  // namespace ubssd
