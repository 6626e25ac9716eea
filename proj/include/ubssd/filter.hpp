#pragma once

#include "ubssd/types.hpp"

namespace ubssd {

struct ArModel;

/// Causal FIR convolution x(t) = sum_l H_l u(t-l), zero-padded before the
/// first sample. Output keeps the input length; its transient count grows by
/// the filter degree.
TimeSeries apply_fir(const FirFilter& filter, const TimeSeries& input);

/// Per-sample matrix product.
TimeSeries apply_linear(const LinearMap& map, const TimeSeries& input);

/// W_uBSSD[z] = W_isa * W_pca * W_ar[z] where the AR polynomial has tap 0 = I
/// and tap q = -A_q.
FirFilter compose_demixer(const LinearMap& w_isa, const LinearMap& w_pca,
                          const ArModel& w_ar);

}  // namespace ubssd
