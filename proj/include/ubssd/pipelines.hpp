#pragma once

#include "ubssd/arfit.hpp"
#include "ubssd/datagen.hpp"
#include "ubssd/isa.hpp"
#include "ubssd/metrics.hpp"
#include "ubssd/types.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace ubssd {

enum class Method { LPA, TCC };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct StageTimings {
  double ar_ms = 0.0;
  double isa_ms = 0.0;
  double total_ms = 0.0;
};

struct DeconvResult {
  Method method = Method::LPA;
  TimeSeries estimates;            // transient already trimmed
  FirFilter demixer;               // W_uBSSD[z] (LPA) / stacked demixer rows (TCC)
  std::optional<GlobalMatrix> g_matrix;  // when ground truth H_0 was supplied
  std::optional<double> amari;
  StageTimings timings;
  // stage diagnostics
  int ar_order = 0;
  int ica_iterations = 0;
  double grouping_objective = 0.0;
  bool ica_converged = true;
  bool pca_ill_separated = false;
  // TCC bookkeeping
  int stacking_depth = 0;               // L'
  std::optional<double> amari_stacked;  // Amari of the full stacked G
};

/// Linear predictive approximation: AR fit (orders 0..2(L+1)), innovation,
/// ISA on the innovation, and the composed demixer applied to x.
DeconvResult lpa_deconvolve(const TimeSeries& x, const ModelDims& dims,
                            std::uint64_t seed,
                            const Scene* ground_truth = nullptr);

/// Temporal-concatenation baseline: stack L' lagged copies of x, solve the
/// larger ISA task, then pick the lag-0 subspaces by their dependence
/// affinity to the whitened innovation.
DeconvResult tcc_deconvolve(const TimeSeries& x, const ModelDims& dims,
                            std::uint64_t seed,
                            const Scene* ground_truth = nullptr);

DeconvResult deconvolve(Method method, const TimeSeries& x,
                        const ModelDims& dims, std::uint64_t seed,
                        const Scene* ground_truth = nullptr);

/// Smallest stacking depth L' >= 1 with D_x L' >= D_s (L + L'); throws when
/// no depth up to `max_depth` works.
int tcc_stacking_depth(const ModelDims& dims, int max_depth = 1024);

}  // namespace ubssd
