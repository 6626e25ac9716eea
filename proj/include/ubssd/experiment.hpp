#pragma once

#include "ubssd/datagen.hpp"
#include "ubssd/pipelines.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ubssd {

/// Sweep description: databases x T grid x L grid x seeds x methods.
struct ExperimentConfig {
  SourceSpec source;               // kind, d, M, assets (T filled per cell)
  std::vector<long> t_values;      // ascending
  std::vector<int> l_values;
  int dx_factor = 2;               // D_x = dx_factor * D_s when dx_fixed == 0
  int dx_fixed = 0;
  int seeds = 50;
  std::uint64_t master_seed = 1;
  std::vector<Method> methods = {Method::LPA};
  std::filesystem::path out_dir = "out";

  int resolve_dx() const;
  void validate() const;
};

/// Parses the key=value config format ('#' comments, commas for lists,
/// "log:<lo>:<hi>:<n>" for a log-spaced T grid).
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// One (T, L, seed, method) evaluation.
struct CellResult {
  long T = 0;
  int L = 0;
  int seed_index = 0;
  std::uint64_t cell_seed = 0;
  Method method = Method::LPA;
  bool ok = false;
  std::string error;
  double amari = 0.0;
  std::optional<double> amari_stacked;
  int ar_order = 0;
  int ica_iterations = 0;
  bool ica_converged = true;
  double ar_ms = 0.0;
  double isa_ms = 0.0;
  double wall_ms = 0.0;
};

/// Aggregated per (T, L, method); mean/std recomputable from per_seed.
struct RunRecord {
  long T = 0;
  int L = 0;
  Method method = Method::LPA;
  std::vector<double> per_seed;  // Amari indices, seed order
  double mean = 0.0;
  double stddev = 0.0;           // sample deviation
  std::optional<double> quotient;  // mean_TCC / mean_LPA at this (T, L)
  double wall_ms = 0.0;
};

std::uint64_t cell_seed(std::uint64_t master, long T, int L, int seed_index);

CellResult run_cell(const ExperimentConfig& cfg, long T, int L, int seed_index,
                    Method method);

struct SweepOutcome {
  std::vector<RunRecord> records;  // sorted by (L, method, T)
  int failed_cells = 0;
};

/// Runs every cell, persisting one JSON record per cell under
/// out_dir/cells/; with resume=true, cells whose record already exists are
/// loaded instead of recomputed. Cells run on `jobs` workers; aggregates are
/// independent of the schedule.
SweepOutcome run_sweep(const ExperimentConfig& cfg, bool resume = false,
                       int jobs = 0);

/// results.csv (T, L, method, mean_r, std_r, quotient) plus a gnuplot-ready
/// log-log data file. Deterministic bytes for a given record set.
void write_report(const std::vector<RunRecord>& records,
                  const std::filesystem::path& out_dir);

/// Least-squares slope of log(mean_r) on log(T) for one (L, method) track;
/// also returns the standard error of the slope.
struct SlopeFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  int n = 0;
};
SlopeFit loglog_slope(const std::vector<RunRecord>& records, int L, Method method);

}  // namespace ubssd
