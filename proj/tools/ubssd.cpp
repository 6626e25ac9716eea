// Benchmark harness for undercomplete blind subspace deconvolution.
//
// Subcommands:
//   gen     generate one scene and write its series to disk
//   run     evaluate a single (T, L, seed, method) cell
//   sweep   run the full T x L x seed x method grid with resume support
//   report  aggregate cell records into results.csv and loglog.dat

#include "ubssd/experiment.hpp"
#include "ubssd/serialize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace ubssd;

namespace {

std::vector<Method> parse_methods_flag(const std::string& methods) {
  std::vector<Method> out;
  std::stringstream ss(methods);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_method(item));
  return out;
}

// reconstruct RunRecords from persisted cell files (for `report`)
std::vector<RunRecord> records_from_cells(const std::filesystem::path& out_dir) {
  const auto cells_dir = out_dir / "cells";
  if (!std::filesystem::is_directory(cells_dir))
    throw DataError("no cells directory under " + out_dir.string());
  struct Key {
    long T;
    int L;
    std::string method;
    bool operator<(const Key& o) const {
      return std::tie(L, method, T) < std::tie(o.L, o.method, o.T);
    }
  };
  std::map<Key, std::map<int, double>> acc;  // (T,L,method) -> seed -> amari
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(cells_dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream is(f);
    nlohmann::json j;
    is >> j;
    if (!j.value("ok", false)) continue;
    Key k{j.at("T").get<long>(), j.at("L").get<int>(), j.at("method").get<std::string>()};
    acc[k][j.at("seed_index").get<int>()] = j.at("amari").get<double>();
  }
  std::vector<RunRecord> records;
  for (const auto& [k, seeds] : acc) {
    RunRecord r;
    r.T = k.T;
    r.L = k.L;
    r.method = parse_method(k.method);
    for (const auto& [_, v] : seeds) r.per_seed.push_back(v);
    const double n = static_cast<double>(r.per_seed.size());
    for (double v : r.per_seed) r.mean += v;
    r.mean /= n;
    if (r.per_seed.size() > 1) {
      double ss = 0.0;
      for (double v : r.per_seed) ss += (v - r.mean) * (v - r.mean);
      r.stddev = std::sqrt(ss / (n - 1.0));
    }
    records.push_back(std::move(r));
  }
  for (auto& r : records)
    for (const auto& o : records)
      if (o.T == r.T && o.L == r.L && o.method != r.method) {
        const RunRecord& tcc = r.method == Method::TCC ? r : o;
        const RunRecord& lpa = r.method == Method::TCC ? o : r;
        if (lpa.mean > 0.0) r.quotient = tcc.mean / lpa.mean;
      }
  return records;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"undercomplete blind subspace deconvolution benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string methods_flag;
  int seeds_flag = 0;
  int jobs = 0;
  bool resume = false;

  auto* gen = app.add_subcommand("gen", "generate a scene and write its series");
  std::uint64_t gen_seed = 1;
  long gen_t = 10000;
  int gen_l = 1;
  std::string gen_format = "bin";
  gen->add_option("--config", config_path, "experiment config file")->required();
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--seed", gen_seed, "scene seed");
  gen->add_option("--T", gen_t, "sample count");
  gen->add_option("--L", gen_l, "filter degree");
  gen->add_option("--format", gen_format, "bin or csv")->check(CLI::IsMember({"bin", "csv"}));

  auto* run = app.add_subcommand("run", "evaluate one cell");
  long run_t = 10000;
  int run_l = 1;
  int run_seed_index = 0;
  std::string run_method = "lpa";
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--T", run_t, "sample count");
  run->add_option("--L", run_l, "filter degree");
  run->add_option("--seed-index", run_seed_index, "seed index");
  run->add_option("--method", run_method, "lpa or tcc")->check(CLI::IsMember({"lpa", "tcc"}));

  auto* sweep = app.add_subcommand("sweep", "run the whole experiment grid");
  sweep->add_option("--config", config_path, "experiment config file")->required();
  sweep->add_option("--seeds", seeds_flag, "override seed count");
  sweep->add_option("--methods", methods_flag, "override methods, e.g. lpa,tcc");
  sweep->add_option("--out", out_dir, "override output directory");
  sweep->add_option("--jobs", jobs, "worker threads (default: hardware)");
  sweep->add_flag("--resume", resume, "skip cells with existing records");

  auto* report = app.add_subcommand("report", "aggregate records into CSV/plot data");
  report->add_option("--out", out_dir, "sweep output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      ExperimentConfig cfg = load_config(config_path);
      SourceSpec spec = cfg.source;
      spec.T = gen_t;
      ModelDims dims{spec.d, spec.M, cfg.resolve_dx(), gen_l, gen_t};
      const Scene scene = make_scene(spec, dims, gen_seed);
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path dir(out_dir);
      if (gen_format == "bin") {
        save_binary(scene.sources, dir / "sources.bssd");
        save_binary(scene.observation, dir / "observation.bssd");
      } else {
        save_csv(scene.sources, dir / "sources.csv");
        save_csv(scene.observation, dir / "observation.csv");
      }
      nlohmann::json meta;
      meta["database"] = to_string(spec.kind);
      meta["d"] = dims.d;
      meta["M"] = dims.M;
      meta["Dx"] = dims.D_x;
      meta["L"] = dims.L;
      meta["T"] = dims.T;
      meta["seed"] = gen_seed;
      std::ofstream(dir / "scene.json") << meta.dump(2) << '\n';
      std::cout << "wrote scene to " << out_dir << "\n";
      return 0;
    }
    if (*run) {
      ExperimentConfig cfg = load_config(config_path);
      const CellResult cell =
          run_cell(cfg, run_t, run_l, run_seed_index, parse_method(run_method));
      nlohmann::json j;
      j["T"] = cell.T;
      j["L"] = cell.L;
      j["seed_index"] = cell.seed_index;
      j["method"] = to_string(cell.method);
      j["ok"] = cell.ok;
      if (!cell.ok) j["error"] = cell.error;
      j["amari"] = cell.amari;
      if (cell.amari_stacked) j["amari_stacked"] = *cell.amari_stacked;
      j["ar_order"] = cell.ar_order;
      j["wall_ms"] = cell.wall_ms;
      std::cout << j.dump(2) << "\n";
      return cell.ok ? 0 : 1;
    }
    if (*sweep) {
      ExperimentConfig cfg = load_config(config_path);
      if (seeds_flag > 0) cfg.seeds = seeds_flag;
      if (!methods_flag.empty()) cfg.methods = parse_methods_flag(methods_flag);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      const SweepOutcome outcome = run_sweep(cfg, resume, jobs);
      write_report(outcome.records, cfg.out_dir);
      char buf[64];
      for (const auto& r : outcome.records) {
        std::cout << "T=" << r.T << " L=" << r.L << " " << to_string(r.method)
                  << " r=";
        if (r.per_seed.empty()) {
          std::cout << "NA";
        } else {
          std::snprintf(buf, sizeof buf, "%.2f%% (+-%.2f)", 100.0 * r.mean,
                        100.0 * r.stddev);
          std::cout << buf;
        }
        std::cout << " [" << r.per_seed.size() << " seeds]\n";
      }
      if (outcome.failed_cells) {
        std::cerr << outcome.failed_cells << " cells failed\n";
        return 1;
      }
      return 0;
    }
    if (*report) {
      const auto records = records_from_cells(out_dir);
      write_report(records, out_dir);
      std::cout << "wrote results.csv and loglog.dat (" << records.size()
                << " aggregate rows)\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
