#include "ubssd/experiment.hpp"

#include "ubssd/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace ubssd {

using nlohmann::json;

int ExperimentConfig::resolve_dx() const {
  if (dx_fixed > 0) return dx_fixed;
  return dx_factor * source.d * source.M;
}

void ExperimentConfig::validate() const {
  if (t_values.empty()) throw DataError("config: T list is empty");
  if (!std::is_sorted(t_values.begin(), t_values.end()))
    throw DataError("config: T list must be ascending");
  if (l_values.empty()) throw DataError("config: L list is empty");
  for (int l : l_values)
    if (l < 0) throw DataError("config: L must be >= 0");
  if (seeds < 1) throw DataError("config: seeds must be >= 1");
  if (methods.empty()) throw DataError("config: methods is empty");
  if (resolve_dx() <= source.d * source.M)
    throw DataError("config: D_x must exceed D_s");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<long> parse_t_list(const std::string& value) {
  if (value.rfind("log:", 0) == 0) {
    const auto parts = split(value.substr(4), ':');
    if (parts.size() != 3) throw DataError("config: log grid needs log:lo:hi:n");
    const double lo = std::stod(parts[0]);
    const double hi = std::stod(parts[1]);
    const int n = std::stoi(parts[2]);
    if (lo <= 0 || hi < lo || n < 1) throw DataError("config: bad log grid");
    std::vector<long> ts;
    for (int i = 0; i < n; ++i) {
      const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      ts.push_back(std::lround(lo * std::pow(hi / lo, f)));
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
  }
  std::vector<long> ts;
  for (const auto& v : split(value, ',')) ts.push_back(std::stol(v));
  return ts;
}

std::string cell_file_name(long T, int L, int seed_index, Method method) {
  return "T" + std::to_string(T) + "_L" + std::to_string(L) + "_s" +
         std::to_string(seed_index) + "_" + to_string(method) + ".json";
}

json cell_to_json(const ExperimentConfig& cfg, const CellResult& c) {
  json j;
  j["database"] = to_string(cfg.source.kind);
  j["d"] = cfg.source.d;
  j["M"] = cfg.source.M;
  j["Dx"] = cfg.resolve_dx();
  j["T"] = c.T;
  j["L"] = c.L;
  j["seed_index"] = c.seed_index;
  j["cell_seed"] = c.cell_seed;
  j["method"] = to_string(c.method);
  j["ok"] = c.ok;
  if (!c.ok) j["error"] = c.error;
  j["amari"] = c.amari;
  if (c.amari_stacked) j["amari_stacked"] = *c.amari_stacked;
  j["ar_order"] = c.ar_order;
  j["ica_iterations"] = c.ica_iterations;
  j["ica_converged"] = c.ica_converged;
  j["ar_ms"] = c.ar_ms;
  j["isa_ms"] = c.isa_ms;
  j["wall_ms"] = c.wall_ms;
  return j;
}

CellResult cell_from_json(const json& j) {
  CellResult c;
  c.T = j.at("T").get<long>();
  c.L = j.at("L").get<int>();
  c.seed_index = j.at("seed_index").get<int>();
  c.cell_seed = j.at("cell_seed").get<std::uint64_t>();
  c.method = parse_method(j.at("method").get<std::string>());
  c.ok = j.at("ok").get<bool>();
  if (j.contains("error")) c.error = j["error"].get<std::string>();
  c.amari = j.at("amari").get<double>();
  if (j.contains("amari_stacked")) c.amari_stacked = j["amari_stacked"].get<double>();
  c.ar_order = j.value("ar_order", 0);
  c.ica_iterations = j.value("ica_iterations", 0);
  c.ica_converged = j.value("ica_converged", true);
  c.ar_ms = j.value("ar_ms", 0.0);
  c.isa_ms = j.value("isa_ms", 0.0);
  c.wall_ms = j.value("wall_ms", 0.0);
  return c;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  bool have_d = false, have_m = false;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("config: expected key = value, got: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "database") {
      cfg.source.kind = parse_source_kind(value);
    } else if (key == "d") {
      cfg.source.d = std::stoi(value);
      have_d = true;
    } else if (key == "M") {
      cfg.source.M = std::stoi(value);
      have_m = true;
    } else if (key == "dx") {
      const auto star = value.find('*');
      if (star != std::string::npos) {
        cfg.dx_factor = std::stoi(trim(value.substr(0, star)));
        cfg.dx_fixed = 0;
      } else {
        cfg.dx_fixed = std::stoi(value);
      }
    } else if (key == "L") {
      cfg.l_values.clear();
      for (const auto& v : split(value, ',')) cfg.l_values.push_back(std::stoi(v));
    } else if (key == "T") {
      cfg.t_values = parse_t_list(value);
    } else if (key == "seeds") {
      cfg.seeds = std::stoi(value);
    } else if (key == "master_seed") {
      cfg.master_seed = std::stoull(value);
    } else if (key == "methods") {
      cfg.methods.clear();
      for (const auto& v : split(value, ',')) cfg.methods.push_back(parse_method(v));
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "images") {
      cfg.source.image_paths.clear();
      for (const auto& v : split(value, ',')) cfg.source.image_paths.emplace_back(v);
    } else if (key == "audio") {
      cfg.source.audio_paths.clear();
      for (const auto& v : split(value, ',')) cfg.source.audio_paths.emplace_back(v);
    } else if (key == "offset") {
      cfg.source.audio_offset = std::stol(value);
    } else {
      throw DataError("config: unknown key: " + key);
    }
  }
  // database presets for the fixed layouts
  if (cfg.source.kind == SourceKind::geom3d) cfg.source.d = 3;
  if (cfg.source.kind == SourceKind::letters) { cfg.source.d = 2; cfg.source.M = 2; }
  if (cfg.source.kind == SourceKind::image_density && !have_d) cfg.source.d = 2;
  if (cfg.source.kind == SourceKind::audio && !have_d) cfg.source.d = 2;
  if (cfg.source.kind == SourceKind::audio && !have_m && !cfg.source.audio_paths.empty())
    cfg.source.M = static_cast<int>(cfg.source.audio_paths.size());
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open config: " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str());
}

std::uint64_t cell_seed(std::uint64_t master, long T, int L, int seed_index) {
  return seed_chain(master, static_cast<std::uint64_t>(T),
                    static_cast<std::uint64_t>(L),
                    static_cast<std::uint64_t>(seed_index));
}

CellResult run_cell(const ExperimentConfig& cfg, long T, int L, int seed_index,
                    Method method) {
  CellResult cell;
  cell.T = T;
  cell.L = L;
  cell.seed_index = seed_index;
  cell.method = method;
  cell.cell_seed = cell_seed(cfg.master_seed, T, L, seed_index);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    SourceSpec spec = cfg.source;
    spec.T = T;
    ModelDims dims{spec.d, spec.M, cfg.resolve_dx(), L, T};
    const Scene scene = make_scene(spec, dims, cell.cell_seed);
    const auto method_seed = seed_chain(cell.cell_seed, method == Method::LPA ? 1u : 2u);
    const DeconvResult r =
        deconvolve(method, scene.observation, dims, method_seed, &scene);
    if (!r.amari) throw DataError("cell produced no Amari index");
    cell.amari = *r.amari;
    cell.amari_stacked = r.amari_stacked;
    cell.ar_order = r.ar_order;
    cell.ica_iterations = r.ica_iterations;
    cell.ica_converged = r.ica_converged;
    cell.ar_ms = r.timings.ar_ms;
    cell.isa_ms = r.timings.isa_ms;
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = e.what();
  }
  cell.wall_ms = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
  return cell;
}

SweepOutcome run_sweep(const ExperimentConfig& cfg, bool resume, int jobs) {
  cfg.validate();
  const auto cells_dir = cfg.out_dir / "cells";
  std::filesystem::create_directories(cells_dir);

  struct CellKey {
    long T;
    int L;
    int seed_index;
    Method method;
  };
  std::vector<CellKey> keys;
  for (int L : cfg.l_values)
    for (long T : cfg.t_values)
      for (int s = 0; s < cfg.seeds; ++s)
        for (Method m : cfg.methods) keys.push_back({T, L, s, m});

  std::vector<CellResult> results(keys.size());
  std::atomic<std::size_t> next{0};
  const int workers = jobs > 0 ? jobs
                               : std::max(1u, std::thread::hardware_concurrency());

  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= keys.size()) return;
      const auto& k = keys[i];
      const auto file = cells_dir / cell_file_name(k.T, k.L, k.seed_index, k.method);
      if (resume && std::filesystem::exists(file)) {
        try {
          std::ifstream is(file);
          json j;
          is >> j;
          results[i] = cell_from_json(j);
          continue;
        } catch (const std::exception&) {
          // unreadable record: recompute below
        }
      }
      results[i] = run_cell(cfg, k.T, k.L, k.seed_index, k.method);
      const auto tmp = file.string() + ".tmp";
      {
        std::ofstream os(tmp);
        os << cell_to_json(cfg, results[i]).dump(2) << '\n';
      }
      std::filesystem::rename(tmp, file);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  SweepOutcome outcome;
  for (int L : cfg.l_values)
    for (Method m : cfg.methods)
      for (long T : cfg.t_values) {
        RunRecord rec;
        rec.T = T;
        rec.L = L;
        rec.method = m;
        for (std::size_t i = 0; i < keys.size(); ++i) {
          const auto& k = keys[i];
          if (k.T != T || k.L != L || k.method != m) continue;
          if (results[i].ok) {
            rec.per_seed.push_back(results[i].amari);
            rec.wall_ms += results[i].wall_ms;
          } else {
            ++outcome.failed_cells;
          }
        }
        if (!rec.per_seed.empty()) {
          const double n = static_cast<double>(rec.per_seed.size());
          for (double v : rec.per_seed) rec.mean += v;
          rec.mean /= n;
          if (rec.per_seed.size() > 1) {
            double ss = 0.0;
            for (double v : rec.per_seed) ss += (v - rec.mean) * (v - rec.mean);
            rec.stddev = std::sqrt(ss / (n - 1.0));
          }
        }
        outcome.records.push_back(std::move(rec));
      }

  // quotient of the mean Amari indices where both methods ran
  for (auto& rec : outcome.records) {
    if (rec.per_seed.empty()) continue;
    const Method other = rec.method == Method::LPA ? Method::TCC : Method::LPA;
    for (const auto& o : outcome.records) {
      if (o.T != rec.T || o.L != rec.L || o.method != other || o.per_seed.empty())
        continue;
      const RunRecord& tcc = rec.method == Method::TCC ? rec : o;
      const RunRecord& lpa = rec.method == Method::TCC ? o : rec;
      if (lpa.mean > 0.0) rec.quotient = tcc.mean / lpa.mean;
    }
  }

  std::sort(outcome.records.begin(), outcome.records.end(),
            [](const RunRecord& a, const RunRecord& b) {
              if (a.L != b.L) return a.L < b.L;
              if (a.method != b.method) return a.method < b.method;
              return a.T < b.T;
            });
  return outcome;
}

void write_report(const std::vector<RunRecord>& records,
                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<const RunRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const RunRecord* a, const RunRecord* b) {
    if (a->L != b->L) return a->L < b->L;
    if (a->method != b->method) return a->method < b->method;
    return a->T < b->T;
  });

  {
    std::ofstream os(out_dir / "results.csv", std::ios::binary);
    os << "T,L,method,mean_r,std_r,quotient\r\n";
    for (const auto* r : sorted) {
      os << r->T << ',' << r->L << ',' << to_string(r->method) << ',';
      if (r->per_seed.empty())
        os << "NA,NA";
      else
        os << format_double(r->mean) << ',' << format_double(r->stddev);
      os << ',';
      os << (r->quotient ? format_double(*r->quotient) : "NA");
      os << "\r\n";
    }
  }
  {
    std::ofstream os(out_dir / "loglog.dat", std::ios::binary);
    os << "# Amari index vs sample count, one block per (L, method); log-log axes\n";
    int last_l = -1;
    Method last_m = Method::LPA;
    bool first = true;
    for (const auto* r : sorted) {
      if (r->per_seed.empty()) continue;
      if (first || r->L != last_l || r->method != last_m) {
        if (!first) os << "\n\n";
        os << "# L=" << r->L << " method=" << to_string(r->method) << "\n";
        last_l = r->L;
        last_m = r->method;
        first = false;
      }
      os << r->T << ' ' << format_double(r->mean) << '\n';
    }
  }
}

SlopeFit loglog_slope(const std::vector<RunRecord>& records, int L, Method method) {
  std::vector<double> xs, ys;
  for (const auto& r : records) {
    if (r.L != L || r.method != method || r.per_seed.empty() || r.mean <= 0.0)
      continue;
    xs.push_back(std::log(static_cast<double>(r.T)));
    ys.push_back(std::log(r.mean));
  }
  SlopeFit fit;
  fit.n = static_cast<int>(xs.size());
  if (fit.n < 3) return fit;
  const double n = static_cast<double>(fit.n);
  double mx = 0, my = 0;
  for (int i = 0; i < fit.n; ++i) {
    mx += xs[static_cast<std::size_t>(i)];
    my += ys[static_cast<std::size_t>(i)];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < fit.n; ++i) {
    const double dx = xs[static_cast<std::size_t>(i)] - mx;
    sxx += dx * dx;
    sxy += dx * (ys[static_cast<std::size_t>(i)] - my);
  }
  fit.slope = sxy / sxx;
  double sse = 0;
  for (int i = 0; i < fit.n; ++i) {
    const double resid = ys[static_cast<std::size_t>(i)] - my -
                         fit.slope * (xs[static_cast<std::size_t>(i)] - mx);
    sse += resid * resid;
  }
  fit.stderr_slope = std::sqrt(sse / (n - 2.0) / sxx);
  return fit;
}

}  // namespace ubssd
