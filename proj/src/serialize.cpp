#include "ubssd/serialize.hpp"

#include "ubssd/util.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ubssd {
namespace {

void put_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void put_le(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(buf, buf + sizeof(T));
  put_bytes(os, buf, sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!is) throw DataError("truncated binary file");
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

void put_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) put_le<double>(os, m(r, c));
}

Eigen::MatrixXd get_matrix(std::istream& is, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = get_le<double>(is);
  return m;
}

void expect_magic(std::istream& is, const char magic[4], const char* what) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::memcmp(buf, magic, 4) != 0)
    throw DataError(std::string("bad magic bytes, not a ") + what + " file");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open for reading: " + path.string());
  return is;
}

constexpr std::uint16_t kVersion = 1;

}  // namespace

void save_csv(const TimeSeries& x, const std::filesystem::path& path) {
  auto os = open_out(path);
  for (Eigen::Index r = 0; r < x.dim(); ++r) {
    for (Eigen::Index c = 0; c < x.len(); ++c) {
      if (c) os << ',';
      os << format_double(x.values(r, c));
    }
    os << '\n';
  }
}

TimeSeries load_csv(const std::filesystem::path& path) {
  auto is = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError("ragged CSV rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("empty CSV: " + path.string());
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return TimeSeries(std::move(m));
}

void save_binary(const TimeSeries& x, const std::filesystem::path& path) {
  auto os = open_out(path);
  put_bytes(os, "BSSD", 4);
  put_le<std::uint16_t>(os, kVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(x.dim()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(x.len()));
  put_matrix(os, x.values);
}

TimeSeries load_binary(const std::filesystem::path& path) {
  auto is = open_in(path);
  expect_magic(is, "BSSD", "BSSD series");
  if (get_le<std::uint16_t>(is) != kVersion) throw DataError("unsupported BSSD version");
  const auto dim = get_le<std::uint32_t>(is);
  const auto len = get_le<std::uint32_t>(is);
  return TimeSeries(get_matrix(is, dim, len));
}

void save_ar_model(const ArModel& m, const std::filesystem::path& path) {
  auto os = open_out(path);
  put_bytes(os, "ARMD", 4);
  put_le<std::uint16_t>(os, kVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.dim()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.order));
  for (const auto& a : m.coeffs) put_matrix(os, a);
  put_matrix(os, m.noise_cov);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.sbc_curve.size()));
  for (const auto& [order, value] : m.sbc_curve) {
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(order));
    put_le<double>(os, value);
  }
  put_le<std::uint8_t>(os, m.regularized ? 1 : 0);
}

ArModel load_ar_model(const std::filesystem::path& path) {
  auto is = open_in(path);
  expect_magic(is, "ARMD", "ARMD model");
  if (get_le<std::uint16_t>(is) != kVersion) throw DataError("unsupported ARMD version");
  const auto dim = get_le<std::uint32_t>(is);
  const auto order = get_le<std::uint32_t>(is);
  ArModel m;
  m.order = static_cast<int>(order);
  m.coeffs.reserve(order);
  for (std::uint32_t q = 0; q < order; ++q) m.coeffs.push_back(get_matrix(is, dim, dim));
  m.noise_cov = get_matrix(is, dim, dim);
  const auto n_sbc = get_le<std::uint32_t>(is);
  m.sbc_curve.reserve(n_sbc);
  for (std::uint32_t i = 0; i < n_sbc; ++i) {
    const auto o = get_le<std::uint32_t>(is);
    const auto v = get_le<double>(is);
    m.sbc_curve.emplace_back(static_cast<int>(o), v);
  }
  m.regularized = get_le<std::uint8_t>(is) != 0;
  return m;
}

void save_isa_result(const IsaResult& r, const std::filesystem::path& path) {
  auto os = open_out(path);
  put_bytes(os, "ISAR", 4);
  put_le<std::uint16_t>(os, kVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(r.w_pca.rows()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(r.w_pca.cols()));
  put_matrix(os, r.w_pca);
  put_matrix(os, r.w_isa);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(r.partition.num_groups));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(r.partition.group_dim));
  for (int g : r.partition.assignment) put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(r.components.len()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(r.components.transient));
  put_matrix(os, r.components.values);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(r.ica_iterations));
  put_le<double>(os, r.grouping_objective);
  put_le<double>(os, r.discarded_mass);
  std::uint8_t flags = (r.ica_converged ? 1 : 0) | (r.ica_unidentifiable ? 2 : 0) |
                       (r.pca_ill_separated ? 4 : 0);
  put_le<std::uint8_t>(os, flags);
}

IsaResult load_isa_result(const std::filesystem::path& path) {
  auto is = open_in(path);
  expect_magic(is, "ISAR", "ISAR result");
  if (get_le<std::uint16_t>(is) != kVersion) throw DataError("unsupported ISAR version");
  const auto ds = get_le<std::uint32_t>(is);
  const auto dx = get_le<std::uint32_t>(is);
  IsaResult r;
  r.w_pca = get_matrix(is, ds, dx);
  r.w_isa = get_matrix(is, ds, ds);
  const auto m = get_le<std::uint32_t>(is);
  const auto d = get_le<std::uint32_t>(is);
  std::vector<int> assign(static_cast<std::size_t>(m) * d);
  for (auto& g : assign) g = static_cast<int>(get_le<std::uint32_t>(is));
  r.partition = Partition(static_cast<int>(m), static_cast<int>(d), std::move(assign));
  const auto len = get_le<std::uint32_t>(is);
  const auto tr = get_le<std::uint32_t>(is);
  r.components = TimeSeries(get_matrix(is, ds, len), tr);
  r.ica_iterations = static_cast<int>(get_le<std::uint32_t>(is));
  r.grouping_objective = get_le<double>(is);
  r.discarded_mass = get_le<double>(is);
  const auto flags = get_le<std::uint8_t>(is);
  r.ica_converged = flags & 1;
  r.ica_unidentifiable = flags & 2;
  r.pca_ill_separated = flags & 4;
  return r;
}

}  // namespace ubssd
