#include "ubssd/wav.hpp"

#include "ubssd/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace ubssd {
namespace {

std::uint32_t u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | p[1] << 8 | p[2] << 16 |
         static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put_u32le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<char*>(b), 4);
}

void put_u16le(std::ostream& os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<char*>(b), 2);
}

}  // namespace

Eigen::MatrixXd load_wav16(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open audio file: " + path.string());
  unsigned char hdr[12];
  is.read(reinterpret_cast<char*>(hdr), 12);
  if (!is || std::memcmp(hdr, "RIFF", 4) != 0 || std::memcmp(hdr + 8, "WAVE", 4) != 0)
    throw DataError("not a RIFF/WAVE file: " + path.string());

  int channels = 0, bits = 0, format = 0, block_align = 0;
  std::vector<unsigned char> data;
  while (is) {
    unsigned char chunk[8];
    is.read(reinterpret_cast<char*>(chunk), 8);
    if (!is) break;
    const std::uint32_t size = u32le(chunk + 4);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      std::vector<unsigned char> fmt(size);
      is.read(reinterpret_cast<char*>(fmt.data()), size);
      if (!is || size < 16) throw DataError("truncated fmt chunk: " + path.string());
      format = u16le(fmt.data());
      channels = u16le(fmt.data() + 2);
      block_align = u16le(fmt.data() + 12);
      bits = u16le(fmt.data() + 14);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data.resize(size);
      is.read(reinterpret_cast<char*>(data.data()), size);
      if (!is) throw DataError("truncated data chunk: " + path.string());
    } else {
      is.seekg(size + (size & 1), std::ios::cur);
    }
    if (size & 1 && std::memcmp(chunk, "data", 4) == 0) is.seekg(1, std::ios::cur);
  }
  if (format != 1 || bits != 16)
    throw DataError("only 16-bit PCM WAV is supported: " + path.string());
  if (channels < 1 || block_align != channels * 2)
    throw DataError("bad WAV channel layout: " + path.string());
  if (data.empty()) throw DataError("WAV has no data chunk: " + path.string());

  const std::size_t frames = data.size() / static_cast<std::size_t>(block_align);
  Eigen::MatrixXd out(channels, frames);
  for (std::size_t f = 0; f < frames; ++f)
    for (int c = 0; c < channels; ++c) {
      const unsigned char* p = data.data() + f * block_align + 2 * c;
      const auto v = static_cast<std::int16_t>(u16le(p));
      out(c, static_cast<Eigen::Index>(f)) = v / 32768.0;
    }
  return out;
}

void save_wav16(const Eigen::MatrixXd& frames, int sample_rate,
                const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write audio file: " + path.string());
  const int channels = static_cast<int>(frames.rows());
  const std::uint32_t n = static_cast<std::uint32_t>(frames.cols());
  const std::uint32_t data_size = n * channels * 2;
  os.write("RIFF", 4);
  put_u32le(os, 36 + data_size);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put_u32le(os, 16);
  put_u16le(os, 1);  // PCM
  put_u16le(os, static_cast<std::uint16_t>(channels));
  put_u32le(os, static_cast<std::uint32_t>(sample_rate));
  put_u32le(os, static_cast<std::uint32_t>(sample_rate * channels * 2));
  put_u16le(os, static_cast<std::uint16_t>(channels * 2));
  put_u16le(os, 16);
  os.write("data", 4);
  put_u32le(os, data_size);
  for (std::uint32_t f = 0; f < n; ++f)
    for (int c = 0; c < channels; ++c) {
      const double clipped = std::clamp(frames(c, f), -1.0, 32767.0 / 32768.0);
      put_u16le(os, static_cast<std::uint16_t>(
                        static_cast<std::int16_t>(std::lrint(clipped * 32768.0))));
    }
}

}  // namespace ubssd
