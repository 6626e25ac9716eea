#include "ubssd/image.hpp"

#include "ubssd/types.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>

namespace ubssd {
namespace {

int pgm_next_int(std::istream& is) {
  // skips whitespace and '#' comments
  for (;;) {
    int c = is.peek();
    if (c == '#') {
      std::string line;
      std::getline(is, line);
    } else if (std::isspace(c)) {
      is.get();
    } else {
      break;
    }
  }
  int v;
  if (!(is >> v)) throw DataError("malformed PGM header");
  return v;
}

Bitmap load_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open image: " + path.string());
  char p, kind;
  is.get(p);
  is.get(kind);
  if (p != 'P' || (kind != '2' && kind != '5'))
    throw DataError("unsupported PGM type in " + path.string());
  const int w = pgm_next_int(is);
  const int h = pgm_next_int(is);
  const int maxval = pgm_next_int(is);
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535)
    throw DataError("bad PGM dimensions in " + path.string());
  Bitmap img(h, w);
  if (kind == '2') {
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) img(r, c) = pgm_next_int(is);
  } else {
    is.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> row(static_cast<std::size_t>(w) * bytes);
    for (int r = 0; r < h; ++r) {
      is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
      if (!is) throw DataError("truncated PGM data in " + path.string());
      for (int c = 0; c < w; ++c)
        img(r, c) = bytes == 1 ? row[c] : (row[2 * c] << 8 | row[2 * c + 1]);
    }
  }
  return img;
}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

Bitmap load_png_gray(const std::filesystem::path& path) {
  PngReader r;
  r.fp = std::fopen(path.c_str(), "rb");
  if (!r.fp) throw DataError("cannot open image: " + path.string());
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) throw DataError("libpng init failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw DataError("libpng init failed");
  if (setjmp(png_jmpbuf(r.png))) throw DataError("PNG decode failed: " + path.string());
  png_init_io(r.png, r.fp);
  png_read_info(r.png, r.info);

  const png_byte color = png_get_color_type(r.png, r.info);
  const png_byte depth = png_get_bit_depth(r.png, r.info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
  if (depth == 16) png_set_strip_16(r.png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(r.png, 1, -1, -1);
  png_read_update_info(r.png, r.info);

  const png_uint_32 w = png_get_image_width(r.png, r.info);
  const png_uint_32 h = png_get_image_height(r.png, r.info);
  std::vector<unsigned char> row(png_get_rowbytes(r.png, r.info));
  Bitmap img(h, w);
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(r.png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x) img(y, x) = row[x];
  }
  return img;
}

}  // namespace

Bitmap load_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot open image: " + path.string());
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), 8);
  probe.close();
  if (sig[0] == 'P' && (sig[1] == '2' || sig[1] == '5')) return load_pgm(path);
  if (png_sig_cmp(sig, 0, 8) == 0) return load_png_gray(path);
  throw DataError("unrecognized image format: " + path.string());
}

}  // namespace ubssd
