#include "ubssd/datagen.hpp"

#include "ubssd/filter.hpp"
#include "ubssd/util.hpp"
#include "ubssd/wav.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ubssd {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using ObjectSampler = void (*)(Rng&, double*);

double unit(Rng& rng) {  // uniform [0,1)
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double symm(Rng& rng) {  // uniform [-1,1]
  return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
}

void cube_surface(Rng& rng, double* p) {
  const int face = std::uniform_int_distribution<int>(0, 5)(rng);
  const double u = symm(rng), v = symm(rng);
  const int axis = face / 2;
  p[axis] = face % 2 ? 1.0 : -1.0;
  p[(axis + 1) % 3] = u;
  p[(axis + 2) % 3] = v;
}

void sphere_surface(Rng& rng, double* p) {
  // Marsaglia rejection
  for (;;) {
    const double u = symm(rng), v = symm(rng);
    const double s = u * u + v * v;
    if (s >= 1.0 || s == 0.0) continue;
    const double f = 2.0 * std::sqrt(1.0 - s);
    p[0] = u * f;
    p[1] = v * f;
    p[2] = 1.0 - 2.0 * s;
    return;
  }
}

void axis_cross(Rng& rng, double* p) {
  const int axis = std::uniform_int_distribution<int>(0, 2)(rng);
  p[0] = p[1] = p[2] = 0.0;
  p[axis] = symm(rng);
}

void tetrahedron_wireframe(Rng& rng, double* p) {
  static constexpr double verts[4][3] = {
      {1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  static constexpr int edges[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  const int e = std::uniform_int_distribution<int>(0, 5)(rng);
  const double t = unit(rng);
  for (int k = 0; k < 3; ++k) {
    const double a = verts[edges[e][0]][k];
    const double b = verts[edges[e][1]][k];
    p[k] = a + t * (b - a);
  }
}

void cylinder_surface(Rng& rng, double* p) {
  const double theta = kTwoPi * unit(rng);
  p[0] = std::cos(theta);
  p[1] = std::sin(theta);
  p[2] = symm(rng);
}

void torus_surface(Rng& rng, double* p) {
  constexpr double R = 1.0, r = 0.45;
  const double phi = kTwoPi * unit(rng);
  double psi;
  // area element is proportional to R + r*cos(psi); thin by rejection
  for (;;) {
    psi = kTwoPi * unit(rng);
    if (unit(rng) * (R + r) <= R + r * std::cos(psi)) break;
  }
  const double ring = R + r * std::cos(psi);
  p[0] = ring * std::cos(phi);
  p[1] = ring * std::sin(phi);
  p[2] = r * std::sin(psi);
}

constexpr ObjectSampler kObjects[] = {cube_surface,          sphere_surface,
                                      axis_cross,            tetrahedron_wireframe,
                                      cylinder_surface,      torus_surface};

// Empirical standardization: remove the sample mean and whiten with the
// inverse square root of the sample covariance, one component at a time.
void standardize_component(Eigen::Ref<Eigen::MatrixXd> rows) {
  const Eigen::VectorXd mu = rows.rowwise().mean();
  rows.colwise() -= mu;
  const Eigen::MatrixXd cov =
      rows * rows.transpose() / static_cast<double>(rows.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(1e-300, cov.trace()))
    throw DataError("component has a zero-variance direction; cannot whiten");
  rows = inverse_sqrt_spd(cov) * rows;
}

const char* const kLetterA[] = {
    "....####....",
    "...##..##...",
    "..##....##..",
    "..##....##..",
    ".##......##.",
    ".##########.",
    "##........##",
    "##........##",
    "##........##",
    "##........##",
    "##........##",
    "##........##",
};

const char* const kLetterB[] = {
    "#########...",
    "##......##..",
    "##.......##.",
    "##......##..",
    "#########...",
    "##......##..",
    "##.......##.",
    "##.......##.",
    "##.......##.",
    "##......##..",
    "#########...",
    "............",
};

Bitmap mask_to_bitmap(const char* const* rows, int h) {
  const int w = static_cast<int>(std::string(rows[0]).size());
  Bitmap img = Bitmap::Zero(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (rows[r][c] == '#' || rows[r][c] == 'X' || rows[r][c] == '*') img(r, c) = 1.0;
  return img;
}

// Ten simple glyph masks standing in for the image-density protocol.
const char* const kGlyph0[] = {"....####....", "..##....##..", ".#........#.",
                               "#..##..##..#", "#..##..##..#", "#..........#",
                               "#..........#", "#..#....#..#", "#...####...#",
                               ".#........#.", "..##....##..", "....####...."};
const char* const kGlyph1[] = {"....####....", "..##....##..", ".#........#.",
                               "#..##..##..#", "#..##..##..#", "#..........#",
                               "#...####...#", "#..#....#..#", "#..........#",
                               ".#........#.", "..##....##..", "....####...."};
const char* const kGlyph2[] = {"##........##", ".##......##.", "..##....##..",
                               "...##..##...", "....####....", ".....##.....",
                               ".....##.....", "....####....", "...##..##...",
                               "..##....##..", ".##......##.", "##........##"};
const char* const kGlyph3[] = {"....####....", "...#....#...", "..#......#..",
                               ".#........#.", "#..........#", "#..........#",
                               "#..........#", "#..........#", ".#........#.",
                               "..#......#..", "...#....#...", "....####...."};
const char* const kGlyph4[] = {".....##.....", ".....##.....", ".....##.....",
                               ".....##.....", "############", "############",
                               ".....##.....", ".....##.....", ".....##.....",
                               ".....##.....", ".....##.....", ".....##....."};
const char* const kGlyph5[] = {"..##....##..", ".####..####.", "############",
                               "############", "############", ".##########.",
                               "..########..", "...######...", "....####....",
                               ".....##.....", "............", "............"};
const char* const kGlyph6[] = {"############", "############", ".....##.....",
                               ".....##.....", ".....##.....", ".....##.....",
                               ".....##.....", ".....##.....", ".....##.....",
                               ".....##.....", ".....##.....", ".....##....."};
const char* const kGlyph7[] = {"##..........", "##..........", "##..........",
                               "##..........", "##..........", "##..........",
                               "##..........", "##..........", "##..........",
                               "##..........", "############", "############"};
const char* const kGlyph8[] = {".##########.", "############", "##..........",
                               "##..........", "############", ".###########",
                               "..........##", "..........##", "..........##",
                               "############", "###########.", "............"};
const char* const kGlyph9[] = {".....#......", "....###.....", "...#####....",
                               "..#######...", ".#########..", "###########.",
                               ".....##.....", ".....##.....", ".....##.....",
                               ".....##.....", ".....##.....", ".....##....."};

TimeSeries sample_image_components(const std::vector<Bitmap>& images, long T,
                                   std::uint64_t seed) {
  if (T < 2) throw DimensionError("image density sampling needs T >= 2");
  const int M = static_cast<int>(images.size());
  if (M < 1) throw DimensionError("at least one image is required");
  Eigen::MatrixXd s(2 * M, T);
  for (int m = 0; m < M; ++m) {
    const Bitmap& img = images[static_cast<std::size_t>(m)];
    if (img.size() == 0) throw DataError("empty image");
    if ((img.array() < 0.0).any()) throw DataError("negative pixel intensity");
    const int h = static_cast<int>(img.rows());
    const int w = static_cast<int>(img.cols());
    std::vector<double> cdf(static_cast<std::size_t>(h) * w);
    double total = 0.0;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        total += img(r, c);
        cdf[static_cast<std::size_t>(r) * w + c] = total;
      }
    if (total <= 0.0) throw DataError("image density is all zero");
    Rng rng(seed_chain(seed, static_cast<std::uint64_t>(m)));
    for (long t = 0; t < T; ++t) {
      const double u = unit(rng) * total;
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const auto idx = static_cast<long>(std::min(
          static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1));
      const int r = static_cast<int>(idx / w);
      const int c = static_cast<int>(idx % w);
      // pixel center plus in-pixel jitter; y grows downward, which only
      // flips a sign that the standardization does not see
      s(2 * m, t) = c + unit(rng);
      s(2 * m + 1, t) = r + unit(rng);
    }
    standardize_component(s.middleRows(2 * m, 2));
  }
  return TimeSeries(std::move(s));
}

}  // namespace

SourceKind parse_source_kind(const std::string& name) {
  if (name == "geom3d" || name == "3d-geom" || name == "3dgeom") return SourceKind::geom3d;
  if (name == "image_density" || name == "celebrities") return SourceKind::image_density;
  if (name == "letters") return SourceKind::letters;
  if (name == "audio") return SourceKind::audio;
  throw DataError("unknown database kind: " + name);
}

std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::geom3d: return "geom3d";
    case SourceKind::image_density: return "image_density";
    case SourceKind::letters: return "letters";
    case SourceKind::audio: return "audio";
  }
  return "?";
}

int geom3d_object_count() { return static_cast<int>(std::size(kObjects)); }

TimeSeries gen_geom3d(int M, long T, std::uint64_t seed) {
  if (M < 1 || M > geom3d_object_count())
    throw DimensionError("gen_geom3d supports 1 <= M <= " +
                         std::to_string(geom3d_object_count()) + " components");
  if (T < 4) throw DimensionError("gen_geom3d needs T >= 4");
  Eigen::MatrixXd s(3 * M, T);
  for (int m = 0; m < M; ++m) {
    Rng rng(seed_chain(seed, static_cast<std::uint64_t>(m)));
    double p[3];
    for (long t = 0; t < T; ++t) {
      kObjects[m](rng, p);
      s(3 * m, t) = p[0];
      s(3 * m + 1, t) = p[1];
      s(3 * m + 2, t) = p[2];
    }
    standardize_component(s.middleRows(3 * m, 3));
  }
  return TimeSeries(std::move(s));
}

TimeSeries gen_image_density(const std::vector<Bitmap>& images, long T,
                             std::uint64_t seed) {
  return sample_image_components(images, T, seed);
}

TimeSeries gen_letters(long T, std::uint64_t seed) {
  static const std::vector<Bitmap> masks = {mask_to_bitmap(kLetterA, 12),
                                            mask_to_bitmap(kLetterB, 12)};
  return sample_image_components(masks, T, seed);
}

const std::vector<Bitmap>& builtin_glyphs() {
  static const std::vector<Bitmap> glyphs = {
      mask_to_bitmap(kGlyph0, 12), mask_to_bitmap(kGlyph1, 12),
      mask_to_bitmap(kGlyph2, 12), mask_to_bitmap(kGlyph3, 12),
      mask_to_bitmap(kGlyph4, 12), mask_to_bitmap(kGlyph5, 12),
      mask_to_bitmap(kGlyph6, 12), mask_to_bitmap(kGlyph7, 12),
      mask_to_bitmap(kGlyph8, 12), mask_to_bitmap(kGlyph9, 12)};
  return glyphs;
}

TimeSeries load_audio(const std::vector<std::filesystem::path>& paths, long T,
                      long offset) {
  if (paths.empty()) throw DimensionError("load_audio needs at least one file");
  if (T < 2 || offset < 0) throw DimensionError("load_audio needs T >= 2, offset >= 0");
  const int M = static_cast<int>(paths.size());
  Eigen::MatrixXd s(2 * M, T);
  for (int m = 0; m < M; ++m) {
    const Eigen::MatrixXd frames = load_wav16(paths[static_cast<std::size_t>(m)]);
    if (frames.rows() != 2)
      throw DataError("stereo file expected: " + paths[static_cast<std::size_t>(m)].string());
    if (frames.cols() < offset + T)
      throw DataError("audio shorter than offset+T: " +
                      paths[static_cast<std::size_t>(m)].string());
    s.middleRows(2 * m, 2) = frames.middleCols(offset, T);
    standardize_component(s.middleRows(2 * m, 2));
  }
  return TimeSeries(std::move(s));
}

FirFilter gen_mixing(const ModelDims& dims, std::uint64_t seed) {
  dims.validate();
  constexpr int kMaxAttempts = 64;
  constexpr double kMaxCondition = 1e6;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(seed_chain(seed, static_cast<std::uint64_t>(attempt)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Eigen::MatrixXd> taps(static_cast<std::size_t>(dims.L) + 1);
    for (auto& tap : taps) {
      tap.resize(dims.D_x, dims.D_s());
      for (Eigen::Index c = 0; c < tap.cols(); ++c)
        for (Eigen::Index r = 0; r < tap.rows(); ++r) tap(r, c) = gauss(rng);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(taps.front());
    const double smin = svd.singularValues().minCoeff();
    if (smin > 0.0 && svd.singularValues().maxCoeff() / smin < kMaxCondition)
      return FirFilter(std::move(taps));
  }
  throw DataError("gen_mixing: could not draw a well-conditioned H0");
}

TimeSeries generate_sources(const SourceSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case SourceKind::geom3d:
      if (spec.d != 3) throw DimensionError("geom3d requires d=3");
      return gen_geom3d(spec.M, spec.T, seed);
    case SourceKind::letters:
      if (spec.d != 2 || spec.M != 2) throw DimensionError("letters requires d=2, M=2");
      return gen_letters(spec.T, seed);
    case SourceKind::image_density: {
      if (spec.d != 2) throw DimensionError("image_density requires d=2");
      std::vector<Bitmap> images;
      if (spec.image_paths.empty()) {
        const auto& glyphs = builtin_glyphs();
        if (spec.M > static_cast<int>(glyphs.size()))
          throw DimensionError("only " + std::to_string(glyphs.size()) +
                               " built-in glyphs are available");
        images.assign(glyphs.begin(), glyphs.begin() + spec.M);
      } else {
        if (static_cast<int>(spec.image_paths.size()) != spec.M)
          throw DimensionError("image_density needs one image per component");
        for (const auto& p : spec.image_paths) images.push_back(load_image(p));
      }
      return gen_image_density(images, spec.T, seed);
    }
    case SourceKind::audio:
      if (spec.d != 2) throw DimensionError("audio requires d=2");
      if (static_cast<int>(spec.audio_paths.size()) != spec.M)
        throw DimensionError("audio needs one stereo file per component");
      return load_audio(spec.audio_paths, spec.T, spec.audio_offset);
  }
  throw DataError("unreachable source kind");
}

Scene make_scene(const SourceSpec& spec, const ModelDims& dims,
                 std::uint64_t seed) {
  dims.validate();
  SourceSpec s = spec;
  s.M = dims.M;
  s.d = dims.d;
  s.T = dims.T;
  Scene scene;
  scene.sources = generate_sources(s, seed_chain(seed, 0xA));
  scene.mixing = gen_mixing(dims, seed_chain(seed, 0xB));
  scene.observation = apply_fir(scene.mixing, scene.sources);
  scene.partition = Partition::contiguous(dims.M, dims.d);
  scene.ground_truth_h0 = scene.mixing.taps.front();
  return scene;
}

}  // namespace ubssd
