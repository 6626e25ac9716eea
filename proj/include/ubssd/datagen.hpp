#pragma once

#include "ubssd/image.hpp"
#include "ubssd/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ubssd {

enum class SourceKind { geom3d, image_density, letters, audio };

SourceKind parse_source_kind(const std::string& name);
std::string to_string(SourceKind kind);

/// What to generate: database kind, component layout, and kind-specific
/// assets. geom3d fixes d=3; letters fixes d=2, M=2; image_density fixes d=2.
struct SourceSpec {
  SourceKind kind = SourceKind::letters;
  int M = 2;
  int d = 2;
  long T = 0;
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> image_paths;  // image_density; empty = built-ins
  std::vector<std::filesystem::path> audio_paths;  // audio
  long audio_offset = 0;
};

/// One synthetic uBSSD instance with its ground truth.
struct Scene {
  TimeSeries sources;      // D_s x T
  FirFilter mixing;        // D_x x D_s, degree L
  TimeSeries observation;  // apply_fir(mixing, sources), exactly
  Partition partition;
  LinearMap ground_truth_h0;  // mixing tap 0
};

/// M independent 3-dim components, each uniform on one of the built-in
/// geometric objects, standardized to zero mean and identity covariance.
TimeSeries gen_geom3d(int M, long T, std::uint64_t seed);

int geom3d_object_count();

/// One 2-dim component per bitmap, sampled with probability proportional to
/// pixel intensity plus in-pixel uniform jitter, then standardized.
TimeSeries gen_image_density(const std::vector<Bitmap>& images, long T,
                             std::uint64_t seed);

/// Built-in binary masks of the glyphs "A" and "B" (M=2, d=2).
TimeSeries gen_letters(long T, std::uint64_t seed);

/// Ten built-in glyph bitmaps standing in for the image-density protocol.
const std::vector<Bitmap>& builtin_glyphs();

/// Each stereo file contributes one d=2 component; channels are jointly
/// whitened per component.
TimeSeries load_audio(const std::vector<std::filesystem::path>& paths, long T,
                      long offset);

/// L+1 taps of shape D_x x D_s with i.i.d. standard normal entries; tap 0 is
/// resampled (bounded retries) until it is well conditioned.
FirFilter gen_mixing(const ModelDims& dims, std::uint64_t seed);

/// Sources per spec, random mixing, observation, ground truth. All randomness
/// is derived from `seed`; spec.seed is ignored here.
Scene make_scene(const SourceSpec& spec, const ModelDims& dims,
                 std::uint64_t seed);

TimeSeries generate_sources(const SourceSpec& spec, std::uint64_t seed);

}  // namespace ubssd
