#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dr/category.hpp"
#include "dr/image.hpp"

namespace dr::synth {

// One labeled degradation. `kind` selects the generator; only the fields
// relevant to that kind are meaningful. Reflection specs may omit the region,
// in which case corpus generation places it over the brightest image window
// and records the realized box.
struct DegradationSpec {
  std::string kind;  // noise | blur | jpeg | motion | reflection | clean
  double sigma = 0.0;     // noise: 8-bit units; blur: pixels
  int quality = 0;        // jpeg: 1..100
  double length = 0.0;    // motion: pixels
  double angle = 0.0;     // motion: degrees
  double opacity = 0.0;   // reflection: [0,1]
  std::string pattern;    // reflection: blobs | window_frame
  std::optional<BoundingBox> region;  // reflection placement

  Category category() const;
  // Human-readable parameter slug used in degraded filenames.
  std::string slug() const;
  // Throws InvalidParam when fields are missing or out of range for `kind`.
  void validate() const;
};

struct CorpusEntry {
  std::string clean;     // path as supplied to make_corpus
  std::string degraded;  // path relative to the manifest directory
  DegradationSpec spec;  // realized params (reflection region filled in)
  uint64_t stream_id = 0;
};

struct CorpusManifest {
  int version = 1;
  uint64_t seed = 0;
  std::vector<CorpusEntry> entries;

  std::string to_json() const;
  static CorpusManifest from_json(const std::string& text);
  void save(const std::string& path) const;
  static CorpusManifest load(const std::string& path);
};

struct SpecGrid {
  std::vector<DegradationSpec> specs;

  // Full default grid: noise sigma {10,25,50}, blur sigma {1,2,4}, jpeg
  // quality {10,30,50}, motion length {9,15,25}, reflection opacity
  // {0.4,0.7,1.0}, plus one clean entry.
  static SpecGrid defaults();
  // Middle-or-higher severity subset of the default grid, plus clean.
  static SpecGrid mid_or_higher();
  static SpecGrid from_json(const std::string& text);
};

// Generators. All are pure given (input, parameters, stream).
ImageBuffer add_gaussian_noise(const ImageBuffer& img, double sigma,
                               uint64_t stream);
ImageBuffer jpeg_degrade(const ImageBuffer& img, int quality);
ImageBuffer motion_blur(const ImageBuffer& img, double length, double angle);

// Blends `overlay` over `img` inside `region`: out = (1-m)*img + m*overlay
// with m = opacity * w, where w is a soft edge ramp (edge_width px, 0 = hard)
// times overlay luminance / 255. Returns the output and the exact weight
// field m as the mask.
std::pair<ImageBuffer, Mask> overlay_reflection(const ImageBuffer& img,
                                                const ImageBuffer& overlay,
                                                double opacity,
                                                const BoundingBox& region,
                                                double edge_width = 4.0);

// Procedural overlay pattern, full image size, black outside `region`.
// Patterns: "blobs" (flat-top discs), "window_frame" (flat-top bars). Cores
// sit near white so the blend clears the highlight gate at partial opacity.
ImageBuffer render_reflection_pattern(const std::string& pattern, int width,
                                      int height, const BoundingBox& region,
                                      uint64_t stream);

// Applies one spec. For reflection specs without a region, places the
// overlay on the brightest window and writes the realized spec back.
ImageBuffer apply_spec(const ImageBuffer& clean, DegradationSpec& spec,
                       uint64_t stream, Mask* ground_truth_mask = nullptr);

// Brightest window of the given size (integral-image scan, first argmax).
BoundingBox brightest_window(const ImageBuffer& img, int w, int h);

// Degrades every decodable image in clean_dir by every spec in the grid,
// writing PNGs and a manifest.json into out_dir. Clean specs copy the input
// file byte-for-byte. Deterministic for a fixed seed.
CorpusManifest make_corpus(const std::string& clean_dir, const SpecGrid& grid,
                           const std::string& out_dir, uint64_t seed);

}  // namespace dr::synth
