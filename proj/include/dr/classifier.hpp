#pragma once

#include <optional>
#include <string>

#include "dr/category.hpp"
#include "dr/image.hpp"

namespace dr {

// No-reference degradation signals, all on the 8-bit luminance scale.
struct FeatureVector {
  double laplacian_variance = 0.0;   // >= 0
  double blockiness = 0.0;           // >= 0
  double gradient_anisotropy = 0.0;  // [0,1]
  double highlight_ratio = 0.0;      // [0,1]
  double noise_estimate = 0.0;       // >= 0, 8-bit sigma units
};

// Throws ImageTooSmall below 32x32.
FeatureVector extract_features(const ImageBuffer& img);

// Decision thresholds for the rule-based classifier. Defaults are frozen
// from a calibration run over the bundled synthetic corpus; the same numbers
// ship in config/thresholds.json.
struct ThresholdConfig {
  double t_hl = 0.0;     // B: highlight_ratio above
  double t_aniso = 0.0;  // C: gradient_anisotropy above, and
  double t_sharp = 0.0;  // C: laplacian_variance below
  double t_noise = 0.0;  // A: noise_estimate above, or
  double t_block = 0.0;  // A: blockiness above, or
  double t_blur = 0.0;   // A: laplacian_variance below (and nonzero)

  static ThresholdConfig defaults();
  static ThresholdConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

enum class ClassifierSource { Heuristic, Vlm };

struct ClassificationOutcome {
  Category category = Category::D;
  ClassifierSource source = ClassifierSource::Heuristic;
  double confidence = 0.0;  // [0,1]
  std::optional<std::string> raw_response;  // present when source == Vlm
  std::optional<FeatureVector> features;    // present when source == Heuristic
};

// Fixed-order decision list: B (highlights), C (anisotropy + softness),
// A (noise or blockiness or low variance), else D. Confidence is the firing
// rule's normalized margin; for D, the distance from any rule firing. The
// low-variance clause of rule A requires laplacian_variance > 0 so that a
// fully degenerate (constant) image classifies as clean.
ClassificationOutcome classify_heuristic(const FeatureVector& features,
                                         const ThresholdConfig& thresholds);

// The exact classification prompt sent to vision-language backends.
std::string build_vlm_prompt();

// Extracts the category letter from a model reply: standalone A/B/C/D
// tokens (case-insensitive, word-boundary delimited). A single distinct
// letter wins outright; with several distinct letters the one nearest the
// end of the text wins. Throws UnparseableResponse (message carries the raw
// text) when no letter token exists.
Category parse_vlm_response(const std::string& text);

}  // namespace dr
