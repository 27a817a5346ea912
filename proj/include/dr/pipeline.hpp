#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dr/backend.hpp"
#include "dr/fusion.hpp"
#include "dr/image.hpp"

namespace dr::pipeline {

// Cooperative per-image timeout, checked at stage boundaries.
using Deadline = std::optional<std::chrono::steady_clock::time_point>;
void check_deadline(const Deadline& deadline);  // throws PipelineTimeout

struct StageRecord {
  std::string name;
  std::string backend;
  double duration_ms = 0.0;
  std::string status = "ok";
};

struct MotionKernelEstimate {
  double length = 1.0;
  double angle = 0.0;  // degrees in [0,180)
  double score = 0.0;
};

// Per-pipeline report fragment, filled in place so a throwing stage leaves
// the completed prefix behind.
struct Fragment {
  std::vector<StageRecord> stages;
  std::vector<backend::BoxDetection> boxes;
  std::map<std::string, double> mask_fractions;  // by mask kind name
  bool needs_review = false;
  std::optional<MotionKernelEstimate> kernel;
};

struct SrPlan {
  backend::BackendDescriptor base;           // role base_sr
  backend::BackendDescriptor text_detector;  // role text_detector
  backend::BackendDescriptor text_restorer;  // role text_restorer
  fusion::FeatherSpec feather;
  int scale = 1;
  void validate() const;
};

struct ReflectionPlan {
  backend::BackendDescriptor detector;   // role reflection_detector
  backend::BackendDescriptor inpainter;  // role inpainter
  backend::BackendDescriptor refiner;    // role weak_reflection_refiner
  int mask_close_radius = 2;
  double max_mask_fraction = 0.5;
  void validate() const;
};

struct DeblurPlan {
  backend::BackendDescriptor deblurrer;      // role deblurrer
  backend::BackendDescriptor face_detector;  // role face_detector
  backend::BackendDescriptor face_enhancer;  // role face_enhancer
  fusion::FeatherSpec feather;
  double wiener_nsr = 0.01;
  std::vector<double> grid_lengths{5, 9, 15, 21, 25};
  std::vector<double> grid_angles{0, 30, 60, 90, 120, 150};
  void validate() const;
};

// --- category A -----------------------------------------------------------

// Heuristic text-line finder: morphological-gradient binarization (Otsu),
// glyph-shaped components (height 6..64, aspect >= 1.5, stroke density
// 0.2..0.8) merged into lines, line boxes merged at IoU > 0.3, dilated 2 px.
backend::DetectionResult detect_text_regions_builtin(const ImageBuffer& img);

// Edge-preserving denoise (luma-guided bilateral, spatial sigma 2, range
// sigma = params "denoise") followed by unsharp sharpening (amount = params
// "sharpen", sigma 1.5). Both zero = identity.
ImageBuffer builtin_sr_restore(const ImageBuffer& img,
                               const backend::Params& params);

ImageBuffer run_sr_pipeline(const ImageBuffer& img, const SrPlan& plan,
                            Fragment& frag, const Deadline& deadline = {});

// --- category B -----------------------------------------------------------

// Bright unsaturated pixels, closed and cleaned of specks (< 0.05% of image
// area); boxes are the surviving component bounds.
backend::DetectionResult detect_reflection_builtin(const ImageBuffer& img,
                                                   int close_radius);

// Boundary-inward fill in increasing distance order; each value is a
// weighted mean of known neighbors within radius (weight 1/(1+d) times a
// directional term toward the march). Unmasked pixels are untouched.
ImageBuffer inpaint_fast_marching(const ImageBuffer& img, const Mask& mask,
                                  int radius);

// Subtracts strength times the low-frequency veil (blur sigma 8 of image
// minus blurred median background, less a small dead band so ordinary
// content is untouched). strength 0 = identity.
ImageBuffer refine_weak_builtin(const ImageBuffer& img,
                                const backend::Params& params);

ImageBuffer run_reflection_pipeline(const ImageBuffer& img,
                                    const ReflectionPlan& plan, Fragment& frag,
                                    const Deadline& deadline = {});

// --- category C -----------------------------------------------------------

// Grid search over candidate kernels scored on a central crop's log power
// spectrum: a length-L box blur imprints dips spaced 1/L cycles/px along
// the motion direction, so candidates are scored by a cosine probe over the
// rectified dip signal plus high-band attenuation evidence, minus a
// significance margin that lets length-1 (identity) win on sharp content.
// Ties prefer smaller length, then smaller angle.
MotionKernelEstimate estimate_motion_kernel(
    const ImageBuffer& img, const std::vector<double>& lengths,
    const std::vector<double>& angles);

// Frequency-domain Wiener filter with reflect padding, clamped output.
ImageBuffer wiener_deblur(const ImageBuffer& img, const Kernel2D& kernel,
                          double nsr);

ImageBuffer run_deblur_pipeline(const ImageBuffer& img, const DeblurPlan& plan,
                                Fragment& frag, const Deadline& deadline = {});

}  // namespace dr::pipeline
