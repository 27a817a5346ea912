#include <algorithm>
#include <cmath>
#include <vector>

#include "dr/color.hpp"
#include "dr/convolve.hpp"
#include "dr/error.hpp"
#include "dr/kernels.hpp"
#include "dr/morphology.hpp"
#include "dr/pipeline.hpp"
#include "pipeline_internal.hpp"

namespace dr::pipeline {

namespace {

struct LineCand {
  BoundingBox box;
  long pixels = 0;
};

bool y_ranges_overlap(const BoundingBox& a, const BoundingBox& b) {
  return a.y < b.y2() && b.y < a.y2();
}

double horizontal_gap(const BoundingBox& a, const BoundingBox& b) {
  if (a.x < b.x2() && b.x < a.x2()) return 0.0;
  return a.x >= b.x2() ? a.x - b.x2() : b.x - a.x2();
}

// Repeatedly merges candidate pairs satisfying pred until stable.
template <typename Pred>
void merge_fixpoint(std::vector<LineCand>& cands, Pred pred) {
  bool merged = true;
  while (merged) {
    merged = false;
    for (size_t i = 0; i < cands.size() && !merged; ++i) {
      for (size_t j = i + 1; j < cands.size(); ++j) {
        if (pred(cands[i].box, cands[j].box)) {
          cands[i].box = cands[i].box.united(cands[j].box);
          cands[i].pixels += cands[j].pixels;
          cands.erase(cands.begin() + static_cast<long>(j));
          merged = true;
          break;
        }
      }
    }
  }
}

}  // namespace

backend::DetectionResult detect_text_regions_builtin(const ImageBuffer& img) {
  const int w = img.width();
  const int h = img.height();
  std::vector<float> gray = luma_plane_255(img);
  std::vector<float> grad = morph::dilate_rect(gray, w, h, 1, 1);
  {
    std::vector<float> ero = morph::erode_rect(gray, w, h, 1, 1);
    for (size_t i = 0; i < grad.size(); ++i) grad[i] -= ero[i];
  }

  std::vector<long> hist(256, 0);
  for (float v : grad) {
    int bin = static_cast<int>(std::lround(v));
    hist[std::clamp(bin, 0, 255)]++;
  }
  const int thresh = morph::otsu_threshold(hist);

  Mask binary(w, h, MaskKind::Text, 0.0f);
  {
    auto vals = binary.values();
    for (size_t i = 0; i < grad.size(); ++i) {
      vals[i] = grad[i] > static_cast<float>(thresh) ? 1.0f : 0.0f;
    }
  }

  std::vector<LineCand> cands;
  for (const auto& comp : morph::connected_components(binary)) {
    const int bh = comp.box.h;
    const int bw = comp.box.w;
    if (bh < 6 || bh > 64) continue;
    if (static_cast<double>(bw) / bh < 1.5) continue;
    const double density = static_cast<double>(comp.pixels) / comp.box.area();
    if (density < 0.2 || density > 0.8) continue;
    cands.push_back({comp.box, comp.pixels});
  }
  if (cands.empty()) return {};

  std::vector<int> heights;
  heights.reserve(cands.size());
  for (const auto& c : cands) heights.push_back(c.box.h);
  std::nth_element(heights.begin(), heights.begin() + heights.size() / 2,
                   heights.end());
  const double gap_limit = 1.5 * heights[heights.size() / 2];

  merge_fixpoint(cands, [gap_limit](const BoundingBox& a,
                                    const BoundingBox& b) {
    return y_ranges_overlap(a, b) && horizontal_gap(a, b) <= gap_limit;
  });
  merge_fixpoint(cands, [](const BoundingBox& a, const BoundingBox& b) {
    return a.iou(b) > 0.3;
  });

  backend::DetectionResult det;
  for (const auto& c : cands) {
    backend::BoxDetection d;
    d.box = c.box.dilated(2, w, h);
    d.confidence = std::clamp(
        static_cast<double>(c.pixels) / c.box.area(), 0.0, 1.0);
    det.boxes.push_back(d);
  }
  std::sort(det.boxes.begin(), det.boxes.end(),
            [](const backend::BoxDetection& a, const backend::BoxDetection& b) {
              if (a.box.y != b.box.y) return a.box.y < b.box.y;
              return a.box.x < b.box.x;
            });
  return det;
}

ImageBuffer builtin_sr_restore(const ImageBuffer& img,
                               const backend::Params& params) {
  const auto number = [&](const char* key, double fallback) {
    const auto it = params.find(key);
    if (it == params.end()) return fallback;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidParam,
                  std::string("param ") + key + " is not a number");
    }
  };
  const double denoise = number("denoise", 0.0);
  const double sharpen = number("sharpen", 0.0);
  if (denoise < 0.0 || sharpen < 0.0 || !std::isfinite(denoise) ||
      !std::isfinite(sharpen)) {
    throw Error(ErrorKind::InvalidParam, "denoise/sharpen must be >= 0");
  }
  if (denoise == 0.0 && sharpen == 0.0) return img;

  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();
  ImageBuffer work = img.to_float();

  if (denoise > 0.0) {
    const std::vector<float> luma = luma_plane_255(img);
    constexpr double kSpatialSigma = 2.0;
    constexpr int kRadius = 4;  // 2 x spatial sigma
    float spatial[2 * kRadius + 1][2 * kRadius + 1];
    for (int dy = -kRadius; dy <= kRadius; ++dy) {
      for (int dx = -kRadius; dx <= kRadius; ++dx) {
        spatial[dy + kRadius][dx + kRadius] = static_cast<float>(
            std::exp(-(dx * dx + dy * dy) / (2.0 * kSpatialSigma *
                                             kSpatialSigma)));
      }
    }
    float range_lut[256];
    for (int d = 0; d < 256; ++d) {
      range_lut[d] = static_cast<float>(
          std::exp(-(static_cast<double>(d) * d) / (2.0 * denoise * denoise)));
    }

    ImageBuffer filtered(w, h, ch, Depth::F32);
    const auto src = work.f32();
    auto dst = filtered.f32();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const float center_luma = luma[static_cast<size_t>(y) * w + x];
        float wsum = 0.0f;
        float acc[4] = {0, 0, 0, 0};
        for (int dy = -kRadius; dy <= kRadius; ++dy) {
          const int ny = std::clamp(y + dy, 0, h - 1);
          for (int dx = -kRadius; dx <= kRadius; ++dx) {
            const int nx = std::clamp(x + dx, 0, w - 1);
            const float diff =
                std::abs(luma[static_cast<size_t>(ny) * w + nx] - center_luma);
            const int bin = std::min(255, static_cast<int>(diff + 0.5f));
            const float wgt =
                spatial[dy + kRadius][dx + kRadius] * range_lut[bin];
            wsum += wgt;
            const size_t off = (static_cast<size_t>(ny) * w + nx) * ch;
            for (int c = 0; c < ch; ++c) acc[c] += wgt * src[off + c];
          }
        }
        const size_t off = (static_cast<size_t>(y) * w + x) * ch;
        for (int c = 0; c < ch; ++c) dst[off + c] = acc[c] / wsum;
      }
    }
    work = std::move(filtered);
  }

  if (sharpen > 0.0) {
    const auto& ops = kernels::active();
    std::vector<ImageBuffer> planes = work.split_planes();
    for (auto& plane : planes) {
      std::vector<float> blurred(plane.f32().begin(), plane.f32().end());
      gaussian_blur_plane(blurred, w, h, 1.5);
      ops.unsharp_mix(plane.f32().data(), blurred.data(),
                      static_cast<float>(sharpen), plane.f32().data(),
                      plane.sample_count());
    }
    work = ImageBuffer::merge_planes(planes);
  }

  for (float& v : work.f32()) v = std::clamp(v, 0.0f, 1.0f);
  return img.depth() == Depth::U8 ? work.to_u8() : work;
}

ImageBuffer run_sr_pipeline(const ImageBuffer& img, const SrPlan& plan,
                            Fragment& frag, const Deadline& deadline) {
  check_deadline(deadline);
  ImageBuffer base_out;
  {
    StageTimer timer(frag, "base_restore", plan.base.name);
    base_out = backend::invoke_image_backend(plan.base, img);
  }

  check_deadline(deadline);
  backend::DetectionResult det;
  {
    StageTimer timer(frag, "text_detect", plan.text_detector.name);
    det = backend::invoke_detector_backend(plan.text_detector, img);
  }
  frag.boxes = merge_and_sort_boxes(std::move(det.boxes));
  if (frag.boxes.empty()) return base_out;

  check_deadline(deadline);
  const int s = plan.scale;
  ImageBuffer out = base_out;
  {
    StageTimer timer(frag, "text_restore", plan.text_restorer.name);
    for (const auto& d : frag.boxes) {
      check_deadline(deadline);
      const BoundingBox margin = d.box.dilated(8, img.width(), img.height());
      const ImageBuffer crop = crop_image(img, margin);
      const ImageBuffer restored =
          backend::invoke_image_backend(plan.text_restorer, crop);

      ImageBuffer patch = out;
      paste_into(patch, restored, margin.x * s, margin.y * s);

      Mask region(out.width(), out.height(), MaskKind::Text, 0.0f);
      for (int y = d.box.y * s; y < d.box.y2() * s; ++y) {
        for (int x = d.box.x * s; x < d.box.x2() * s; ++x) {
          region.set(x, y, 1.0f);
        }
      }
      out = fusion::composite(out, patch, fusion::feather_mask(region,
                                                               plan.feather));
    }
  }
  return out;
}

}  // namespace dr::pipeline
