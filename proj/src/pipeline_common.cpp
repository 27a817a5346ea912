#include <algorithm>
#include <cmath>
#include <cstring>

#include "dr/error.hpp"
#include "dr/pipeline.hpp"
#include "pipeline_internal.hpp"

namespace dr::pipeline {

void check_deadline(const Deadline& deadline) {
  if (deadline && std::chrono::steady_clock::now() > *deadline) {
    throw Error(ErrorKind::PipelineTimeout, "per-image time budget exhausted");
  }
}

namespace {

void require_role(const backend::BackendDescriptor& desc, backend::Role role,
                  const char* slot) {
  if (desc.role != role) {
    throw Error(ErrorKind::ConfigError,
                std::string("slot ") + slot + " requires role " +
                    backend::role_name(role) + ", got " +
                    backend::role_name(desc.role));
  }
  desc.validate();
}

void require_feather(const fusion::FeatherSpec& feather) {
  if (!(feather.radius >= 0.0) || !std::isfinite(feather.radius)) {
    throw Error(ErrorKind::ConfigError, "feather radius must be >= 0");
  }
}

}  // namespace

void SrPlan::validate() const {
  require_role(base, backend::Role::BaseSr, "base");
  require_role(text_detector, backend::Role::TextDetector, "text_detector");
  require_role(text_restorer, backend::Role::TextRestorer, "text_restorer");
  require_feather(feather);
  if (scale < 1) {
    throw Error(ErrorKind::ConfigError, "scale must be >= 1");
  }
  if (base.scale() != scale || text_restorer.scale() != scale) {
    throw Error(ErrorKind::ConfigError,
                "base and text_restorer scale params must match plan scale");
  }
}

void ReflectionPlan::validate() const {
  require_role(detector, backend::Role::ReflectionDetector, "detector");
  require_role(inpainter, backend::Role::Inpainter, "inpainter");
  require_role(refiner, backend::Role::WeakReflectionRefiner, "refiner");
  if (mask_close_radius < 0) {
    throw Error(ErrorKind::ConfigError, "mask_close_radius must be >= 0");
  }
  if (!(max_mask_fraction > 0.0) || max_mask_fraction > 1.0) {
    throw Error(ErrorKind::ConfigError, "max_mask_fraction must be in (0,1]");
  }
}

void DeblurPlan::validate() const {
  require_role(deblurrer, backend::Role::Deblurrer, "deblurrer");
  require_role(face_detector, backend::Role::FaceDetector, "face_detector");
  require_role(face_enhancer, backend::Role::FaceEnhancer, "face_enhancer");
  require_feather(feather);
  if (face_enhancer.scale() != 1) {
    throw Error(ErrorKind::ConfigError,
                "face_enhancer must preserve size (scale 1)");
  }
  if (!(wiener_nsr > 0.0) || !std::isfinite(wiener_nsr)) {
    throw Error(ErrorKind::ConfigError, "wiener_nsr must be > 0");
  }
  if (grid_lengths.empty() || grid_angles.empty()) {
    throw Error(ErrorKind::ConfigError, "kernel search grid must be non-empty");
  }
  for (double l : grid_lengths) {
    if (!(l >= 1.0) || !std::isfinite(l)) {
      throw Error(ErrorKind::ConfigError, "grid lengths must be >= 1");
    }
  }
  for (double a : grid_angles) {
    if (!std::isfinite(a)) {
      throw Error(ErrorKind::ConfigError, "grid angles must be finite");
    }
  }
}

std::vector<backend::BoxDetection> merge_and_sort_boxes(
    std::vector<backend::BoxDetection> boxes, double iou_threshold) {
  bool merged = true;
  while (merged) {
    merged = false;
    for (size_t i = 0; i < boxes.size() && !merged; ++i) {
      for (size_t j = i + 1; j < boxes.size(); ++j) {
        if (boxes[i].box.iou(boxes[j].box) > iou_threshold) {
          boxes[i].box = boxes[i].box.united(boxes[j].box);
          boxes[i].confidence =
              std::max(boxes[i].confidence, boxes[j].confidence);
          boxes.erase(boxes.begin() + static_cast<long>(j));
          merged = true;
          break;
        }
      }
    }
  }
  std::sort(boxes.begin(), boxes.end(),
            [](const backend::BoxDetection& a, const backend::BoxDetection& b) {
              if (a.box.y != b.box.y) return a.box.y < b.box.y;
              if (a.box.x != b.box.x) return a.box.x < b.box.x;
              if (a.box.h != b.box.h) return a.box.h < b.box.h;
              return a.box.w < b.box.w;
            });
  return boxes;
}

ImageBuffer crop_image(const ImageBuffer& img, const BoundingBox& box) {
  if (!box.valid_within(img.width(), img.height())) {
    throw Error(ErrorKind::InvalidRegion, "crop box outside image");
  }
  ImageBuffer out(box.w, box.h, img.channels(), img.depth());
  const size_t row_samples = static_cast<size_t>(box.w) * img.channels();
  for (int y = 0; y < box.h; ++y) {
    const size_t src_off =
        (static_cast<size_t>(box.y + y) * img.width() + box.x) *
        img.channels();
    const size_t dst_off = static_cast<size_t>(y) * row_samples;
    if (img.depth() == Depth::U8) {
      std::memcpy(out.u8().data() + dst_off, img.u8().data() + src_off,
                  row_samples * sizeof(uint8_t));
    } else {
      std::memcpy(out.f32().data() + dst_off, img.f32().data() + src_off,
                  row_samples * sizeof(float));
    }
  }
  return out;
}

void paste_into(ImageBuffer& dst, const ImageBuffer& src, int x0, int y0) {
  if (src.channels() != dst.channels() || src.depth() != dst.depth() ||
      x0 < 0 || y0 < 0 || x0 + src.width() > dst.width() ||
      y0 + src.height() > dst.height()) {
    throw Error(ErrorKind::InvalidRegion, "paste region outside image");
  }
  const size_t row_samples = static_cast<size_t>(src.width()) * src.channels();
  for (int y = 0; y < src.height(); ++y) {
    const size_t dst_off =
        (static_cast<size_t>(y0 + y) * dst.width() + x0) * dst.channels();
    const size_t src_off = static_cast<size_t>(y) * row_samples;
    if (dst.depth() == Depth::U8) {
      std::memcpy(dst.u8().data() + dst_off, src.u8().data() + src_off,
                  row_samples * sizeof(uint8_t));
    } else {
      std::memcpy(dst.f32().data() + dst_off, src.f32().data() + src_off,
                  row_samples * sizeof(float));
    }
  }
}

}  // namespace dr::pipeline
