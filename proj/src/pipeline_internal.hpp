#pragma once
// Shared helpers for the pipeline translation units only.

#include <chrono>
#include <exception>
#include <string>

#include "dr/pipeline.hpp"

namespace dr::pipeline {

// Appends a StageRecord and stamps its duration on scope exit; a stage left
// during unwinding is recorded with status "error".
class StageTimer {
 public:
  StageTimer(Fragment& frag, std::string name, std::string backend)
      : frag_(frag),
        idx_(frag.stages.size()),
        exceptions_(std::uncaught_exceptions()),
        t0_(std::chrono::steady_clock::now()) {
    frag_.stages.push_back({std::move(name), std::move(backend), 0.0, "ok"});
  }

  ~StageTimer() {
    auto& rec = frag_.stages[idx_];
    rec.duration_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0_)
            .count();
    if (std::uncaught_exceptions() > exceptions_ && rec.status == "ok") {
      rec.status = "error";
    }
  }

  void set_status(const std::string& status) {
    frag_.stages[idx_].status = status;
  }

 private:
  Fragment& frag_;
  size_t idx_;
  int exceptions_;
  std::chrono::steady_clock::time_point t0_;
};

// Union-merges overlapping boxes (IoU > 0.3) to a fixpoint, then sorts by
// (y, x) for deterministic processing order.
std::vector<backend::BoxDetection> merge_and_sort_boxes(
    std::vector<backend::BoxDetection> boxes, double iou_threshold = 0.3);

// Copies the boxed region out of img. The box must lie within img.
ImageBuffer crop_image(const ImageBuffer& img, const BoundingBox& box);

// Writes src into dst at (x0, y0); src must fit and depths/channels match.
void paste_into(ImageBuffer& dst, const ImageBuffer& src, int x0, int y0);

}  // namespace dr::pipeline
