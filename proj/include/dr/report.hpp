#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dr/category.hpp"
#include "dr/classifier.hpp"
#include "dr/pipeline.hpp"

namespace dr {

// Full-reference quality before/after restoration; +inf PSNR serializes as
// the string "inf".
struct ReferenceMetrics {
  double psnr_in = 0.0;
  double psnr_out = 0.0;
  double ssim_in = 0.0;
  double ssim_out = 0.0;
};

// Per-image record: classification, the stages that actually ran (a prefix
// of the route's stage list when the pipeline aborted), masks, timings, and
// optional reference metrics. One JSON object per line in batch output.
struct EnhancementReport {
  std::string input_id;
  bool ok = true;
  std::string error;         // error kind name when !ok
  std::string error_detail;  // human-readable message when !ok
  std::optional<ClassificationOutcome> outcome;
  Category route = Category::D;
  std::vector<pipeline::StageRecord> stages;
  std::map<std::string, double> mask_fractions;
  bool needs_review = false;
  std::optional<pipeline::MotionKernelEstimate> kernel;
  std::optional<ReferenceMetrics> metrics;

  std::string to_json_line() const;  // single line, no trailing newline
};

// Corpus-level aggregation: rows are ground-truth categories A..D, columns
// are routed categories.
struct EvalSummary {
  std::array<std::array<long, 4>, 4> confusion{};
  long total_entries = 0;   // manifest entries considered
  long evaluated = 0;       // entries that ran to a routed category
  long skipped_files = 0;   // missing degraded or reference files
  long failed = 0;          // entries whose enhancement errored

  // Mean PSNR/SSIM delta (restored minus degraded, against the clean
  // reference) per ground-truth category; sample counts exclude entries
  // with infinite PSNR.
  std::array<double, 4> mean_delta_psnr{};
  std::array<long, 4> psnr_samples{};
  std::array<double, 4> mean_delta_ssim{};
  std::array<long, 4> ssim_samples{};

  long row_total(int truth) const;
  double recall(int truth) const;  // NaN when the row is empty
  double overall_accuracy() const;

  std::string to_json() const;
  std::string to_text_table() const;
};

}  // namespace dr
