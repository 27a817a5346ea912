#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dr/config.hpp"
#include "dr/image.hpp"
#include "dr/report.hpp"
#include "dr/synth.hpp"

namespace dr {

// Classification per the configured mode. vlm_with_fallback retries the
// endpoint once, then answers heuristically; `fell_back` reports that path.
ClassificationOutcome classify_image(const ImageBuffer& img,
                                     const ClassifierConfig& cfg,
                                     bool* fell_back = nullptr);

// Classify-then-route on one image. `report` is filled in place so the
// stages completed before a throw remain visible; on success the routed
// output is returned (route D returns the input unchanged). A non-null
// `reference` adds before/after PSNR/SSIM to the report.
ImageBuffer enhance_into(const ImageBuffer& img, const PipelineConfig& config,
                         const std::string& input_id,
                         EnhancementReport& report,
                         const ImageBuffer* reference = nullptr);

struct EnhanceResult {
  ImageBuffer image;
  EnhancementReport report;
};

EnhanceResult enhance(const ImageBuffer& img, const PipelineConfig& config,
                      const std::string& input_id = "");

struct BatchItem {
  std::string id;          // report input id; also names the output file
  std::string input_path;
  std::optional<std::string> reference_path;
};

// Runs enhance over every item with a worker pool. Reports come back in
// input order; one failure yields one failed report, never a batch abort.
// A non-empty output_dir receives one file per successful item: route D
// copies the input bytes verbatim, other routes write "<id>.png".
std::vector<EnhancementReport> enhance_batch(
    const std::vector<BatchItem>& items, const PipelineConfig& config,
    int parallelism, const std::string& output_dir = "");

// Runs enhance over every degraded corpus entry and aggregates the
// confusion matrix and quality deltas against the clean references.
// Relative paths resolve against manifest_dir.
EvalSummary evaluate(const synth::CorpusManifest& manifest,
                     const std::string& manifest_dir,
                     const PipelineConfig& config, int parallelism);

}  // namespace dr
