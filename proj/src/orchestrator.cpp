#include "dr/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include "dr/error.hpp"
#include "dr/image_io.hpp"
#include "dr/metrics.hpp"
#include "dr/pipeline.hpp"
#include "dr/vlm.hpp"

namespace dr {

namespace fs = std::filesystem;

namespace {

ClassificationOutcome classify_heuristically(const ImageBuffer& img,
                                             const ClassifierConfig& cfg) {
  return classify_heuristic(extract_features(img), cfg.thresholds);
}

void copy_fragment(const pipeline::Fragment& frag, EnhancementReport& rep) {
  rep.stages = frag.stages;
  rep.mask_fractions = frag.mask_fractions;
  rep.needs_review = rep.needs_review || frag.needs_review;
  rep.kernel = frag.kernel;
}

// Claims item indices atomically; results land at their input index so the
// output order never depends on completion order.
void run_pool(size_t n, int parallelism,
              const std::function<void(size_t)>& body) {
  const int workers =
      std::clamp(parallelism, 1, 256);
  if (workers == 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto drain = [&] {
    for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      body(i);
    }
  };
  std::vector<std::thread> threads;
  const int spawned = std::min<size_t>(workers, n) - 1;
  threads.reserve(spawned);
  for (int t = 0; t < spawned; ++t) threads.emplace_back(drain);
  drain();
  for (auto& t : threads) t.join();
}

std::string sanitize_id(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    if (c == '/' || c == '\\' || c == ':') c = '_';
  }
  return out.empty() ? "image" : out;
}

void copy_bytes(const fs::path& from, const fs::path& to) {
  std::ifstream in(from, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + from.string());
  std::ofstream out(to, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + to.string());
  out << in.rdbuf();
  if (!out) throw Error(ErrorKind::IoError, "short write to " + to.string());
}

fs::path resolve_against(const std::string& path, const std::string& base) {
  fs::path p(path);
  if (p.is_absolute()) return p;
  fs::path as_given = p;
  if (fs::exists(as_given)) return as_given;
  return fs::path(base) / p;
}

}  // namespace

ClassificationOutcome classify_image(const ImageBuffer& img,
                                     const ClassifierConfig& cfg,
                                     bool* fell_back) {
  if (fell_back) *fell_back = false;
  switch (cfg.mode) {
    case ClassifierMode::Heuristic:
      return classify_heuristically(img, cfg);
    case ClassifierMode::Vlm: {
      if (!cfg.backend) {
        throw Error(ErrorKind::ConfigError, "vlm mode requires a backend");
      }
      try {
        return classify_vlm(img, *cfg.backend);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::UnparseableResponse) {
          throw Error(ErrorKind::ClassificationFailed, e.what());
        }
        throw;
      }
    }
    case ClassifierMode::VlmWithFallback: {
      if (!cfg.backend) {
        throw Error(ErrorKind::ConfigError, "vlm mode requires a backend");
      }
      for (int attempt = 0; attempt < 2; ++attempt) {
        try {
          return classify_vlm(img, *cfg.backend);
        } catch (const Error&) {
          // One retry, then the heuristic answers.
        }
      }
      if (fell_back) *fell_back = true;
      return classify_heuristically(img, cfg);
    }
  }
  throw Error(ErrorKind::ConfigError, "unknown classifier mode");
}

ImageBuffer enhance_into(const ImageBuffer& img, const PipelineConfig& config,
                         const std::string& input_id,
                         EnhancementReport& report,
                         const ImageBuffer* reference) {
  report.input_id = input_id;
  if (static_cast<long>(img.pixel_count()) > config.limits.max_pixels) {
    throw Error(ErrorKind::ImageTooLarge,
                "image has " + std::to_string(img.pixel_count()) +
                    " pixels, limit is " +
                    std::to_string(config.limits.max_pixels));
  }

  pipeline::Deadline deadline;
  if (config.limits.per_image_timeout > 0.0) {
    deadline = std::chrono::steady_clock::now() +
               std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                   std::chrono::duration<double>(
                       config.limits.per_image_timeout));
  }

  bool fell_back = false;
  const ClassificationOutcome outcome =
      classify_image(img, config.classifier, &fell_back);
  report.outcome = outcome;
  report.route = outcome.category;
  report.needs_review = fell_back;

  pipeline::Fragment frag;
  ImageBuffer out;
  try {
    switch (outcome.category) {
      case Category::A:
        out = pipeline::run_sr_pipeline(img, config.sr, frag, deadline);
        break;
      case Category::B:
        out = pipeline::run_reflection_pipeline(img, config.reflection, frag,
                                                deadline);
        break;
      case Category::C:
        out = pipeline::run_deblur_pipeline(img, config.deblur, frag,
                                            deadline);
        break;
      case Category::D:
        out = img;
        break;
    }
  } catch (...) {
    copy_fragment(frag, report);
    throw;
  }
  copy_fragment(frag, report);

  if (reference && reference->same_shape(img) && out.same_shape(img)) {
    ReferenceMetrics m;
    m.psnr_in = metrics::psnr(img, *reference);
    m.psnr_out = metrics::psnr(out, *reference);
    m.ssim_in = metrics::ssim(img, *reference);
    m.ssim_out = metrics::ssim(out, *reference);
    report.metrics = m;
  }
  return out;
}

EnhanceResult enhance(const ImageBuffer& img, const PipelineConfig& config,
                      const std::string& input_id) {
  EnhanceResult result;
  result.image = enhance_into(img, config, input_id, result.report);
  return result;
}

std::vector<EnhancementReport> enhance_batch(
    const std::vector<BatchItem>& items, const PipelineConfig& config,
    int parallelism, const std::string& output_dir) {
  if (items.empty()) {
    throw Error(ErrorKind::EmptyBatch, "no inputs to enhance");
  }
  if (!output_dir.empty()) {
    fs::create_directories(output_dir);
  }

  std::vector<EnhancementReport> reports(items.size());
  run_pool(items.size(), parallelism, [&](size_t i) {
    const BatchItem& item = items[i];
    EnhancementReport rep;
    rep.input_id = item.id;
    try {
      const ImageBuffer img = io::load_image(item.input_path);
      std::optional<ImageBuffer> ref;
      if (item.reference_path) {
        ref = io::load_image(*item.reference_path);
      }
      const ImageBuffer out =
          enhance_into(img, config, item.id, rep, ref ? &*ref : nullptr);
      if (!output_dir.empty()) {
        const std::string stem = sanitize_id(item.id);
        if (rep.route == Category::D) {
          const fs::path src(item.input_path);
          copy_bytes(src, fs::path(output_dir) /
                              (stem + src.extension().string()));
        } else {
          io::save_png(out, fs::path(output_dir) / (stem + ".png"));
        }
      }
    } catch (const Error& e) {
      rep.ok = false;
      rep.error = e.kind_name();
      rep.error_detail = e.what();
    } catch (const std::exception& e) {
      rep.ok = false;
      rep.error = "internal";
      rep.error_detail = e.what();
    }
    reports[i] = std::move(rep);
  });
  return reports;
}

EvalSummary evaluate(const synth::CorpusManifest& manifest,
                     const std::string& manifest_dir,
                     const PipelineConfig& config, int parallelism) {
  struct EntryResult {
    bool skipped = false;
    bool failed = false;
    int truth = 3;
    int predicted = 3;
    std::optional<double> dpsnr;
    std::optional<double> dssim;
  };

  const size_t n = manifest.entries.size();
  std::vector<EntryResult> results(n);
  run_pool(n, parallelism, [&](size_t i) {
    const synth::CorpusEntry& entry = manifest.entries[i];
    EntryResult r;
    r.truth = static_cast<int>(entry.spec.category());
    const fs::path degraded_path =
        resolve_against(entry.degraded, manifest_dir);
    const fs::path clean_path = resolve_against(entry.clean, manifest_dir);
    if (!fs::exists(degraded_path) || !fs::exists(clean_path)) {
      r.skipped = true;
      results[i] = r;
      return;
    }
    try {
      const ImageBuffer degraded = io::load_image(degraded_path);
      const ImageBuffer clean = io::load_image(clean_path);
      EnhancementReport rep;
      const ImageBuffer out =
          enhance_into(degraded, config, entry.degraded, rep);
      r.predicted = static_cast<int>(rep.route);
      if (clean.same_shape(degraded) && out.same_shape(degraded)) {
        const double p_in = metrics::psnr(degraded, clean);
        const double p_out = metrics::psnr(out, clean);
        if (std::isfinite(p_in) && std::isfinite(p_out)) {
          r.dpsnr = p_out - p_in;
        }
        r.dssim = metrics::ssim(out, clean) - metrics::ssim(degraded, clean);
      }
    } catch (const std::exception&) {
      r.failed = true;
    }
    results[i] = r;
  });

  EvalSummary summary;
  summary.total_entries = static_cast<long>(n);
  std::array<double, 4> psnr_sum{};
  std::array<double, 4> ssim_sum{};
  for (const EntryResult& r : results) {
    if (r.skipped) {
      ++summary.skipped_files;
      continue;
    }
    if (r.failed) {
      ++summary.failed;
      continue;
    }
    ++summary.evaluated;
    summary.confusion[r.truth][r.predicted]++;
    if (r.dpsnr) {
      psnr_sum[r.truth] += *r.dpsnr;
      summary.psnr_samples[r.truth]++;
    }
    if (r.dssim) {
      ssim_sum[r.truth] += *r.dssim;
      summary.ssim_samples[r.truth]++;
    }
  }
  for (int t = 0; t < 4; ++t) {
    if (summary.psnr_samples[t] > 0) {
      summary.mean_delta_psnr[t] = psnr_sum[t] / summary.psnr_samples[t];
    }
    if (summary.ssim_samples[t] > 0) {
      summary.mean_delta_ssim[t] = ssim_sum[t] / summary.ssim_samples[t];
    }
  }
  return summary;
}

}  // namespace dr
