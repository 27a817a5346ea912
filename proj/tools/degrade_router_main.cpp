// degrade-router: classify image degradations and route each image through
// the matching restoration pipeline.
//
// Exit codes: 0 success, 1 usage/config error, 2 at least one per-item
// failure in an otherwise completed batch.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "dr/backend.hpp"
#include "dr/config.hpp"
#include "dr/error.hpp"
#include "dr/image_io.hpp"
#include "dr/orchestrator.hpp"
#include "dr/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config_path;
  int parallelism = 0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path,
                  "pipeline config JSON (default: builtin plans)")
      ->envname("DEGRADE_ROUTER_CONFIG");
  cmd->add_option("--parallelism", flags.parallelism,
                  "worker count (default: logical cores)");
}

int effective_parallelism(const CommonFlags& flags) {
  if (flags.parallelism > 0) return flags.parallelism;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

dr::PipelineConfig load_config(const CommonFlags& flags) {
  if (flags.config_path.empty()) return dr::PipelineConfig::defaults();
  return dr::PipelineConfig::load(flags.config_path);
}

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// A file is itself; a directory contributes its image files sorted by name.
std::vector<fs::path> collect_inputs(const std::string& input) {
  const fs::path p(input);
  if (fs::is_regular_file(p)) return {p};
  if (!fs::is_directory(p)) {
    throw dr::Error(dr::ErrorKind::IoError,
                    "input path not found: " + input);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(p)) {
    if (entry.is_regular_file() && has_image_extension(entry.path())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw dr::Error(dr::ErrorKind::IoError,
                    "no images found in directory: " + input);
  }
  return files;
}

// Stems name output files; duplicate stems get a positional suffix.
std::vector<std::string> unique_ids(const std::vector<fs::path>& files) {
  std::map<std::string, int> seen;
  for (const auto& f : files) seen[f.stem().string()]++;
  std::map<std::string, int> used;
  std::vector<std::string> ids;
  ids.reserve(files.size());
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    if (seen[stem] == 1) {
      ids.push_back(stem);
    } else {
      ids.push_back(stem + "_" + std::to_string(++used[stem]));
    }
  }
  return ids;
}

int cmd_classify(const CommonFlags& flags, const std::string& input,
                 const std::string& mode_override) {
  dr::PipelineConfig config = load_config(flags);
  if (!mode_override.empty()) {
    if (!dr::parse_classifier_mode(mode_override, config.classifier.mode)) {
      throw dr::Error(dr::ErrorKind::ConfigError,
                      "unknown mode: " + mode_override);
    }
    config.validate();
  }
  const std::vector<fs::path> files = collect_inputs(input);

  std::vector<std::string> lines(files.size());
  std::atomic<bool> any_failed{false};
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next.fetch_add(1); i < files.size();
         i = next.fetch_add(1)) {
      json j;
      j["path"] = files[i].string();
      try {
        const dr::ImageBuffer img = dr::io::load_image(files[i]);
        const dr::ClassificationOutcome outcome =
            dr::classify_image(img, config.classifier);
        j["category"] = dr::category_name(outcome.category);
        j["confidence"] = outcome.confidence;
        j["source"] = outcome.source == dr::ClassifierSource::Heuristic
                          ? "heuristic"
                          : "vlm";
      } catch (const std::exception& e) {
        j["error"] = e.what();
        any_failed = true;
      }
      lines[i] = j.dump();
    }
  };
  const int workers =
      std::min<int>(effective_parallelism(flags),
                    static_cast<int>(files.size()));
  std::vector<std::thread> threads;
  for (int t = 0; t < workers - 1; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();

  for (const auto& line : lines) std::cout << line << "\n";
  return any_failed ? 2 : 0;
}

int cmd_enhance(const CommonFlags& flags, const std::string& input,
                const std::string& output_dir, const std::string& report_path,
                const std::string& reference_dir) {
  const dr::PipelineConfig config = load_config(flags);
  const std::vector<fs::path> files = collect_inputs(input);
  const std::vector<std::string> ids = unique_ids(files);

  std::vector<dr::BatchItem> items;
  items.reserve(files.size());
  for (size_t i = 0; i < files.size(); ++i) {
    dr::BatchItem item;
    item.id = ids[i];
    item.input_path = files[i].string();
    if (!reference_dir.empty()) {
      const fs::path same_name = fs::path(reference_dir) / files[i].filename();
      if (fs::exists(same_name)) {
        item.reference_path = same_name.string();
      } else {
        for (const char* ext : {".png", ".jpg", ".jpeg"}) {
          const fs::path candidate =
              fs::path(reference_dir) / (files[i].stem().string() + ext);
          if (fs::exists(candidate)) {
            item.reference_path = candidate.string();
            break;
          }
        }
      }
    }
    items.push_back(std::move(item));
  }

  const std::vector<dr::EnhancementReport> reports = dr::enhance_batch(
      items, config, effective_parallelism(flags), output_dir);

  std::ofstream report_file;
  std::ostream* out = &std::cout;
  if (!report_path.empty()) {
    report_file.open(report_path, std::ios::trunc);
    if (!report_file) {
      throw dr::Error(dr::ErrorKind::IoError,
                      "cannot write report file: " + report_path);
    }
    out = &report_file;
  }
  bool any_failed = false;
  for (const auto& rep : reports) {
    *out << rep.to_json_line() << "\n";
    any_failed = any_failed || !rep.ok;
  }
  return any_failed ? 2 : 0;
}

int cmd_synth(const std::string& clean_dir, const std::string& out_dir,
              const std::string& grid_arg, uint64_t seed) {
  dr::synth::SpecGrid grid;
  if (grid_arg.empty() || grid_arg == "default") {
    grid = dr::synth::SpecGrid::defaults();
  } else if (grid_arg == "mid_or_higher") {
    grid = dr::synth::SpecGrid::mid_or_higher();
  } else {
    std::ifstream in(grid_arg, std::ios::binary);
    if (!in) {
      throw dr::Error(dr::ErrorKind::IoError,
                      "cannot read grid file: " + grid_arg);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    grid = dr::synth::SpecGrid::from_json(buf.str());
  }
  dr::synth::make_corpus(clean_dir, grid, out_dir, seed);
  std::cout << (fs::path(out_dir) / "manifest.json").string() << "\n";
  return 0;
}

int cmd_eval(const CommonFlags& flags, const std::string& manifest_path) {
  const dr::PipelineConfig config = load_config(flags);
  const dr::synth::CorpusManifest manifest =
      dr::synth::CorpusManifest::load(manifest_path);
  const std::string manifest_dir =
      fs::path(manifest_path).parent_path().string();
  const dr::EvalSummary summary = dr::evaluate(
      manifest, manifest_dir, config, effective_parallelism(flags));
  std::cout << summary.to_json();
  std::cout << summary.to_text_table();
  return (summary.skipped_files > 0 || summary.failed > 0) ? 2 : 0;
}

int cmd_backends(const CommonFlags& flags) {
  const dr::PipelineConfig config = load_config(flags);
  std::vector<const dr::backend::BackendDescriptor*> descs;
  if (config.classifier.backend) descs.push_back(&*config.classifier.backend);
  descs.push_back(&config.sr.base);
  descs.push_back(&config.sr.text_detector);
  descs.push_back(&config.sr.text_restorer);
  descs.push_back(&config.reflection.detector);
  descs.push_back(&config.reflection.inpainter);
  descs.push_back(&config.reflection.refiner);
  descs.push_back(&config.deblur.deblurrer);
  descs.push_back(&config.deblur.face_detector);
  descs.push_back(&config.deblur.face_enhancer);

  std::printf("%-22s %-22s %-11s %-28s %s\n", "name", "role", "transport",
              "target", "status");
  for (const auto* d : descs) {
    const dr::backend::HealthStatus status = dr::backend::health_check(*d);
    const std::string status_text =
        status.ok ? "ok" : "unavailable: " + status.reason;
    std::printf("%-22s %-22s %-11s %-28s %s\n", d->name.c_str(),
                dr::backend::role_name(d->role),
                dr::backend::transport_name(d->transport), d->target.c_str(),
                status_text.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"degradation-aware image enhancement engine"};
  app.require_subcommand(1);

  CommonFlags classify_flags;
  std::string classify_input;
  std::string classify_mode;
  CLI::App* classify =
      app.add_subcommand("classify", "print degradation category per image");
  add_common_flags(classify, classify_flags);
  classify->add_option("--input", classify_input, "image file or directory")
      ->required();
  classify->add_option("--mode", classify_mode,
                       "heuristic|vlm|vlm_with_fallback (overrides config)");

  CommonFlags enhance_flags;
  std::string enhance_input;
  std::string enhance_output;
  std::string enhance_report;
  std::string enhance_reference;
  CLI::App* enhance =
      app.add_subcommand("enhance", "restore images into an output directory");
  add_common_flags(enhance, enhance_flags);
  enhance->add_option("--input", enhance_input, "image file or directory")
      ->required();
  enhance->add_option("--output", enhance_output, "output directory")
      ->required();
  enhance->add_option("--report", enhance_report,
                      "write JSON-lines reports here (default: stdout)");
  enhance->add_option("--reference", enhance_reference,
                      "clean reference directory for PSNR/SSIM deltas");

  std::string synth_clean;
  std::string synth_out;
  std::string synth_grid = "default";
  uint64_t synth_seed = 42;
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a labeled degradation corpus with a manifest");
  synth->add_option("--clean", synth_clean, "directory of clean images")
      ->required();
  synth->add_option("--out", synth_out, "corpus output directory")->required();
  synth->add_option("--grid", synth_grid,
                    "default|mid_or_higher|path to a grid JSON file");
  synth->add_option("--seed", synth_seed, "corpus seed");

  CommonFlags eval_flags;
  std::string eval_manifest;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "classification accuracy and quality deltas over a corpus");
  add_common_flags(eval_cmd, eval_flags);
  eval_cmd->add_option("--manifest", eval_manifest, "corpus manifest path")
      ->required();

  CommonFlags backends_flags;
  CLI::App* backends =
      app.add_subcommand("backends", "health-check all configured backends");
  add_common_flags(backends, backends_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (classify->parsed()) {
      return cmd_classify(classify_flags, classify_input, classify_mode);
    }
    if (enhance->parsed()) {
      return cmd_enhance(enhance_flags, enhance_input, enhance_output,
                         enhance_report, enhance_reference);
    }
    if (synth->parsed()) {
      return cmd_synth(synth_clean, synth_out, synth_grid, synth_seed);
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(eval_flags, eval_manifest);
    }
    if (backends->parsed()) {
      return cmd_backends(backends_flags);
    }
  } catch (const dr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
