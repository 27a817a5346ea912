#pragma once

#include <optional>
#include <string>

#include "dr/backend.hpp"
#include "dr/classifier.hpp"
#include "dr/pipeline.hpp"

namespace dr {

enum class ClassifierMode { Heuristic, Vlm, VlmWithFallback };

const char* classifier_mode_name(ClassifierMode mode);
bool parse_classifier_mode(const std::string& name, ClassifierMode& out);

struct ClassifierConfig {
  ClassifierMode mode = ClassifierMode::Heuristic;
  std::optional<backend::BackendDescriptor> backend;  // role classifier
  ThresholdConfig thresholds = ThresholdConfig::defaults();
};

struct Limits {
  long max_pixels = 50'000'000;
  double per_image_timeout = 120.0;  // seconds; 0 disables the deadline
};

// Whole-engine configuration. JSON documents reject unknown keys with the
// offending path named; missing sections keep their defaults.
struct PipelineConfig {
  ClassifierConfig classifier;
  pipeline::SrPlan sr;
  pipeline::ReflectionPlan reflection;
  pipeline::DeblurPlan deblur;
  Limits limits;

  void validate() const;  // throws ConfigError

  static PipelineConfig defaults();  // all-builtin plans
  static PipelineConfig from_json_text(const std::string& text);
  static PipelineConfig load(const std::string& path);  // IoError on read
  std::string to_json_text() const;
};

}  // namespace dr
