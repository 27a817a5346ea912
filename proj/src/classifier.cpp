#include "dr/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "json.hpp"

#include "dr/error.hpp"

using nlohmann::json;

namespace dr {

namespace {

double margin_over(double value, double threshold) {
  return (value - threshold) / std::max(threshold, 1e-9);
}

double margin_under(double value, double threshold) {
  return (threshold - value) / std::max(threshold, 1e-9);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

ThresholdConfig ThresholdConfig::defaults() {
  ThresholdConfig t;
  t.t_hl = 0.02;
  t.t_aniso = 0.5;
  t.t_sharp = 300.0;
  t.t_noise = 12.0;
  t.t_block = 1.5;
  t.t_blur = 80.0;
  return t;
}

ThresholdConfig ThresholdConfig::from_json_text(const std::string& text) {
  ThresholdConfig t;
  try {
    const json j = json::parse(text);
    t.t_hl = j.at("t_hl").get<double>();
    t.t_aniso = j.at("t_aniso").get<double>();
    t.t_sharp = j.at("t_sharp").get<double>();
    t.t_noise = j.at("t_noise").get<double>();
    t.t_block = j.at("t_block").get<double>();
    t.t_blur = j.at("t_blur").get<double>();
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::ConfigError,
                std::string("bad threshold config: ") + ex.what());
  }
  return t;
}

std::string ThresholdConfig::to_json_text() const {
  json j;
  j["t_hl"] = t_hl;
  j["t_aniso"] = t_aniso;
  j["t_sharp"] = t_sharp;
  j["t_noise"] = t_noise;
  j["t_block"] = t_block;
  j["t_blur"] = t_blur;
  return j.dump(2) + "\n";
}

ClassificationOutcome classify_heuristic(const FeatureVector& f,
                                         const ThresholdConfig& t) {
  // firing margins, positive when the rule's predicate holds
  const double m_b = margin_over(f.highlight_ratio, t.t_hl);
  const double m_c = std::min(margin_over(f.gradient_anisotropy, t.t_aniso),
                              margin_under(f.laplacian_variance, t.t_sharp));
  const double m_blur = f.laplacian_variance > 0.0
                            ? margin_under(f.laplacian_variance, t.t_blur)
                            : -1.0;
  const double m_a = std::max({margin_over(f.noise_estimate, t.t_noise),
                               margin_over(f.blockiness, t.t_block), m_blur});

  ClassificationOutcome out;
  out.source = ClassifierSource::Heuristic;
  out.features = f;
  if (m_b > 0.0) {
    out.category = Category::B;
    out.confidence = clamp01(m_b);
  } else if (m_c > 0.0) {
    out.category = Category::C;
    out.confidence = clamp01(m_c);
  } else if (m_a > 0.0) {
    out.category = Category::A;
    out.confidence = clamp01(m_a);
  } else {
    out.category = Category::D;
    out.confidence = clamp01(-std::max({m_b, m_c, m_a}));
  }
  return out;
}

std::string build_vlm_prompt() {
  return "Analyze this image and determine the type of image degradation it "
         "exhibits. Categorize it into one of the following degradation "
         "types: A. Super-resolution degradation (including noise, blur, "
         "JPEG compression); B. Reflection artifacts; C. Motion blur; D. No "
         "visible degradation (high-quality image). Provide a simple result, "
         "i.e. A, B, C, or D.";
}

Category parse_vlm_response(const std::string& text) {
  auto is_word = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
  };
  // last standalone letter token; with one distinct letter this equals the
  // first match, with several the restatement nearest the end wins
  bool found = false;
  Category last_cat = Category::D;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = static_cast<char>(
        std::toupper(static_cast<unsigned char>(text[i])));
    if (c < 'A' || c > 'D') continue;
    if (i > 0 && is_word(text[i - 1])) continue;
    if (i + 1 < text.size() && is_word(text[i + 1])) continue;
    last_cat = static_cast<Category>(c - 'A');
    found = true;
  }
  if (!found) {
    throw Error(ErrorKind::UnparseableResponse,
                "no category letter in reply: " + text);
  }
  return last_cat;
}

}  // namespace dr
