#include "dr/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dr/error.hpp"

namespace dr {

namespace {

using nlohmann::json;

[[noreturn]] void bad_config(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::ConfigError,
              path.empty() ? what : what + " at " + path);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& path) {
  if (!obj.is_object()) bad_config(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      bad_config(path.empty() ? key : path + "." + key,
                 "unknown key '" + key + "'");
    }
  }
}

double number_at(const json& obj, const char* key, double fallback,
                 const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) bad_config(path + "." + key, "expected a number");
  return v.get<double>();
}

std::string param_value_to_string(const json& v, const std::string& path) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  bad_config(path, "params values must be strings, numbers, or booleans");
}

backend::BackendDescriptor descriptor_from_json(const json& obj,
                                                backend::Role slot_role,
                                                const std::string& slot_name,
                                                const std::string& path) {
  check_keys(obj, {"name", "role", "transport", "target", "timeout", "params"},
             path);
  backend::BackendDescriptor desc;
  desc.role = slot_role;
  desc.name = slot_name;
  if (obj.contains("name")) {
    if (!obj.at("name").is_string()) {
      bad_config(path + ".name", "expected a string");
    }
    desc.name = obj.at("name").get<std::string>();
  }
  if (obj.contains("role")) {
    if (!obj.at("role").is_string()) {
      bad_config(path + ".role", "expected a string");
    }
    backend::Role declared;
    if (!backend::parse_role(obj.at("role").get<std::string>(), declared)) {
      bad_config(path + ".role", "unknown role");
    }
    if (declared != slot_role) {
      bad_config(path + ".role",
                 std::string("slot requires role ") +
                     backend::role_name(slot_role));
    }
  }
  if (!obj.contains("transport") || !obj.at("transport").is_string()) {
    bad_config(path + ".transport", "required string");
  }
  if (!backend::parse_transport(obj.at("transport").get<std::string>(),
                                desc.transport)) {
    bad_config(path + ".transport", "unknown transport");
  }
  if (!obj.contains("target") || !obj.at("target").is_string()) {
    bad_config(path + ".target", "required string");
  }
  desc.target = obj.at("target").get<std::string>();
  desc.timeout_seconds = number_at(obj, "timeout", desc.timeout_seconds, path);
  if (obj.contains("params")) {
    const json& p = obj.at("params");
    if (!p.is_object()) bad_config(path + ".params", "expected an object");
    for (const auto& [key, value] : p.items()) {
      desc.params[key] =
          param_value_to_string(value, path + ".params." + key);
    }
  }
  return desc;
}

json descriptor_to_json(const backend::BackendDescriptor& desc) {
  json j;
  j["name"] = desc.name;
  j["role"] = backend::role_name(desc.role);
  j["transport"] = backend::transport_name(desc.transport);
  j["target"] = desc.target;
  j["timeout"] = desc.timeout_seconds;
  j["params"] = json::object();
  for (const auto& [k, v] : desc.params) j["params"][k] = v;
  return j;
}

backend::BackendDescriptor builtin_descriptor(
    const std::string& name, backend::Role role, const std::string& target,
    std::map<std::string, std::string> params = {}) {
  backend::BackendDescriptor desc;
  desc.name = name;
  desc.role = role;
  desc.transport = backend::Transport::Builtin;
  desc.target = target;
  desc.params = std::move(params);
  return desc;
}

void parse_thresholds(const json& obj, ThresholdConfig& out,
                      const std::string& path) {
  check_keys(obj, {"t_hl", "t_aniso", "t_sharp", "t_noise", "t_block",
                   "t_blur"},
             path);
  out.t_hl = number_at(obj, "t_hl", out.t_hl, path);
  out.t_aniso = number_at(obj, "t_aniso", out.t_aniso, path);
  out.t_sharp = number_at(obj, "t_sharp", out.t_sharp, path);
  out.t_noise = number_at(obj, "t_noise", out.t_noise, path);
  out.t_block = number_at(obj, "t_block", out.t_block, path);
  out.t_blur = number_at(obj, "t_blur", out.t_blur, path);
}

}  // namespace

const char* classifier_mode_name(ClassifierMode mode) {
  switch (mode) {
    case ClassifierMode::Heuristic:
      return "heuristic";
    case ClassifierMode::Vlm:
      return "vlm";
    case ClassifierMode::VlmWithFallback:
      return "vlm_with_fallback";
  }
  return "heuristic";
}

bool parse_classifier_mode(const std::string& name, ClassifierMode& out) {
  if (name == "heuristic") {
    out = ClassifierMode::Heuristic;
  } else if (name == "vlm") {
    out = ClassifierMode::Vlm;
  } else if (name == "vlm_with_fallback") {
    out = ClassifierMode::VlmWithFallback;
  } else {
    return false;
  }
  return true;
}

void PipelineConfig::validate() const {
  if (classifier.mode != ClassifierMode::Heuristic) {
    if (!classifier.backend) {
      throw Error(ErrorKind::ConfigError,
                  "classifier backend required outside heuristic mode");
    }
    if (classifier.backend->role != backend::Role::Classifier) {
      throw Error(ErrorKind::ConfigError,
                  "classifier backend must have role classifier");
    }
    classifier.backend->validate();
  }
  sr.validate();
  reflection.validate();
  deblur.validate();
  if (limits.max_pixels <= 0) {
    throw Error(ErrorKind::ConfigError, "limits.max_pixels must be > 0");
  }
  if (!(limits.per_image_timeout >= 0.0)) {
    throw Error(ErrorKind::ConfigError,
                "limits.per_image_timeout must be >= 0");
  }
}

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig cfg;
  cfg.sr.base = builtin_descriptor("base_sr", backend::Role::BaseSr,
                                   "sr_restore",
                                   {{"denoise", "8"}, {"sharpen", "0.5"}});
  cfg.sr.text_detector = builtin_descriptor(
      "text_detector", backend::Role::TextDetector, "text_detect");
  cfg.sr.text_restorer = builtin_descriptor(
      "text_restorer", backend::Role::TextRestorer, "sr_restore",
      {{"denoise", "8"}, {"sharpen", "0.8"}});

  cfg.reflection.detector = builtin_descriptor(
      "reflection_detector", backend::Role::ReflectionDetector,
      "reflect_detect", {{"close_radius", "2"}});
  cfg.reflection.inpainter =
      builtin_descriptor("inpainter", backend::Role::Inpainter,
                         "fast_marching", {{"radius", "5"}});
  cfg.reflection.refiner = builtin_descriptor(
      "refiner", backend::Role::WeakReflectionRefiner, "weak_refine",
      {{"strength", "0.5"}, {"median_radius", "16"}});

  cfg.deblur.deblurrer =
      builtin_descriptor("deblurrer", backend::Role::Deblurrer,
                         "wiener_deblur", {{"nsr", "0.01"}});
  cfg.deblur.face_detector = builtin_descriptor(
      "face_detector", backend::Role::FaceDetector, "none");
  cfg.deblur.face_enhancer = builtin_descriptor(
      "face_enhancer", backend::Role::FaceEnhancer, "identity");
  return cfg;
}

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError,
                std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig cfg = defaults();
  check_keys(root, {"classifier", "sr", "reflection", "deblur", "limits"},
             "");

  if (root.contains("classifier")) {
    const json& c = root.at("classifier");
    check_keys(c, {"mode", "backend", "thresholds"}, "classifier");
    if (c.contains("mode")) {
      if (!c.at("mode").is_string() ||
          !parse_classifier_mode(c.at("mode").get<std::string>(),
                                 cfg.classifier.mode)) {
        bad_config("classifier.mode",
                   "expected heuristic|vlm|vlm_with_fallback");
      }
    }
    if (c.contains("backend")) {
      cfg.classifier.backend = descriptor_from_json(
          c.at("backend"), backend::Role::Classifier, "classifier",
          "classifier.backend");
    }
    if (c.contains("thresholds")) {
      parse_thresholds(c.at("thresholds"), cfg.classifier.thresholds,
                       "classifier.thresholds");
    }
  }

  if (root.contains("sr")) {
    const json& s = root.at("sr");
    check_keys(s, {"base", "text_detector", "text_restorer", "feather_radius",
                   "scale"},
               "sr");
    if (s.contains("base")) {
      cfg.sr.base = descriptor_from_json(s.at("base"), backend::Role::BaseSr,
                                         "base_sr", "sr.base");
    }
    if (s.contains("text_detector")) {
      cfg.sr.text_detector = descriptor_from_json(
          s.at("text_detector"), backend::Role::TextDetector, "text_detector",
          "sr.text_detector");
    }
    if (s.contains("text_restorer")) {
      cfg.sr.text_restorer = descriptor_from_json(
          s.at("text_restorer"), backend::Role::TextRestorer, "text_restorer",
          "sr.text_restorer");
    }
    cfg.sr.feather.radius =
        number_at(s, "feather_radius", cfg.sr.feather.radius, "sr");
    if (s.contains("scale")) {
      if (!s.at("scale").is_number_integer()) {
        bad_config("sr.scale", "expected an integer");
      }
      cfg.sr.scale = s.at("scale").get<int>();
    }
  }

  if (root.contains("reflection")) {
    const json& r = root.at("reflection");
    check_keys(r, {"detector", "inpainter", "refiner", "mask_close_radius",
                   "max_mask_fraction"},
               "reflection");
    if (r.contains("detector")) {
      cfg.reflection.detector = descriptor_from_json(
          r.at("detector"), backend::Role::ReflectionDetector,
          "reflection_detector", "reflection.detector");
    }
    if (r.contains("inpainter")) {
      cfg.reflection.inpainter = descriptor_from_json(
          r.at("inpainter"), backend::Role::Inpainter, "inpainter",
          "reflection.inpainter");
    }
    if (r.contains("refiner")) {
      cfg.reflection.refiner = descriptor_from_json(
          r.at("refiner"), backend::Role::WeakReflectionRefiner, "refiner",
          "reflection.refiner");
    }
    if (r.contains("mask_close_radius")) {
      if (!r.at("mask_close_radius").is_number_integer()) {
        bad_config("reflection.mask_close_radius", "expected an integer");
      }
      cfg.reflection.mask_close_radius = r.at("mask_close_radius").get<int>();
    }
    cfg.reflection.max_mask_fraction =
        number_at(r, "max_mask_fraction", cfg.reflection.max_mask_fraction,
                  "reflection");
  }

  if (root.contains("deblur")) {
    const json& d = root.at("deblur");
    check_keys(d, {"deblurrer", "face_detector", "face_enhancer",
                   "feather_radius", "wiener_nsr", "grid_lengths",
                   "grid_angles"},
               "deblur");
    if (d.contains("deblurrer")) {
      cfg.deblur.deblurrer = descriptor_from_json(
          d.at("deblurrer"), backend::Role::Deblurrer, "deblurrer",
          "deblur.deblurrer");
    }
    if (d.contains("face_detector")) {
      cfg.deblur.face_detector = descriptor_from_json(
          d.at("face_detector"), backend::Role::FaceDetector, "face_detector",
          "deblur.face_detector");
    }
    if (d.contains("face_enhancer")) {
      cfg.deblur.face_enhancer = descriptor_from_json(
          d.at("face_enhancer"), backend::Role::FaceEnhancer, "face_enhancer",
          "deblur.face_enhancer");
    }
    cfg.deblur.feather.radius =
        number_at(d, "feather_radius", cfg.deblur.feather.radius, "deblur");
    cfg.deblur.wiener_nsr =
        number_at(d, "wiener_nsr", cfg.deblur.wiener_nsr, "deblur");
    auto parse_grid = [&](const char* key, std::vector<double>& out) {
      if (!d.contains(key)) return;
      const json& arr = d.at(key);
      if (!arr.is_array()) {
        bad_config(std::string("deblur.") + key, "expected an array");
      }
      out.clear();
      for (const json& v : arr) {
        if (!v.is_number()) {
          bad_config(std::string("deblur.") + key, "expected numbers");
        }
        out.push_back(v.get<double>());
      }
    };
    parse_grid("grid_lengths", cfg.deblur.grid_lengths);
    parse_grid("grid_angles", cfg.deblur.grid_angles);
  }

  if (root.contains("limits")) {
    const json& l = root.at("limits");
    check_keys(l, {"max_pixels", "per_image_timeout"}, "limits");
    if (l.contains("max_pixels")) {
      if (!l.at("max_pixels").is_number_integer()) {
        bad_config("limits.max_pixels", "expected an integer");
      }
      cfg.limits.max_pixels = l.at("max_pixels").get<long>();
    }
    cfg.limits.per_image_timeout = number_at(
        l, "per_image_timeout", cfg.limits.per_image_timeout, "limits");
  }

  cfg.validate();
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot read config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string PipelineConfig::to_json_text() const {
  json j;
  j["classifier"]["mode"] = classifier_mode_name(classifier.mode);
  if (classifier.backend) {
    j["classifier"]["backend"] = descriptor_to_json(*classifier.backend);
  }
  j["classifier"]["thresholds"] = {
      {"t_hl", classifier.thresholds.t_hl},
      {"t_aniso", classifier.thresholds.t_aniso},
      {"t_sharp", classifier.thresholds.t_sharp},
      {"t_noise", classifier.thresholds.t_noise},
      {"t_block", classifier.thresholds.t_block},
      {"t_blur", classifier.thresholds.t_blur},
  };
  j["sr"] = {{"base", descriptor_to_json(sr.base)},
             {"text_detector", descriptor_to_json(sr.text_detector)},
             {"text_restorer", descriptor_to_json(sr.text_restorer)},
             {"feather_radius", sr.feather.radius},
             {"scale", sr.scale}};
  j["reflection"] = {
      {"detector", descriptor_to_json(reflection.detector)},
      {"inpainter", descriptor_to_json(reflection.inpainter)},
      {"refiner", descriptor_to_json(reflection.refiner)},
      {"mask_close_radius", reflection.mask_close_radius},
      {"max_mask_fraction", reflection.max_mask_fraction}};
  j["deblur"] = {{"deblurrer", descriptor_to_json(deblur.deblurrer)},
                 {"face_detector", descriptor_to_json(deblur.face_detector)},
                 {"face_enhancer", descriptor_to_json(deblur.face_enhancer)},
                 {"feather_radius", deblur.feather.radius},
                 {"wiener_nsr", deblur.wiener_nsr},
                 {"grid_lengths", deblur.grid_lengths},
                 {"grid_angles", deblur.grid_angles}};
  j["limits"] = {{"max_pixels", limits.max_pixels},
                 {"per_image_timeout", limits.per_image_timeout}};
  return j.dump(2) + "\n";
}

}  // namespace dr
