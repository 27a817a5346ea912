#include "dr/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "httplib.h"
#include "json.hpp"

#include "dr/color.hpp"
#include "dr/error.hpp"
#include "dr/image_io.hpp"

using nlohmann::json;

namespace dr::backend {

namespace {

constexpr const char* kProtocolVersion = "1";

const char* kRoleNames[] = {
    "base_sr",        "text_restorer",
    "text_detector",  "reflection_detector",
    "inpainter",      "weak_reflection_refiner",
    "deblurrer",      "face_detector",
    "face_enhancer",  "classifier",
};

}  // namespace

std::string base64_encode(const std::vector<uint8_t>& bytes) {
  static const char* tbl =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (size_t i = 0; i < bytes.size(); i += 3) {
    uint32_t v = uint32_t(bytes[i]) << 16;
    if (i + 1 < bytes.size()) v |= uint32_t(bytes[i + 1]) << 8;
    if (i + 2 < bytes.size()) v |= uint32_t(bytes[i + 2]);
    out.push_back(tbl[(v >> 18) & 63]);
    out.push_back(tbl[(v >> 12) & 63]);
    out.push_back(i + 1 < bytes.size() ? tbl[(v >> 6) & 63] : '=');
    out.push_back(i + 2 < bytes.size() ? tbl[v & 63] : '=');
  }
  return out;
}

std::vector<uint8_t> base64_decode(const std::string& text) {
  auto val = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<uint8_t> out;
  int buf = 0, bits = 0;
  for (const char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = val(c);
    if (v < 0)
      throw Error(ErrorKind::BackendProtocolError, "bad base64 payload");
    buf = (buf << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<uint8_t>((buf >> bits) & 0xFF));
    }
  }
  return out;
}

namespace {

struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path = "/";
};

ParsedUrl parse_url(const std::string& url) {
  const std::string prefix = "http://";
  if (url.rfind(prefix, 0) != 0) {
    throw Error(ErrorKind::ConfigError, "only http:// targets supported: " + url);
  }
  ParsedUrl p;
  std::string rest = url.substr(prefix.size());
  const size_t slash = rest.find('/');
  std::string hostport = rest.substr(0, slash);
  if (slash != std::string::npos) p.path = rest.substr(slash);
  const size_t colon = hostport.find(':');
  if (colon == std::string::npos) {
    p.host = hostport;
  } else {
    p.host = hostport.substr(0, colon);
    p.port = std::stoi(hostport.substr(colon + 1));
  }
  if (p.host.empty())
    throw Error(ErrorKind::ConfigError, "bad URL: " + url);
  return p;
}

void validate_image_output(const BackendDescriptor& desc,
                           const ImageBuffer& in, const ImageBuffer& out) {
  const int s = desc.scale();
  if (out.width() != in.width() * s || out.height() != in.height() * s) {
    throw Error(ErrorKind::BackendProtocolError,
                "backend '" + desc.name + "' returned " +
                    std::to_string(out.width()) + "x" +
                    std::to_string(out.height()) + " for " +
                    std::to_string(in.width()) + "x" +
                    std::to_string(in.height()) + " input (scale " +
                    std::to_string(s) + ")");
  }
}

ImageBuffer decode_backend_png(const BackendDescriptor& desc,
                               const std::vector<uint8_t>& bytes) {
  try {
    return io::decode_png(bytes);
  } catch (const Error&) {
    throw Error(ErrorKind::BackendProtocolError,
                "backend '" + desc.name + "' returned undecodable image data");
  }
}

httplib::Result http_post(const BackendDescriptor& desc,
                          const std::string& body,
                          const std::string& content_type) {
  const ParsedUrl url = parse_url(desc.target);
  httplib::Client cli(url.host, url.port);
  const auto timeout_ms =
      static_cast<int>(std::max(0.001, desc.timeout_seconds) * 1000.0);
  cli.set_connection_timeout(0, timeout_ms * 1000);
  cli.set_read_timeout(0, timeout_ms * 1000);
  cli.set_write_timeout(0, timeout_ms * 1000);
  httplib::Headers headers = {{"X-Protocol-Version", kProtocolVersion}};
  return cli.Post(url.path, headers, body, content_type);
}

[[noreturn]] void throw_http_error(const BackendDescriptor& desc,
                                   const httplib::Result& res) {
  switch (res.error()) {
    case httplib::Error::Connection:
    case httplib::Error::ConnectionTimeout:
    case httplib::Error::BindIPAddress:
    case httplib::Error::SSLConnection:
      throw Error(ErrorKind::BackendUnavailable,
                  "backend '" + desc.name + "' unreachable: " + desc.target);
    case httplib::Error::Read:
    case httplib::Error::Write:
      throw Error(ErrorKind::BackendTimeout,
                  "backend '" + desc.name + "' timed out after " +
                      std::to_string(desc.timeout_seconds) + "s");
    default:
      throw Error(ErrorKind::BackendUnavailable,
                  "backend '" + desc.name +
                      "' transport failure: " + httplib::to_string(res.error()));
  }
}

}  // namespace

std::string http_exchange(const BackendDescriptor& desc,
                          const std::string& body,
                          const std::string& content_type) {
  auto res = http_post(desc, body, content_type);
  if (!res) throw_http_error(desc, res);
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorKind::BackendError,
                "backend '" + desc.name + "' returned HTTP " +
                    std::to_string(res->status),
                res->status);
  }
  return res->body;
}

const char* role_name(Role role) {
  return kRoleNames[static_cast<int>(role)];
}

bool parse_role(const std::string& name, Role& out) {
  for (int i = 0; i < 10; ++i) {
    if (name == kRoleNames[i]) {
      out = static_cast<Role>(i);
      return true;
    }
  }
  return false;
}

bool is_detector_role(Role role) {
  return role == Role::TextDetector || role == Role::ReflectionDetector ||
         role == Role::FaceDetector;
}

bool is_image_role(Role role) {
  return role == Role::BaseSr || role == Role::TextRestorer ||
         role == Role::WeakReflectionRefiner || role == Role::Deblurrer ||
         role == Role::FaceEnhancer;
}

const char* transport_name(Transport t) {
  switch (t) {
    case Transport::Builtin: return "builtin";
    case Transport::Subprocess: return "subprocess";
    default: return "http";
  }
}

bool parse_transport(const std::string& name, Transport& out) {
  if (name == "builtin") out = Transport::Builtin;
  else if (name == "subprocess") out = Transport::Subprocess;
  else if (name == "http") out = Transport::Http;
  else return false;
  return true;
}

void BackendDescriptor::validate() const {
  if (timeout_seconds <= 0.0) {
    throw Error(ErrorKind::ConfigError,
                "backend '" + name + "': timeout must be positive");
  }
  if (target.empty()) {
    throw Error(ErrorKind::ConfigError,
                "backend '" + name + "': empty target");
  }
  if (transport == Transport::Builtin) {
    auto& reg = Registry::instance();
    const bool known = role == Role::Inpainter ? reg.has_inpaint(target)
                       : is_detector_role(role) ? reg.has_detector(target)
                                                : reg.has_image(target);
    if (!known) {
      throw Error(ErrorKind::ConfigError,
                  "backend '" + name + "': no builtin named '" + target +
                      "' for role " + role_name(role));
    }
  }
}

int BackendDescriptor::scale() const {
  const int s = param_int("scale", 1);
  if (s < 1)
    throw Error(ErrorKind::ConfigError,
                "backend '" + name + "': scale must be >= 1");
  return s;
}

double BackendDescriptor::param_double(const std::string& key,
                                       double fallback) const {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigError,
                "backend '" + name + "': param " + key + " is not a number");
  }
}

int BackendDescriptor::param_int(const std::string& key, int fallback) const {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigError,
                "backend '" + name + "': param " + key + " is not an integer");
  }
}

Registry& Registry::instance() {
  static Registry reg;
  register_default_builtins();
  return reg;
}

void Registry::register_image(const std::string& id, ImageFn fn) {
  std::lock_guard lock(mu_);
  image_[id] = std::move(fn);
}

void Registry::register_detector(const std::string& id, DetectorFn fn) {
  std::lock_guard lock(mu_);
  detector_[id] = std::move(fn);
}

void Registry::register_inpaint(const std::string& id, InpaintFn fn) {
  std::lock_guard lock(mu_);
  inpaint_[id] = std::move(fn);
}

bool Registry::has_image(const std::string& id) const {
  std::lock_guard lock(mu_);
  return image_.count(id) > 0;
}

bool Registry::has_detector(const std::string& id) const {
  std::lock_guard lock(mu_);
  return detector_.count(id) > 0;
}

bool Registry::has_inpaint(const std::string& id) const {
  std::lock_guard lock(mu_);
  return inpaint_.count(id) > 0;
}

ImageFn Registry::image_fn(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = image_.find(id);
  if (it == image_.end())
    throw Error(ErrorKind::ConfigError, "no builtin image backend: " + id);
  return it->second;
}

DetectorFn Registry::detector_fn(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = detector_.find(id);
  if (it == detector_.end())
    throw Error(ErrorKind::ConfigError, "no builtin detector backend: " + id);
  return it->second;
}

InpaintFn Registry::inpaint_fn(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = inpaint_.find(id);
  if (it == inpaint_.end())
    throw Error(ErrorKind::ConfigError, "no builtin inpaint backend: " + id);
  return it->second;
}

void Registry::count(const std::string& backend_name) {
  std::lock_guard lock(mu_);
  ++counts_[backend_name];
  ++total_;
}

long Registry::invocations(const std::string& backend_name) const {
  std::lock_guard lock(mu_);
  const auto it = counts_.find(backend_name);
  return it == counts_.end() ? 0 : it->second;
}

long Registry::total_invocations() const {
  std::lock_guard lock(mu_);
  return total_;
}

void Registry::reset_counters() {
  std::lock_guard lock(mu_);
  counts_.clear();
  total_ = 0;
}

DetectionResult parse_detection_payload(const std::string& json_text,
                                        int img_w, int img_h) {
  DetectionResult det;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception&) {
    throw Error(ErrorKind::BackendProtocolError,
                "detector reply is not valid JSON");
  }
  try {
    if (j.value("protocol", std::string(kProtocolVersion)) !=
        kProtocolVersion) {
      throw Error(ErrorKind::BackendProtocolError,
                  "unsupported detector protocol version");
    }
    for (const auto& jb : j.at("boxes")) {
      BoxDetection b;
      b.box = {jb.at("x").get<int>(), jb.at("y").get<int>(),
               jb.at("w").get<int>(), jb.at("h").get<int>()};
      b.confidence = jb.value("conf", 1.0);
      if (!b.box.valid_within(img_w, img_h)) {
        throw Error(ErrorKind::BackendProtocolError,
                    "detector box outside image bounds");
      }
      if (b.confidence < 0.0 || b.confidence > 1.0) {
        throw Error(ErrorKind::BackendProtocolError,
                    "detector confidence outside [0,1]");
      }
      det.boxes.push_back(b);
    }
    if (j.contains("mask_png_b64")) {
      const ImageBuffer m = io::decode_png(
          base64_decode(j.at("mask_png_b64").get<std::string>()));
      if (m.width() != img_w || m.height() != img_h) {
        throw Error(ErrorKind::BackendProtocolError,
                    "detector mask dimensions mismatch");
      }
      const ImageBuffer gray = to_grayscale(m);
      Mask mask(img_w, img_h, MaskKind::Generic);
      for (int y = 0; y < img_h; ++y)
        for (int x = 0; x < img_w; ++x)
          mask.set(x, y, gray.at_u8(x, y) / 255.0f);
      det.mask = std::move(mask);
    }
  } catch (const json::exception&) {
    throw Error(ErrorKind::BackendProtocolError,
                "detector reply missing required fields");
  }
  return det;
}

std::string detection_to_payload(const DetectionResult& det) {
  json j;
  j["protocol"] = kProtocolVersion;
  json boxes = json::array();
  for (const auto& b : det.boxes) {
    boxes.push_back({{"x", b.box.x},
                     {"y", b.box.y},
                     {"w", b.box.w},
                     {"h", b.box.h},
                     {"conf", b.confidence}});
  }
  j["boxes"] = std::move(boxes);
  if (det.mask) {
    ImageBuffer m(det.mask->width(), det.mask->height(), 1, Depth::U8);
    auto data = m.u8();
    const auto mv = det.mask->values();
    for (size_t i = 0; i < mv.size(); ++i) {
      data[i] = static_cast<uint8_t>(
          std::clamp(std::nearbyintf(mv[i] * 255.0f), 0.0f, 255.0f));
    }
    j["mask_png_b64"] = base64_encode(io::encode_png(m));
  }
  return j.dump();
}

ImageBuffer invoke_image_backend(const BackendDescriptor& desc,
                                 const ImageBuffer& img) {
  if (!is_image_role(desc.role)) {
    throw Error(ErrorKind::ConfigError,
                "backend '" + desc.name + "' role " + role_name(desc.role) +
                    " is not an image role");
  }
  Registry::instance().count(desc.name);
  ImageBuffer out;
  switch (desc.transport) {
    case Transport::Builtin:
      out = Registry::instance().image_fn(desc.target)(img, desc.params);
      break;
    case Transport::Subprocess: {
      const auto res = run_subprocess(desc.target, io::encode_png(img),
                                      desc.timeout_seconds);
      out = decode_backend_png(desc, res.output);
      break;
    }
    case Transport::Http: {
      const std::vector<uint8_t> png = io::encode_png(img);
      const std::string body = http_exchange(
          desc, std::string(png.begin(), png.end()), "image/png");
      out = decode_backend_png(
          desc, std::vector<uint8_t>(body.begin(), body.end()));
      break;
    }
  }
  validate_image_output(desc, img, out);
  return out;
}

DetectionResult invoke_detector_backend(const BackendDescriptor& desc,
                                        const ImageBuffer& img) {
  if (!is_detector_role(desc.role)) {
    throw Error(ErrorKind::ConfigError,
                "backend '" + desc.name + "' role " + role_name(desc.role) +
                    " is not a detector role");
  }
  Registry::instance().count(desc.name);
  switch (desc.transport) {
    case Transport::Builtin:
      return Registry::instance().detector_fn(desc.target)(img, desc.params);
    case Transport::Subprocess: {
      const auto res = run_subprocess(desc.target, io::encode_png(img),
                                      desc.timeout_seconds);
      return parse_detection_payload(
          std::string(res.output.begin(), res.output.end()), img.width(),
          img.height());
    }
    case Transport::Http:
    default: {
      const std::vector<uint8_t> png = io::encode_png(img);
      const std::string body = http_exchange(
          desc, std::string(png.begin(), png.end()), "image/png");
      return parse_detection_payload(body, img.width(), img.height());
    }
  }
}

ImageBuffer invoke_inpaint_backend(const BackendDescriptor& desc,
                                   const ImageBuffer& img, const Mask& mask) {
  if (desc.role != Role::Inpainter) {
    throw Error(ErrorKind::ConfigError,
                "backend '" + desc.name + "' is not an inpainter");
  }
  Registry::instance().count(desc.name);
  ImageBuffer out;
  switch (desc.transport) {
    case Transport::Builtin:
      out = Registry::instance().inpaint_fn(desc.target)(img, mask,
                                                         desc.params);
      break;
    case Transport::Subprocess: {
      const auto res = run_subprocess(desc.target,
                                      io::encode_png_rgba(img, mask),
                                      desc.timeout_seconds);
      out = decode_backend_png(desc, res.output);
      break;
    }
    case Transport::Http: {
      const std::vector<uint8_t> png = io::encode_png_rgba(img, mask);
      const std::string body = http_exchange(
          desc, std::string(png.begin(), png.end()), "image/png");
      out = decode_backend_png(
          desc, std::vector<uint8_t>(body.begin(), body.end()));
      break;
    }
  }
  if (!out.same_shape(img)) {
    throw Error(ErrorKind::BackendProtocolError,
                "inpainter '" + desc.name + "' changed image dimensions");
  }
  return out;
}

HealthStatus health_check(const BackendDescriptor& desc) {
  switch (desc.transport) {
    case Transport::Builtin:
      return {true, ""};
    case Transport::Subprocess: {
      const std::string argv0 = desc.target.substr(0, desc.target.find(' '));
      if (command_resolvable(argv0)) return {true, ""};
      return {false, "command not found: " + argv0};
    }
    case Transport::Http:
    default: {
      try {
        const ParsedUrl url = parse_url(desc.target);
        httplib::Client cli(url.host, url.port);
        const auto timeout_ms =
            static_cast<int>(std::max(0.001, desc.timeout_seconds) * 1000.0);
        cli.set_connection_timeout(0, timeout_ms * 1000);
        cli.set_read_timeout(0, timeout_ms * 1000);
        auto res = cli.Get(url.path);
        if (!res && (res.error() == httplib::Error::Connection ||
                     res.error() == httplib::Error::ConnectionTimeout)) {
          return {false, "connection refused: " + desc.target};
        }
        return {true, ""};
      } catch (const Error& e) {
        return {false, e.what()};
      }
    }
  }
}

}  // namespace dr::backend
