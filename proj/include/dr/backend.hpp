#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dr/image.hpp"

namespace dr::backend {

enum class Role {
  BaseSr,
  TextRestorer,
  TextDetector,
  ReflectionDetector,
  Inpainter,
  WeakReflectionRefiner,
  Deblurrer,
  FaceDetector,
  FaceEnhancer,
  Classifier,
};

const char* role_name(Role role);
bool parse_role(const std::string& name, Role& out);
bool is_detector_role(Role role);
bool is_image_role(Role role);

enum class Transport { Builtin, Subprocess, Http };

const char* transport_name(Transport t);
bool parse_transport(const std::string& name, Transport& out);

// Binds a pipeline slot to a builtin routine, a subprocess command line, or
// an HTTP endpoint. Immutable after configuration load.
struct BackendDescriptor {
  std::string name;
  Role role = Role::BaseSr;
  Transport transport = Transport::Builtin;
  std::string target;  // builtin id | command line | URL
  double timeout_seconds = 10.0;
  std::map<std::string, std::string> params;

  // ConfigError on invariant violations (timeout <= 0, unknown builtin id).
  void validate() const;
  // Integer output scale declared in params ("scale"), default 1.
  int scale() const;
  double param_double(const std::string& key, double fallback) const;
  int param_int(const std::string& key, int fallback) const;
};

struct BoxDetection {
  BoundingBox box;
  double confidence = 0.0;  // [0,1]
};

struct DetectionResult {
  std::vector<BoxDetection> boxes;
  std::optional<Mask> mask;
};

struct HealthStatus {
  bool ok = true;
  std::string reason;
};

using Params = std::map<std::string, std::string>;
using ImageFn = std::function<ImageBuffer(const ImageBuffer&, const Params&)>;
using DetectorFn =
    std::function<DetectionResult(const ImageBuffer&, const Params&)>;
using InpaintFn = std::function<ImageBuffer(const ImageBuffer&, const Mask&,
                                            const Params&)>;

// Builtin routine table plus invocation counters. The counter covers every
// transport so a no-op route is verifiable as zero invocations.
class Registry {
 public:
  static Registry& instance();

  void register_image(const std::string& id, ImageFn fn);
  void register_detector(const std::string& id, DetectorFn fn);
  void register_inpaint(const std::string& id, InpaintFn fn);

  bool has_image(const std::string& id) const;
  bool has_detector(const std::string& id) const;
  bool has_inpaint(const std::string& id) const;
  ImageFn image_fn(const std::string& id) const;      // throws ConfigError
  DetectorFn detector_fn(const std::string& id) const;
  InpaintFn inpaint_fn(const std::string& id) const;

  void count(const std::string& backend_name);
  long invocations(const std::string& backend_name) const;
  long total_invocations() const;
  void reset_counters();

 private:
  Registry() = default;
  mutable std::mutex mu_;
  std::map<std::string, ImageFn> image_;
  std::map<std::string, DetectorFn> detector_;
  std::map<std::string, InpaintFn> inpaint_;
  std::map<std::string, long> counts_;
  long total_ = 0;
};

// Registers the builtin backends (identity, sr_restore, wiener_deblur,
// weak_refine, text_detect, reflect_detect, none, fast_marching). Runs once;
// later calls are no-ops. Registry::instance() calls it lazily.
void register_default_builtins();

// Dispatch by descriptor transport. Outputs are validated: image roles must
// preserve dimensions (times the declared scale), detector boxes must lie
// within bounds (violations raise BackendProtocolError, never clipped).
ImageBuffer invoke_image_backend(const BackendDescriptor& desc,
                                 const ImageBuffer& img);
DetectionResult invoke_detector_backend(const BackendDescriptor& desc,
                                        const ImageBuffer& img);
ImageBuffer invoke_inpaint_backend(const BackendDescriptor& desc,
                                   const ImageBuffer& img, const Mask& mask);
HealthStatus health_check(const BackendDescriptor& desc);

// Subprocess transport: body on stdin, reply on stdout, deadline enforced
// with SIGKILL. Throws BackendUnavailable (spawn failure), BackendTimeout,
// or BackendError (nonzero exit).
struct SubprocessResult {
  std::vector<uint8_t> output;
};
SubprocessResult run_subprocess(const std::string& command_line,
                                const std::vector<uint8_t>& input,
                                double timeout_seconds);

// True when argv[0] is an executable path or resolvable via PATH.
bool command_resolvable(const std::string& argv0);

// JSON detection payload shared by the subprocess and HTTP transports:
// {"protocol":"1","boxes":[{"x","y","w","h","conf"}],"mask_png_b64"?}.
DetectionResult parse_detection_payload(const std::string& json_text,
                                        int img_w, int img_h);
std::string detection_to_payload(const DetectionResult& det);

std::string base64_encode(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> base64_decode(const std::string& text);

// POSTs body to desc.target with the protocol version header. Throws
// BackendUnavailable (connect failure), BackendTimeout (read timeout), or
// BackendError (non-2xx, carries the status). Returns the response body.
std::string http_exchange(const BackendDescriptor& desc,
                          const std::string& body,
                          const std::string& content_type);

}  // namespace dr::backend
