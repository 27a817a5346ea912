#include <mutex>
#include <stdexcept>
#include <string>

#include "dr/backend.hpp"
#include "dr/convolve.hpp"
#include "dr/error.hpp"
#include "dr/pipeline.hpp"

namespace dr::backend {

namespace {

double param_or(const Params& params, const std::string& key,
                double fallback) {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidParam, "param " + key + " is not a number");
  }
}

int int_param_or(const Params& params, const std::string& key, int fallback) {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidParam,
                "param " + key + " is not an integer");
  }
}

void do_register(Registry& reg) {
  reg.register_image("identity",
                     [](const ImageBuffer& img, const Params&) { return img; });
  reg.register_image("sr_restore",
                     [](const ImageBuffer& img, const Params& params) {
                       return pipeline::builtin_sr_restore(img, params);
                     });
  reg.register_image(
      "weak_refine", [](const ImageBuffer& img, const Params& params) {
        return pipeline::refine_weak_builtin(img, params);
      });
  reg.register_image(
      "wiener_deblur", [](const ImageBuffer& img, const Params& params) {
        const double nsr = param_or(params, "nsr", 0.01);
        const pipeline::DeblurPlan defaults;
        const auto est = pipeline::estimate_motion_kernel(
            img, defaults.grid_lengths, defaults.grid_angles);
        return pipeline::wiener_deblur(
            img, motion_line_kernel(est.length, est.angle), nsr);
      });

  reg.register_detector("none", [](const ImageBuffer&, const Params&) {
    return DetectionResult{};
  });
  reg.register_detector("text_detect",
                        [](const ImageBuffer& img, const Params&) {
                          return pipeline::detect_text_regions_builtin(img);
                        });
  reg.register_detector(
      "reflect_detect", [](const ImageBuffer& img, const Params& params) {
        return pipeline::detect_reflection_builtin(
            img, int_param_or(params, "close_radius", 2));
      });

  reg.register_inpaint("fast_marching", [](const ImageBuffer& img,
                                           const Mask& mask,
                                           const Params& params) {
    return pipeline::inpaint_fast_marching(
        img, mask, int_param_or(params, "radius", 5));
  });
}

}  // namespace

void register_default_builtins() {
  static std::mutex mu;
  static bool done = false;
  // Registry::instance() re-enters here while registration is in flight;
  // the thread-local flag breaks the cycle, the mutex orders other threads.
  static thread_local bool in_progress = false;
  if (in_progress) return;
  in_progress = true;
  {
    std::lock_guard<std::mutex> lock(mu);
    if (!done) {
      do_register(Registry::instance());
      done = true;
    }
  }
  in_progress = false;
}

}  // namespace dr::backend
