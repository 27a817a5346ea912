#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>
#include <vector>

#include "dr/color.hpp"
#include "dr/convolve.hpp"
#include "dr/error.hpp"
#include "dr/morphology.hpp"
#include "dr/pipeline.hpp"
#include "pipeline_internal.hpp"

namespace dr::pipeline {

backend::DetectionResult detect_reflection_builtin(const ImageBuffer& img,
                                                   int close_radius) {
  const int w = img.width();
  const int h = img.height();
  const std::vector<float> luma = luma_plane_255(img);
  const std::vector<float> sat = saturation_plane(img);

  Mask raw(w, h, MaskKind::ReflectionStrong, 0.0f);
  {
    auto vals = raw.values();
    for (size_t i = 0; i < vals.size(); ++i) {
      vals[i] = (luma[i] > 0.92f * 255.0f && sat[i] < 0.15f) ? 1.0f : 0.0f;
    }
  }
  Mask closed = close_radius > 0 ? morph::close_disk(raw, close_radius) : raw;
  const int min_pixels = std::max(
      1, static_cast<int>(0.0005 * static_cast<double>(w) * h));
  Mask cleaned = morph::filter_components(closed, min_pixels);

  backend::DetectionResult det;
  for (const auto& comp : morph::connected_components(cleaned)) {
    backend::BoxDetection d;
    d.box = comp.box;
    d.confidence = std::clamp(
        static_cast<double>(comp.pixels) / comp.box.area(), 0.0, 1.0);
    det.boxes.push_back(d);
  }
  det.mask = std::move(cleaned);
  return det;
}

ImageBuffer inpaint_fast_marching(const ImageBuffer& img, const Mask& mask,
                                  int radius) {
  if (!mask.matches(img)) {
    throw Error(ErrorKind::DimensionMismatch, "mask does not match image");
  }
  if (radius < 1) {
    throw Error(ErrorKind::InvalidParam, "inpaint radius must be >= 1");
  }
  const int w = img.width();
  const int h = img.height();
  const size_t n = static_cast<size_t>(w) * h;

  std::vector<uint8_t> unknown(n, 0);
  size_t unknown_count = 0;
  for (size_t i = 0; i < n; ++i) {
    if (mask.values()[i] > 0.5f) {
      unknown[i] = 1;
      ++unknown_count;
    }
  }
  if (unknown_count == 0) return img;
  if (unknown_count == n) {
    throw Error(ErrorKind::MaskTooLarge, "mask covers the entire image");
  }

  // Multi-source Dijkstra distance to the nearest known pixel (8-connected,
  // diagonal step sqrt(2)). Known pixels sit at distance 0.
  constexpr double kInf = 1e30;
  std::vector<double> dist(n, kInf);
  using Node = std::tuple<double, int, int>;  // (distance, y, x)
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> pq;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      if (!unknown[i]) {
        dist[i] = 0.0;
        pq.emplace(0.0, y, x);
      }
    }
  }
  static const int kDx[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
  static const int kDy[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
  static const double kStep[8] = {
      1.41421356237309515, 1, 1.41421356237309515, 1,
      1,                   1.41421356237309515, 1, 1.41421356237309515};
  while (!pq.empty()) {
    auto [d, y, x] = pq.top();
    pq.pop();
    const size_t i = static_cast<size_t>(y) * w + x;
    if (d > dist[i]) continue;
    for (int k = 0; k < 8; ++k) {
      const int nx = x + kDx[k];
      const int ny = y + kDy[k];
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      const size_t j = static_cast<size_t>(ny) * w + nx;
      const double nd = d + kStep[k];
      if (nd < dist[j]) {
        dist[j] = nd;
        pq.emplace(nd, ny, nx);
      }
    }
  }

  // Fill in increasing (distance, y, x) order so every pixel closer to the
  // boundary is known by the time it is consulted.
  std::vector<size_t> order;
  order.reserve(unknown_count);
  for (size_t i = 0; i < n; ++i) {
    if (unknown[i]) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return a < b;
  });

  ImageBuffer out = img;
  const int ch = img.channels();
  ImageBuffer work = img.to_float();
  auto px = work.f32();
  std::vector<uint8_t> filled(unknown);  // 1 = still unknown

  auto grad_t = [&](int x, int y) {
    const auto sample = [&](int sx, int sy) {
      sx = std::clamp(sx, 0, w - 1);
      sy = std::clamp(sy, 0, h - 1);
      const double v = dist[static_cast<size_t>(sy) * w + sx];
      return v >= kInf ? 0.0 : v;
    };
    double gx = (sample(x + 1, y) - sample(x - 1, y)) * 0.5;
    double gy = (sample(x, y + 1) - sample(x, y - 1)) * 0.5;
    const double norm = std::hypot(gx, gy);
    if (norm > 1e-12) {
      gx /= norm;
      gy /= norm;
    }
    return std::pair<double, double>(gx, gy);
  };

  for (size_t i : order) {
    const int x = static_cast<int>(i % w);
    const int y = static_cast<int>(i / w);
    const auto [nx_dir, ny_dir] = grad_t(x, y);
    double wsum = 0.0;
    double acc[4] = {0, 0, 0, 0};
    for (int dy = -radius; dy <= radius; ++dy) {
      const int qy = y + dy;
      if (qy < 0 || qy >= h) continue;
      for (int dx = -radius; dx <= radius; ++dx) {
        const int qx = x + dx;
        if (qx < 0 || qx >= w) continue;
        const size_t j = static_cast<size_t>(qy) * w + qx;
        if (filled[j]) continue;  // not yet known
        const double d = std::hypot(static_cast<double>(dx),
                                    static_cast<double>(dy));
        if (d > radius || d == 0.0) continue;
        const double dir =
            std::max(1e-6, std::abs((dx * nx_dir + dy * ny_dir) / d));
        const double wgt = dir / (1.0 + d);
        wsum += wgt;
        const size_t off = j * ch;
        for (int c = 0; c < ch; ++c) acc[c] += wgt * px[off + c];
      }
    }
    const size_t off = i * ch;
    if (wsum > 0.0) {
      for (int c = 0; c < ch; ++c) {
        px[off + c] = static_cast<float>(acc[c] / wsum);
      }
    }
    filled[i] = 0;
  }

  // Untouched pixels keep their original bytes; only masked pixels are
  // rewritten from the filled float plane.
  ImageBuffer filled_img =
      img.depth() == Depth::U8 ? work.to_u8() : std::move(work);
  for (size_t i = 0; i < n; ++i) {
    if (!unknown[i]) continue;
    const size_t off = i * ch;
    if (out.depth() == Depth::U8) {
      for (int c = 0; c < ch; ++c) {
        out.u8()[off + c] = filled_img.u8()[off + c];
      }
    } else {
      for (int c = 0; c < ch; ++c) {
        out.f32()[off + c] = filled_img.f32()[off + c];
      }
    }
  }
  return out;
}

ImageBuffer refine_weak_builtin(const ImageBuffer& img,
                                const backend::Params& params) {
  double strength = 0.5;
  int median_radius = 16;
  try {
    if (auto it = params.find("strength"); it != params.end()) {
      strength = std::stod(it->second);
    }
    if (auto it = params.find("median_radius"); it != params.end()) {
      median_radius = std::stoi(it->second);
    }
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidParam,
                "strength/median_radius is not a number");
  }
  if (!(strength >= 0.0 && strength <= 1.0)) {
    throw Error(ErrorKind::InvalidParam, "strength must be in [0,1]");
  }
  if (median_radius < 1) {
    throw Error(ErrorKind::InvalidParam, "median_radius must be >= 1");
  }
  if (strength == 0.0) return img;

  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();
  const ImageBuffer img8 = img.depth() == Depth::U8 ? img : img.to_u8();

  ImageBuffer out = img;
  for (int c = 0; c < ch; ++c) {
    std::vector<uint8_t> plane(static_cast<size_t>(w) * h);
    for (size_t i = 0; i < plane.size(); ++i) {
      plane[i] = img8.u8()[i * ch + c];
    }
    const std::vector<uint8_t> bg =
        morph::median_filter_u8(plane, w, h, median_radius);

    std::vector<float> blur_img(plane.size());
    std::vector<float> blur_bg(plane.size());
    for (size_t i = 0; i < plane.size(); ++i) {
      blur_img[i] = static_cast<float>(plane[i]);
      blur_bg[i] = static_cast<float>(bg[i]);
    }
    gaussian_blur_plane(blur_img, w, h, 8.0);
    gaussian_blur_plane(blur_bg, w, h, 8.0);

    for (size_t i = 0; i < plane.size(); ++i) {
      // Soft shrink: differences inside the dead band are blur-vs-median
      // disagreement on ordinary content, not veil; leave those alone.
      constexpr double kDeadBand = 6.0;
      const double veil =
          std::max(0.0, double(blur_img[i]) - double(blur_bg[i]) - kDeadBand);
      if (out.depth() == Depth::U8) {
        const double v = img8.u8()[i * ch + c] - strength * veil;
        out.u8()[i * ch + c] = static_cast<uint8_t>(
            std::clamp(std::lround(v), 0L, 255L));
      } else {
        const double v = img.f32()[i * ch + c] - strength * veil / 255.0;
        out.f32()[i * ch + c] =
            static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return out;
}

ImageBuffer run_reflection_pipeline(const ImageBuffer& img,
                                    const ReflectionPlan& plan, Fragment& frag,
                                    const Deadline& deadline) {
  check_deadline(deadline);
  backend::DetectionResult det;
  {
    StageTimer timer(frag, "reflect_detect", plan.detector.name);
    det = backend::invoke_detector_backend(plan.detector, img);
  }
  frag.boxes = det.boxes;

  Mask mask(img.width(), img.height(), MaskKind::ReflectionStrong, 0.0f);
  if (det.mask) {
    mask = det.mask->thresholded(0.5f);
    if (plan.mask_close_radius > 0) {
      mask = morph::close_disk(mask, plan.mask_close_radius);
    }
    if (!det.boxes.empty()) {
      // Pixel mask refined by box evidence: keep only mask pixels inside a
      // dilated detection box.
      Mask boxes(img.width(), img.height(), MaskKind::ReflectionStrong, 0.0f);
      for (const auto& d : det.boxes) {
        const BoundingBox b = d.box.dilated(plan.mask_close_radius,
                                            img.width(), img.height());
        for (int y = b.y; y < b.y2(); ++y) {
          for (int x = b.x; x < b.x2(); ++x) boxes.set(x, y, 1.0f);
        }
      }
      for (size_t i = 0; i < mask.values().size(); ++i) {
        mask.values()[i] *= boxes.values()[i];
      }
    }
  } else if (!det.boxes.empty()) {
    for (const auto& d : det.boxes) {
      for (int y = d.box.y; y < d.box.y2(); ++y) {
        for (int x = d.box.x; x < d.box.x2(); ++x) mask.set(x, y, 1.0f);
      }
    }
  }

  const double fraction = mask.area_fraction();
  frag.mask_fractions[mask_kind_name(MaskKind::ReflectionStrong)] = fraction;
  if (fraction > plan.max_mask_fraction) {
    frag.needs_review = true;
    return img;
  }

  check_deadline(deadline);
  ImageBuffer current = img;
  {
    StageTimer timer(frag, "inpaint", plan.inpainter.name);
    if (fraction == 0.0) {
      timer.set_status("skipped");
    } else {
      try {
        current = backend::invoke_inpaint_backend(plan.inpainter, img, mask);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::MaskTooLarge) {
          frag.needs_review = true;
          timer.set_status("error");
          return img;
        }
        throw;
      }
    }
  }

  check_deadline(deadline);
  {
    StageTimer timer(frag, "refine", plan.refiner.name);
    current = backend::invoke_image_backend(plan.refiner, current);
  }
  return current;
}

}  // namespace dr::pipeline
