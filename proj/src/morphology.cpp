#include "dr/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dr::morph {

namespace {

enum class Op { Min, Max };

std::vector<float> rect_filter(const std::vector<float>& plane, int w, int h,
                               int rx, int ry, Op op) {
  auto pick = [op](float a, float b) {
    return op == Op::Max ? std::max(a, b) : std::min(a, b);
  };
  // horizontal
  std::vector<float> tmp(plane.size());
  for (int y = 0; y < h; ++y) {
    const float* row = plane.data() + size_t(y) * w;
    for (int x = 0; x < w; ++x) {
      float v = row[std::clamp(x - rx, 0, w - 1)];
      for (int dx = -rx + 1; dx <= rx; ++dx)
        v = pick(v, row[std::clamp(x + dx, 0, w - 1)]);
      tmp[size_t(y) * w + x] = v;
    }
  }
  // vertical
  std::vector<float> out(plane.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float v = tmp[size_t(std::clamp(y - ry, 0, h - 1)) * w + x];
      for (int dy = -ry + 1; dy <= ry; ++dy)
        v = pick(v, tmp[size_t(std::clamp(y + dy, 0, h - 1)) * w + x]);
      out[size_t(y) * w + x] = v;
    }
  }
  return out;
}

std::vector<std::pair<int, int>> disk_offsets(int radius) {
  std::vector<std::pair<int, int>> offs;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) offs.emplace_back(dx, dy);
  return offs;
}

Mask disk_filter(const Mask& m, int radius, Op op) {
  if (radius <= 0) return m;
  const auto offs = disk_offsets(radius);
  const int w = m.width(), h = m.height();
  Mask out(w, h, m.kind());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float v = op == Op::Max ? 0.0f : 1.0f;
      for (const auto& [dx, dy] : offs) {
        const int sx = x + dx, sy = y + dy;
        if (sx < 0 || sx >= w || sy < 0 || sy >= h) continue;
        v = op == Op::Max ? std::max(v, m.at(sx, sy))
                          : std::min(v, m.at(sx, sy));
      }
      out.set(x, y, v);
    }
  }
  return out;
}

}  // namespace

std::vector<float> dilate_rect(const std::vector<float>& plane, int w, int h,
                               int rx, int ry) {
  return rect_filter(plane, w, h, rx, ry, Op::Max);
}

std::vector<float> erode_rect(const std::vector<float>& plane, int w, int h,
                              int rx, int ry) {
  return rect_filter(plane, w, h, rx, ry, Op::Min);
}

Mask dilate_disk(const Mask& m, int radius) {
  return disk_filter(m, radius, Op::Max);
}
Mask erode_disk(const Mask& m, int radius) {
  return disk_filter(m, radius, Op::Min);
}
Mask close_disk(const Mask& m, int radius) {
  return erode_disk(dilate_disk(m, radius), radius);
}

int otsu_threshold(const std::vector<long>& hist) {
  const int bins = static_cast<int>(hist.size());
  long total = 0;
  double weighted = 0.0;
  for (int i = 0; i < bins; ++i) {
    total += hist[i];
    weighted += double(i) * hist[i];
  }
  if (total == 0) return 0;

  long w0 = 0;
  double sum0 = 0.0;
  double best_var = -1.0;
  int best_t = 0;
  for (int t = 0; t < bins - 1; ++t) {
    w0 += hist[t];
    sum0 += double(t) * hist[t];
    const long w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    const double mu0 = sum0 / w0;
    const double mu1 = (weighted - sum0) / w1;
    const double between = double(w0) * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best_var) {
      best_var = between;
      best_t = t;
    }
  }
  return best_t;
}

std::vector<Component> connected_components(const Mask& binary,
                                            int min_pixels) {
  const int w = binary.width(), h = binary.height();
  std::vector<uint8_t> seen(size_t(w) * h, 0);
  std::vector<Component> comps;
  std::vector<int> stack;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t idx = size_t(y) * w + x;
      if (seen[idx] || binary.values()[idx] <= 0.5f) continue;
      Component comp;
      int minx = x, maxx = x, miny = y, maxy = y;
      stack.clear();
      stack.push_back(static_cast<int>(idx));
      seen[idx] = 1;
      while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        const int cy = cur / w, cx = cur % w;
        ++comp.pixels;
        minx = std::min(minx, cx);
        maxx = std::max(maxx, cx);
        miny = std::min(miny, cy);
        maxy = std::max(maxy, cy);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            const size_t nidx = size_t(ny) * w + nx;
            if (!seen[nidx] && binary.values()[nidx] > 0.5f) {
              seen[nidx] = 1;
              stack.push_back(static_cast<int>(nidx));
            }
          }
        }
      }
      comp.box = {minx, miny, maxx - minx + 1, maxy - miny + 1};
      if (comp.pixels >= min_pixels) comps.push_back(comp);
    }
  }
  return comps;
}

Mask filter_components(const Mask& binary, int min_pixels) {
  const int w = binary.width(), h = binary.height();
  std::vector<int> label(size_t(w) * h, -1);
  std::vector<int> sizes;
  std::vector<int> stack;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t idx = size_t(y) * w + x;
      if (label[idx] >= 0 || binary.values()[idx] <= 0.5f) continue;
      const int id = static_cast<int>(sizes.size());
      sizes.push_back(0);
      stack.clear();
      stack.push_back(static_cast<int>(idx));
      label[idx] = id;
      while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        ++sizes[id];
        const int cy = cur / w, cx = cur % w;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            const size_t nidx = size_t(ny) * w + nx;
            if (label[nidx] < 0 && binary.values()[nidx] > 0.5f) {
              label[nidx] = id;
              stack.push_back(static_cast<int>(nidx));
            }
          }
        }
      }
    }
  }

  Mask out(w, h, binary.kind());
  for (size_t i = 0; i < label.size(); ++i)
    if (label[i] >= 0 && sizes[label[i]] >= min_pixels)
      out.set(static_cast<int>(i % w), static_cast<int>(i / w), 1.0f);
  return out;
}

std::vector<uint8_t> median_filter_u8(const std::vector<uint8_t>& plane,
                                      int w, int h, int radius) {
  if (radius <= 0) return plane;
  const int r = radius;
  std::vector<uint8_t> out(plane.size());
  std::vector<int> hist(256);
  const int win = (2 * r + 1) * (2 * r + 1);
  const int target = win / 2 + 1;

  auto sample = [&](int x, int y) -> uint8_t {
    return plane[size_t(std::clamp(y, 0, h - 1)) * w + std::clamp(x, 0, w - 1)];
  };

  for (int y = 0; y < h; ++y) {
    std::fill(hist.begin(), hist.end(), 0);
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) ++hist[sample(dx, y + dy)];
    for (int x = 0; x < w; ++x) {
      if (x > 0) {
        for (int dy = -r; dy <= r; ++dy) {
          --hist[sample(x - r - 1, y + dy)];
          ++hist[sample(x + r, y + dy)];
        }
      }
      int count = 0;
      int med = 0;
      for (int v = 0; v < 256; ++v) {
        count += hist[v];
        if (count >= target) {
          med = v;
          break;
        }
      }
      out[size_t(y) * w + x] = static_cast<uint8_t>(med);
    }
  }
  return out;
}

}  // namespace dr::morph
