#include <algorithm>
#include <cmath>
#include <vector>

#include "dr/classifier.hpp"
#include "dr/color.hpp"
#include "dr/error.hpp"

namespace dr {

namespace {

// 3x3 Laplacian response at interior pixels.
std::vector<float> laplacian_response(const std::vector<float>& g, int w,
                                      int h) {
  std::vector<float> r;
  r.reserve(size_t(w - 2) * (h - 2));
  for (int y = 1; y < h - 1; ++y) {
    const float* up = g.data() + size_t(y - 1) * w;
    const float* mid = g.data() + size_t(y) * w;
    const float* dn = g.data() + size_t(y + 1) * w;
    for (int x = 1; x < w - 1; ++x) {
      r.push_back(up[x] + dn[x] + mid[x - 1] + mid[x + 1] - 4.0f * mid[x]);
    }
  }
  return r;
}

double variance(const std::vector<float>& v) {
  if (v.empty()) return 0.0;
  double sum = 0.0;
  for (const float x : v) sum += x;
  const double mean = sum / double(v.size());
  double acc = 0.0;
  for (const float x : v) acc += (x - mean) * (x - mean);
  return acc / double(v.size());
}

double median_of(std::vector<float> v) {
  if (v.empty()) return 0.0;
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

double blockiness_of(const std::vector<float>& g, int w, int h) {
  double aligned_sum = 0.0, other_sum = 0.0;
  long aligned_n = 0, other_n = 0;
  // column steps between x and x+1; 8-aligned when the boundary sits between
  // sample 7 and 8 of a block row
  for (int y = 0; y < h; ++y) {
    const float* row = g.data() + size_t(y) * w;
    for (int x = 0; x + 1 < w; ++x) {
      const double step = std::abs(double(row[x + 1]) - double(row[x]));
      if ((x + 1) % 8 == 0) {
        aligned_sum += step;
        ++aligned_n;
      } else {
        other_sum += step;
        ++other_n;
      }
    }
  }
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y + 1 < h; ++y) {
      const double step =
          std::abs(double(g[size_t(y + 1) * w + x]) - double(g[size_t(y) * w + x]));
      if ((y + 1) % 8 == 0) {
        aligned_sum += step;
        ++aligned_n;
      } else {
        other_sum += step;
        ++other_n;
      }
    }
  }
  if (aligned_n == 0 || other_n == 0) return 0.0;
  return std::max(0.0, aligned_sum / aligned_n - other_sum / other_n);
}

double anisotropy_of(const std::vector<float>& g, int w, int h) {
  double jxx = 0.0, jyy = 0.0, jxy = 0.0;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double gx =
          0.5 * (double(g[size_t(y) * w + x + 1]) - g[size_t(y) * w + x - 1]);
      const double gy =
          0.5 * (double(g[size_t(y + 1) * w + x]) - g[size_t(y - 1) * w + x]);
      jxx += gx * gx;
      jyy += gy * gy;
      jxy += gx * gy;
    }
  }
  const double tr = jxx + jyy;
  if (tr <= 0.0) return 0.0;
  const double det = std::sqrt((jxx - jyy) * (jxx - jyy) + 4.0 * jxy * jxy);
  const double l1 = 0.5 * (tr + det);
  const double l2 = 0.5 * (tr - det);
  if (l1 <= 0.0) return 0.0;
  return 1.0 - l2 / l1;
}

}  // namespace

FeatureVector extract_features(const ImageBuffer& img) {
  if (img.width() < 32 || img.height() < 32) {
    throw Error(ErrorKind::ImageTooSmall,
                "feature extraction needs at least 32x32");
  }
  const int w = img.width(), h = img.height();
  const std::vector<float> gray = luma_plane_255(img);

  FeatureVector f;
  const std::vector<float> lap = laplacian_response(gray, w, h);
  f.laplacian_variance = variance(lap);
  f.blockiness = blockiness_of(gray, w, h);
  f.gradient_anisotropy = anisotropy_of(gray, w, h);

  // highlight fraction: bright and unsaturated pixels
  const std::vector<float> sat = saturation_plane(img);
  const float gate = 0.92f * 255.0f;
  size_t bright = 0;
  for (size_t i = 0; i < gray.size(); ++i) {
    if (gray[i] > gate && sat[i] < 0.15f) ++bright;
  }
  f.highlight_ratio = double(bright) / double(gray.size());

  // robust sigma from the high-pass residual; the Laplacian's tap energy is
  // 20, so dividing by sqrt(20) restores 8-bit noise units
  std::vector<float> residual(lap);
  const float inv_norm = 1.0f / std::sqrt(20.0f);
  for (float& r : residual) r *= inv_norm;
  const double med = median_of(residual);
  std::vector<float> dev(residual.size());
  for (size_t i = 0; i < residual.size(); ++i)
    dev[i] = std::abs(residual[i] - float(med));
  f.noise_estimate = 1.4826 * median_of(dev);
  return f;
}

}  // namespace dr
