#include "dr/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "dr/color.hpp"
#include "dr/error.hpp"
#include "dr/kernels.hpp"

namespace dr::metrics {

namespace {

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b) {
  if (a.width() != b.width() || a.height() != b.height() ||
      a.channels() != b.channels() || a.depth() != b.depth()) {
    throw Error(ErrorKind::DimensionMismatch,
                "metric inputs must share shape and depth");
  }
}

// Summed-area table with one guard row/column of zeros.
std::vector<double> integral(const std::vector<float>& p, int w, int h) {
  std::vector<double> s(size_t(w + 1) * (h + 1), 0.0);
  for (int y = 0; y < h; ++y) {
    double row = 0.0;
    for (int x = 0; x < w; ++x) {
      row += p[size_t(y) * w + x];
      s[size_t(y + 1) * (w + 1) + (x + 1)] = s[size_t(y) * (w + 1) + (x + 1)] + row;
    }
  }
  return s;
}

double box_sum(const std::vector<double>& s, int stride, int x, int y, int n) {
  return s[size_t(y + n) * stride + (x + n)] - s[size_t(y) * stride + (x + n)] -
         s[size_t(y + n) * stride + x] + s[size_t(y) * stride + x];
}

}  // namespace

double mse(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b);
  const auto& ops = kernels::active();
  const size_t n = a.sample_count();
  if (n == 0) return 0.0;
  if (a.depth() == Depth::U8) {
    const uint64_t ssd = ops.sum_sq_diff_u8(a.u8().data(), b.u8().data(), n);
    return double(ssd) / double(n);
  }
  return ops.sum_sq_diff_f32(a.f32().data(), b.f32().data(), n) / double(n);
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  const double err = mse(a, b);
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  const double peak = a.depth() == Depth::U8 ? 255.0 : 1.0;
  return 10.0 * std::log10(peak * peak / err);
}

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b);
  constexpr int kWin = 8;
  const int w = a.width(), h = a.height();
  if (w < kWin || h < kWin) {
    throw Error(ErrorKind::WindowTooLarge,
                "image smaller than 8x8 similarity window");
  }
  const std::vector<float> ga = luma_plane_255(a);
  const std::vector<float> gb = luma_plane_255(b);

  std::vector<float> gab(ga.size()), gaa(ga.size()), gbb(ga.size());
  for (size_t i = 0; i < ga.size(); ++i) {
    gab[i] = ga[i] * gb[i];
    gaa[i] = ga[i] * ga[i];
    gbb[i] = gb[i] * gb[i];
  }
  const auto sa = integral(ga, w, h);
  const auto sb = integral(gb, w, h);
  const auto saa = integral(gaa, w, h);
  const auto sbb = integral(gbb, w, h);
  const auto sab = integral(gab, w, h);

  constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);
  constexpr double kInvN = 1.0 / (kWin * kWin);
  const int stride = w + 1;

  double total = 0.0;
  long windows = 0;
  for (int y = 0; y + kWin <= h; ++y) {
    for (int x = 0; x + kWin <= w; ++x) {
      const double mu_a = box_sum(sa, stride, x, y, kWin) * kInvN;
      const double mu_b = box_sum(sb, stride, x, y, kWin) * kInvN;
      const double var_a = box_sum(saa, stride, x, y, kWin) * kInvN - mu_a * mu_a;
      const double var_b = box_sum(sbb, stride, x, y, kWin) * kInvN - mu_b * mu_b;
      const double cov = box_sum(sab, stride, x, y, kWin) * kInvN - mu_a * mu_b;
      const double num = (2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2);
      const double den = (mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2);
      total += num / den;
      ++windows;
    }
  }
  return total / double(windows);
}

}  // namespace dr::metrics
