#include "dr/convolve.hpp"

#include <algorithm>
#include <cmath>

#include "dr/kernels.hpp"

namespace dr {

int fold_index(int i, int n, EdgePolicy edge) {
  if (edge == EdgePolicy::Replicate) return std::clamp(i, 0, n - 1);
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

namespace {

std::vector<float> convolve_plane(const std::vector<float>& in, int w, int h,
                                  const Kernel2D& k, EdgePolicy edge) {
  const int kw = k.kw(), kh = k.kh();
  const int cx = kw / 2, cy = kh / 2;
  std::vector<float> out(size_t(w) * h, 0.0f);
  const auto& ops = kernels::active();

  const int ix0 = cx, ix1 = w - cx;          // interior columns
  const int iy0 = cy, iy1 = h - cy;          // interior rows
  const bool has_interior = ix1 > ix0 && iy1 > iy0;

  if (has_interior) {
    for (int ty = 0; ty < kh; ++ty) {
      for (int tx = 0; tx < kw; ++tx) {
        const float tap = k.at(tx, ty);
        if (tap == 0.0f) continue;
        const int dx = tx - cx, dy = ty - cy;
        for (int y = iy0; y < iy1; ++y) {
          const float* src = in.data() + size_t(y - dy) * w + (ix0 - dx);
          float* dst = out.data() + size_t(y) * w + ix0;
          ops.scale_add(dst, src, tap, size_t(ix1 - ix0));
        }
      }
    }
  }

  auto edge_pixel = [&](int x, int y) {
    double s = 0.0;
    for (int ty = 0; ty < kh; ++ty) {
      const int sy = fold_index(y - (ty - cy), h, edge);
      for (int tx = 0; tx < kw; ++tx) {
        const int sx = fold_index(x - (tx - cx), w, edge);
        s += double(k.at(tx, ty)) * in[size_t(sy) * w + sx];
      }
    }
    out[size_t(y) * w + x] = static_cast<float>(s);
  };

  for (int y = 0; y < h; ++y) {
    const bool row_interior = has_interior && y >= iy0 && y < iy1;
    if (row_interior) {
      for (int x = 0; x < ix0; ++x) edge_pixel(x, y);
      for (int x = ix1; x < w; ++x) edge_pixel(x, y);
    } else {
      for (int x = 0; x < w; ++x) edge_pixel(x, y);
    }
  }
  return out;
}

}  // namespace

ImageBuffer convolve(const ImageBuffer& img, const Kernel2D& k,
                     EdgePolicy edge) {
  if (img.depth() != Depth::F32)
    throw Error(ErrorKind::InvalidParam, "convolve expects a float image");
  if (k.kw() < 1 || k.kh() < 1)
    throw Error(ErrorKind::InvalidKernel, "empty kernel");

  if (img.channels() == 1) {
    std::vector<float> data(img.f32().begin(), img.f32().end());
    auto out = convolve_plane(data, img.width(), img.height(), k, edge);
    return ImageBuffer::from_f32(img.width(), img.height(), 1, std::move(out));
  }
  std::vector<ImageBuffer> planes = img.split_planes();
  for (auto& p : planes) {
    std::vector<float> data(p.f32().begin(), p.f32().end());
    auto out = convolve_plane(data, p.width(), p.height(), k, edge);
    p = ImageBuffer::from_f32(p.width(), p.height(), 1, std::move(out));
  }
  return ImageBuffer::merge_planes(planes);
}

std::vector<float> gaussian_taps(double sigma) {
  if (sigma < 0.0)
    throw Error(ErrorKind::InvalidParam, "sigma must be >= 0");
  if (sigma == 0.0) return {1.0f};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> raw(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    raw[i + radius] = std::exp(-0.5 * (double(i) * i) / (sigma * sigma));
    sum += raw[i + radius];
  }
  std::vector<float> taps(raw.size());
  for (size_t i = 0; i < raw.size(); ++i)
    taps[i] = static_cast<float>(raw[i] / sum);
  return taps;
}

void gaussian_blur_plane(std::vector<float>& plane, int w, int h,
                         double sigma, EdgePolicy edge) {
  if (sigma <= 0.0) return;
  const std::vector<float> taps = gaussian_taps(sigma);
  const int ntaps = static_cast<int>(taps.size());
  const int r = ntaps / 2;
  const auto& ops = kernels::active();

  // horizontal pass
  std::vector<float> padded(size_t(w) + 2 * r);
  std::vector<float> row_out(w);
  for (int y = 0; y < h; ++y) {
    float* row = plane.data() + size_t(y) * w;
    for (int i = -r; i < w + r; ++i)
      padded[size_t(i + r)] = row[fold_index(i, w, edge)];
    ops.conv_h(padded.data(), taps.data(), ntaps, row_out.data(), size_t(w));
    std::copy(row_out.begin(), row_out.end(), row);
  }

  // vertical pass
  std::vector<float> src = plane;
  std::vector<float> acc(w);
  for (int y = 0; y < h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0f);
    for (int j = 0; j < ntaps; ++j) {
      const int sy = fold_index(y + j - r, h, edge);
      ops.scale_add(acc.data(), src.data() + size_t(sy) * w, taps[j],
                    size_t(w));
    }
    std::copy(acc.begin(), acc.end(), plane.begin() + size_t(y) * w);
  }
}

ImageBuffer gaussian_blur_image(const ImageBuffer& img, double sigma,
                                EdgePolicy edge) {
  if (sigma < 0.0)
    throw Error(ErrorKind::InvalidParam, "sigma must be >= 0");
  if (sigma == 0.0) return img;
  const ImageBuffer f = img.to_float();
  std::vector<ImageBuffer> planes = f.split_planes();
  for (auto& p : planes) {
    std::vector<float> data(p.f32().begin(), p.f32().end());
    gaussian_blur_plane(data, p.width(), p.height(), sigma, edge);
    p = ImageBuffer::from_f32(p.width(), p.height(), 1, std::move(data));
  }
  ImageBuffer blurred = ImageBuffer::merge_planes(planes);
  return img.depth() == Depth::U8 ? blurred.to_u8() : blurred;
}

Kernel2D motion_line_kernel(double length, double angle_deg) {
  if (length < 1.0)
    throw Error(ErrorKind::InvalidParam, "motion length must be >= 1");
  if (length == 1.0) return Kernel2D::identity();

  const double theta = angle_deg * M_PI / 180.0;
  const double half = (length - 1.0) / 2.0;
  const double ux = std::cos(theta), uy = std::sin(theta);
  const int rx = static_cast<int>(std::ceil(std::abs(half * ux)));
  const int ry = static_cast<int>(std::ceil(std::abs(half * uy)));
  const int kw = 2 * rx + 1, kh = 2 * ry + 1;
  std::vector<double> taps(size_t(kw) * kh, 0.0);

  const int samples = std::max(2, static_cast<int>(std::ceil(length * 8)));
  for (int s = 0; s < samples; ++s) {
    const double t = -half + (2.0 * half) * s / (samples - 1);
    const double px = rx + t * ux;
    const double py = ry + t * uy;
    const int x0 = static_cast<int>(std::floor(px));
    const int y0 = static_cast<int>(std::floor(py));
    const double fx = px - x0, fy = py - y0;
    for (int dy = 0; dy <= 1; ++dy) {
      for (int dx = 0; dx <= 1; ++dx) {
        const int x = x0 + dx, y = y0 + dy;
        if (x < 0 || x >= kw || y < 0 || y >= kh) continue;
        const double wgt = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
        taps[size_t(y) * kw + x] += wgt;
      }
    }
  }
  double sum = 0.0;
  for (double t : taps) sum += t;
  std::vector<float> norm(taps.size());
  for (size_t i = 0; i < taps.size(); ++i)
    norm[i] = static_cast<float>(taps[i] / sum);
  return Kernel2D(kw, kh, std::move(norm));
}

}  // namespace dr
