// Scalar reference kernels. These define the semantics; SIMD variants must
// match them (bit-exact for element-wise kernels, tolerance for reductions).

#include "dr/kernels.hpp"

#include <cmath>

namespace dr::kernels {
namespace {

void u8_to_f32_scalar(const uint8_t* src, float* dst, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = static_cast<float>(src[i]) / 255.0f;
}

void f32_to_u8_scalar(const float* src, uint8_t* dst, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    float v = std::nearbyintf(src[i] * 255.0f);
    if (v < 0.0f) v = 0.0f;
    if (v > 255.0f) v = 255.0f;
    dst[i] = static_cast<uint8_t>(v);
  }
}

void blend_scalar(const float* base, const float* patch, const float* mask,
                  float* out, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    const float m = mask[i];
    out[i] = (1.0f - m) * base[i] + m * patch[i];
  }
}

void scale_add_scalar(float* acc, const float* src, float tap, size_t n) {
  for (size_t i = 0; i < n; ++i) acc[i] += tap * src[i];
}

void conv_h_scalar(const float* padded, const float* taps, int ntaps,
                   float* out, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    float s = 0.0f;
    for (int j = 0; j < ntaps; ++j) s += taps[j] * padded[i + j];
    out[i] = s;
  }
}

void unsharp_mix_scalar(const float* img, const float* blurred, float amount,
                        float* out, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    const float d = img[i] - blurred[i];
    out[i] = img[i] + amount * d;
  }
}

uint64_t sum_sq_diff_u8_scalar(const uint8_t* a, const uint8_t* b, size_t n) {
  uint64_t acc = 0;
  for (size_t i = 0; i < n; ++i) {
    const int d = static_cast<int>(a[i]) - static_cast<int>(b[i]);
    acc += static_cast<uint64_t>(d * d);
  }
  return acc;
}

double sum_sq_diff_f32_scalar(const float* a, const float* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i] - b[i]);
    acc += d * d;
  }
  return acc;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table = {
      u8_to_f32_scalar,    f32_to_u8_scalar,      blend_scalar,
      scale_add_scalar,    conv_h_scalar,         unsharp_mix_scalar,
      sum_sq_diff_u8_scalar, sum_sq_diff_f32_scalar,
  };
  return table;
}

}  // namespace dr::kernels
