// AVX2 kernel variants. Element-wise kernels use mul/add (no FMA) in the same
// per-element operation order as the scalar reference, so results are
// bit-identical; reductions accumulate lane-wise and differ from scalar only
// in summation order. Tails run the scalar formula.

#include "dr/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define DR_KERNELS_HAVE_AVX2 1
#include <immintrin.h>
#else
#define DR_KERNELS_HAVE_AVX2 0
#endif

#include <cmath>

namespace dr::kernels {

#if DR_KERNELS_HAVE_AVX2
namespace {

void u8_to_f32_avx2(const uint8_t* src, float* dst, size_t n) {
  const __m256 k255 = _mm256_set1_ps(255.0f);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m128i bytes = _mm_loadl_epi64(
        reinterpret_cast<const __m128i*>(src + i));
    const __m256i ints = _mm256_cvtepu8_epi32(bytes);
    const __m256 f = _mm256_cvtepi32_ps(ints);
    _mm256_storeu_ps(dst + i, _mm256_div_ps(f, k255));
  }
  for (; i < n; ++i) dst[i] = static_cast<float>(src[i]) / 255.0f;
}

void f32_to_u8_avx2(const float* src, uint8_t* dst, size_t n) {
  const __m256 k255 = _mm256_set1_ps(255.0f);
  const __m256 zero = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_mul_ps(_mm256_loadu_ps(src + i), k255);
    v = _mm256_round_ps(v, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    v = _mm256_max_ps(v, zero);
    v = _mm256_min_ps(v, k255);
    const __m256i ints = _mm256_cvtps_epi32(v);
    const __m128i lo = _mm256_castsi256_si128(ints);
    const __m128i hi = _mm256_extracti128_si256(ints, 1);
    const __m128i packed16 = _mm_packus_epi32(lo, hi);
    const __m128i packed8 = _mm_packus_epi16(packed16, packed16);
    _mm_storel_epi64(reinterpret_cast<__m128i*>(dst + i), packed8);
  }
  for (; i < n; ++i) {
    float v = std::nearbyintf(src[i] * 255.0f);
    if (v < 0.0f) v = 0.0f;
    if (v > 255.0f) v = 255.0f;
    dst[i] = static_cast<uint8_t>(v);
  }
}

void blend_avx2(const float* base, const float* patch, const float* mask,
                float* out, size_t n) {
  const __m256 one = _mm256_set1_ps(1.0f);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 m = _mm256_loadu_ps(mask + i);
    const __m256 b = _mm256_loadu_ps(base + i);
    const __m256 p = _mm256_loadu_ps(patch + i);
    const __m256 t1 = _mm256_mul_ps(_mm256_sub_ps(one, m), b);
    const __m256 t2 = _mm256_mul_ps(m, p);
    _mm256_storeu_ps(out + i, _mm256_add_ps(t1, t2));
  }
  for (; i < n; ++i) {
    const float m = mask[i];
    out[i] = (1.0f - m) * base[i] + m * patch[i];
  }
}

void scale_add_avx2(float* acc, const float* src, float tap, size_t n) {
  const __m256 t = _mm256_set1_ps(tap);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 a = _mm256_loadu_ps(acc + i);
    const __m256 s = _mm256_loadu_ps(src + i);
    _mm256_storeu_ps(acc + i, _mm256_add_ps(a, _mm256_mul_ps(t, s)));
  }
  for (; i < n; ++i) acc[i] += tap * src[i];
}

void conv_h_avx2(const float* padded, const float* taps, int ntaps,
                 float* out, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 s = _mm256_setzero_ps();
    for (int j = 0; j < ntaps; ++j) {
      const __m256 t = _mm256_set1_ps(taps[j]);
      const __m256 x = _mm256_loadu_ps(padded + i + j);
      s = _mm256_add_ps(s, _mm256_mul_ps(t, x));
    }
    _mm256_storeu_ps(out + i, s);
  }
  for (; i < n; ++i) {
    float s = 0.0f;
    for (int j = 0; j < ntaps; ++j) s += taps[j] * padded[i + j];
    out[i] = s;
  }
}

void unsharp_mix_avx2(const float* img, const float* blurred, float amount,
                      float* out, size_t n) {
  const __m256 a = _mm256_set1_ps(amount);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 x = _mm256_loadu_ps(img + i);
    const __m256 b = _mm256_loadu_ps(blurred + i);
    const __m256 d = _mm256_sub_ps(x, b);
    _mm256_storeu_ps(out + i, _mm256_add_ps(x, _mm256_mul_ps(a, d)));
  }
  for (; i < n; ++i) {
    const float d = img[i] - blurred[i];
    out[i] = img[i] + amount * d;
  }
}

uint64_t sum_sq_diff_u8_avx2(const uint8_t* a, const uint8_t* b, size_t n) {
  __m256i acc = _mm256_setzero_si256();
  size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const __m128i ab = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a + i));
    const __m128i bb = _mm_loadu_si128(reinterpret_cast<const __m128i*>(b + i));
    const __m256i a16 = _mm256_cvtepu8_epi16(ab);
    const __m256i b16 = _mm256_cvtepu8_epi16(bb);
    const __m256i d = _mm256_sub_epi16(a16, b16);
    // 16-bit diffs in [-255,255]; madd gives per-pair i32 sums <= 2*255^2
    const __m256i sq = _mm256_madd_epi16(d, d);
    acc = _mm256_add_epi64(acc, _mm256_cvtepi32_epi64(
                                    _mm256_castsi256_si128(sq)));
    acc = _mm256_add_epi64(acc, _mm256_cvtepi32_epi64(
                                    _mm256_extracti128_si256(sq, 1)));
  }
  alignas(32) uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) {
    const int d = static_cast<int>(a[i]) - static_cast<int>(b[i]);
    total += static_cast<uint64_t>(d * d);
  }
  return total;
}

double sum_sq_diff_f32_avx2(const float* a, const float* b, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(a + i),
                                   _mm256_loadu_ps(b + i));
    const __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(d));
    const __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(d, 1));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(lo, lo));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(hi, hi));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) {
    const double d = static_cast<double>(a[i] - b[i]);
    total += d * d;
  }
  return total;
}

}  // namespace

const Ops* avx2_ops_or_null() {
  static const Ops table = {
      u8_to_f32_avx2,    f32_to_u8_avx2,      blend_avx2,
      scale_add_avx2,    conv_h_avx2,         unsharp_mix_avx2,
      sum_sq_diff_u8_avx2, sum_sq_diff_f32_avx2,
  };
  return &table;
}
#else
const Ops* avx2_ops_or_null() { return nullptr; }
#endif

}  // namespace dr::kernels
