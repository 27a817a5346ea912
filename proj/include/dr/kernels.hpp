#pragma once
// Data-parallel inner loops shared by the imaging core. Every kernel has a
// scalar reference implementation and may have SIMD variants; the dispatch
// layer picks the best ISA supported by the running CPU. Element-wise kernels
// are bit-exact across variants; reduction kernels may differ in summation
// order and are equivalence-tested under a tolerance.

#include <cstddef>
#include <cstdint>

namespace dr::kernels {

struct Ops {
  // dst[i] = src[i] / 255.0f
  void (*u8_to_f32)(const uint8_t* src, float* dst, size_t n);
  // dst[i] = clamp(round_half_even(src[i] * 255.0f), 0, 255)
  void (*f32_to_u8)(const float* src, uint8_t* dst, size_t n);
  // out[i] = (1 - m[i]) * base[i] + m[i] * patch[i]
  void (*blend)(const float* base, const float* patch, const float* mask,
                float* out, size_t n);
  // acc[i] += tap * src[i]
  void (*scale_add)(float* acc, const float* src, float tap, size_t n);
  // out[i] = sum_j taps[j] * padded[i + j], j in [0, ntaps)
  void (*conv_h)(const float* padded, const float* taps, int ntaps,
                 float* out, size_t n);
  // out[i] = img[i] + amount * (img[i] - blurred[i])
  void (*unsharp_mix)(const float* img, const float* blurred, float amount,
                      float* out, size_t n);
  // sum of (a[i] - b[i])^2 in exact integer arithmetic
  uint64_t (*sum_sq_diff_u8)(const uint8_t* a, const uint8_t* b, size_t n);
  // sum of double(a[i] - b[i])^2; difference taken in float
  double (*sum_sq_diff_f32)(const float* a, const float* b, size_t n);
};

enum class Isa { Scalar, Avx2 };

const Ops& scalar_ops();
bool isa_available(Isa isa);
// Ops table for an explicit ISA; throws std::runtime_error if unsupported
// on this CPU. Intended for equivalence tests and benchmarks.
const Ops& ops_for(Isa isa);
// Best available table, resolved once per process.
const Ops& active();
const char* active_name();

}  // namespace dr::kernels
