#pragma once
// Raster value types shared by every pipeline stage. Buffers are plain
// values: copy freely, never mutate through a const reference. 8-bit samples
// are in [0,255], float samples in [0,1].

#include <cstdint>
#include <span>
#include <vector>

#include "dr/error.hpp"

namespace dr {

enum class Depth : uint8_t { U8, F32 };

class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels, Depth depth);

  static ImageBuffer from_u8(int width, int height, int channels,
                             std::vector<uint8_t> data);
  static ImageBuffer from_f32(int width, int height, int channels,
                              std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  Depth depth() const { return depth_; }
  bool empty() const { return width_ == 0; }
  size_t sample_count() const {
    return static_cast<size_t>(width_) * height_ * channels_;
  }
  size_t pixel_count() const {
    return static_cast<size_t>(width_) * height_;
  }

  std::span<const uint8_t> u8() const;
  std::span<uint8_t> u8();
  std::span<const float> f32() const;
  std::span<float> f32();

  uint8_t at_u8(int x, int y, int ch = 0) const;
  float at_f32(int x, int y, int ch = 0) const;
  void set_u8(int x, int y, int ch, uint8_t v);
  void set_f32(int x, int y, int ch, float v);

  // depth conversions; /255.0 going up, round-half-even then clamp going down
  ImageBuffer to_float() const;
  ImageBuffer to_u8() const;
  ImageBuffer with_depth(Depth d) const;

  bool same_shape(const ImageBuffer& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  std::vector<ImageBuffer> split_planes() const;
  static ImageBuffer merge_planes(const std::vector<ImageBuffer>& planes);

  bool operator==(const ImageBuffer& other) const;

 private:
  size_t index(int x, int y, int ch) const {
    return (static_cast<size_t>(y) * width_ + x) * channels_ + ch;
  }
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  Depth depth_ = Depth::U8;
  std::vector<uint8_t> u8_;
  std::vector<float> f32_;
};

enum class MaskKind : uint8_t { Text, ReflectionStrong, Face, Generic };

const char* mask_kind_name(MaskKind kind);

// Single-channel soft mask in [0,1], aligned to a companion image.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, MaskKind kind, float fill = 0.0f);
  static Mask from_values(int width, int height, MaskKind kind,
                          std::vector<float> values);

  int width() const { return width_; }
  int height() const { return height_; }
  MaskKind kind() const { return kind_; }
  bool empty() const { return width_ == 0; }

  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }
  float at(int x, int y) const { return values_[size_t(y) * width_ + x]; }
  void set(int x, int y, float v) { values_[size_t(y) * width_ + x] = v; }

  bool matches(const ImageBuffer& img) const {
    return width_ == img.width() && height_ == img.height();
  }
  bool is_binary() const;
  double area_fraction() const;  // mean value
  size_t count_above(float t) const;
  Mask thresholded(float t) const;  // binary {0,1} mask, value > t

 private:
  int width_ = 0;
  int height_ = 0;
  MaskKind kind_ = MaskKind::Generic;
  std::vector<float> values_;
};

struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool valid_within(int img_w, int img_h) const {
    return w >= 1 && h >= 1 && x >= 0 && y >= 0 && x + w <= img_w &&
           y + h <= img_h;
  }
  int x2() const { return x + w; }
  int y2() const { return y + h; }
  long area() const { return static_cast<long>(w) * h; }
  BoundingBox united(const BoundingBox& o) const;
  BoundingBox dilated(int px, int img_w, int img_h) const;  // clamped
  double iou(const BoundingBox& o) const;
  bool operator==(const BoundingBox& o) const = default;
};

class Kernel2D {
 public:
  Kernel2D() = default;
  // throws InvalidKernel on even sizes, non-finite taps, or size mismatch
  Kernel2D(int kw, int kh, std::vector<float> taps);

  int kw() const { return kw_; }
  int kh() const { return kh_; }
  std::span<const float> taps() const { return taps_; }
  float at(int tx, int ty) const { return taps_[size_t(ty) * kw_ + tx]; }
  double tap_sum() const;
  Kernel2D normalized() const;  // taps scaled so they sum to 1

  static Kernel2D identity();

 private:
  int kw_ = 0;
  int kh_ = 0;
  std::vector<float> taps_;
};

}  // namespace dr
