#include "dr/image.hpp"

#include <algorithm>
#include <cmath>

#include "dr/kernels.hpp"

namespace dr {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidKernel: return "InvalidKernel";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::WindowTooLarge: return "WindowTooLarge";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::CodecError: return "CodecError";
    case ErrorKind::InvalidParam: return "InvalidParam";
    case ErrorKind::InvalidRegion: return "InvalidRegion";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::ImageTooSmall: return "ImageTooSmall";
    case ErrorKind::UnparseableResponse: return "UnparseableResponse";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::BackendError: return "BackendError";
    case ErrorKind::BackendTimeout: return "BackendTimeout";
    case ErrorKind::BackendProtocolError: return "BackendProtocolError";
    case ErrorKind::MaskTooLarge: return "MaskTooLarge";
    case ErrorKind::KernelTooLarge: return "KernelTooLarge";
    case ErrorKind::ImageTooLarge: return "ImageTooLarge";
    case ErrorKind::ClassificationFailed: return "ClassificationFailed";
    case ErrorKind::PipelineTimeout: return "PipelineTimeout";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Error";
}

namespace {

void check_dims(int width, int height, int channels) {
  if (width < 1 || height < 1)
    throw Error(ErrorKind::InvalidParam, "image dimensions must be >= 1");
  if (channels != 1 && channels != 3)
    throw Error(ErrorKind::InvalidParam, "channels must be 1 or 3");
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, int channels, Depth depth)
    : width_(width), height_(height), channels_(channels), depth_(depth) {
  check_dims(width, height, channels);
  if (depth_ == Depth::U8)
    u8_.assign(sample_count(), 0);
  else
    f32_.assign(sample_count(), 0.0f);
}

ImageBuffer ImageBuffer::from_u8(int width, int height, int channels,
                                 std::vector<uint8_t> data) {
  check_dims(width, height, channels);
  if (data.size() != size_t(width) * height * channels)
    throw Error(ErrorKind::InvalidParam, "sample count does not match shape");
  ImageBuffer img;
  img.width_ = width;
  img.height_ = height;
  img.channels_ = channels;
  img.depth_ = Depth::U8;
  img.u8_ = std::move(data);
  return img;
}

ImageBuffer ImageBuffer::from_f32(int width, int height, int channels,
                                  std::vector<float> data) {
  check_dims(width, height, channels);
  if (data.size() != size_t(width) * height * channels)
    throw Error(ErrorKind::InvalidParam, "sample count does not match shape");
  ImageBuffer img;
  img.width_ = width;
  img.height_ = height;
  img.channels_ = channels;
  img.depth_ = Depth::F32;
  img.f32_ = std::move(data);
  return img;
}

std::span<const uint8_t> ImageBuffer::u8() const {
  if (depth_ != Depth::U8)
    throw Error(ErrorKind::InvalidParam, "buffer is not 8-bit");
  return u8_;
}
std::span<uint8_t> ImageBuffer::u8() {
  if (depth_ != Depth::U8)
    throw Error(ErrorKind::InvalidParam, "buffer is not 8-bit");
  return u8_;
}
std::span<const float> ImageBuffer::f32() const {
  if (depth_ != Depth::F32)
    throw Error(ErrorKind::InvalidParam, "buffer is not float");
  return f32_;
}
std::span<float> ImageBuffer::f32() {
  if (depth_ != Depth::F32)
    throw Error(ErrorKind::InvalidParam, "buffer is not float");
  return f32_;
}

uint8_t ImageBuffer::at_u8(int x, int y, int ch) const {
  return u8_[index(x, y, ch)];
}
float ImageBuffer::at_f32(int x, int y, int ch) const {
  return f32_[index(x, y, ch)];
}
void ImageBuffer::set_u8(int x, int y, int ch, uint8_t v) {
  u8_[index(x, y, ch)] = v;
}
void ImageBuffer::set_f32(int x, int y, int ch, float v) {
  f32_[index(x, y, ch)] = v;
}

ImageBuffer ImageBuffer::to_float() const {
  if (depth_ == Depth::F32) return *this;
  ImageBuffer out(width_, height_, channels_, Depth::F32);
  kernels::active().u8_to_f32(u8_.data(), out.f32_.data(), sample_count());
  return out;
}

ImageBuffer ImageBuffer::to_u8() const {
  if (depth_ == Depth::U8) return *this;
  ImageBuffer out(width_, height_, channels_, Depth::U8);
  kernels::active().f32_to_u8(f32_.data(), out.u8_.data(), sample_count());
  return out;
}

ImageBuffer ImageBuffer::with_depth(Depth d) const {
  return d == Depth::U8 ? to_u8() : to_float();
}

std::vector<ImageBuffer> ImageBuffer::split_planes() const {
  std::vector<ImageBuffer> planes;
  planes.reserve(channels_);
  for (int c = 0; c < channels_; ++c) {
    ImageBuffer plane(width_, height_, 1, depth_);
    const size_t n = pixel_count();
    if (depth_ == Depth::U8) {
      for (size_t i = 0; i < n; ++i)
        plane.u8_[i] = u8_[i * channels_ + c];
    } else {
      for (size_t i = 0; i < n; ++i)
        plane.f32_[i] = f32_[i * channels_ + c];
    }
    planes.push_back(std::move(plane));
  }
  return planes;
}

ImageBuffer ImageBuffer::merge_planes(const std::vector<ImageBuffer>& planes) {
  if (planes.empty())
    throw Error(ErrorKind::InvalidParam, "no planes to merge");
  const int c = static_cast<int>(planes.size());
  if (c != 1 && c != 3)
    throw Error(ErrorKind::InvalidParam, "plane count must be 1 or 3");
  const ImageBuffer& first = planes.front();
  for (const auto& p : planes)
    if (!p.same_shape(first) || p.channels() != 1 || p.depth() != first.depth())
      throw Error(ErrorKind::DimensionMismatch, "planes disagree in shape");
  ImageBuffer out(first.width(), first.height(), c, first.depth());
  const size_t n = first.pixel_count();
  for (int ch = 0; ch < c; ++ch) {
    if (first.depth() == Depth::U8) {
      for (size_t i = 0; i < n; ++i)
        out.u8_[i * c + ch] = planes[ch].u8_[i];
    } else {
      for (size_t i = 0; i < n; ++i)
        out.f32_[i * c + ch] = planes[ch].f32_[i];
    }
  }
  return out;
}

bool ImageBuffer::operator==(const ImageBuffer& other) const {
  return width_ == other.width_ && height_ == other.height_ &&
         channels_ == other.channels_ && depth_ == other.depth_ &&
         u8_ == other.u8_ && f32_ == other.f32_;
}

const char* mask_kind_name(MaskKind kind) {
  switch (kind) {
    case MaskKind::Text: return "text";
    case MaskKind::ReflectionStrong: return "reflection-strong";
    case MaskKind::Face: return "face";
    case MaskKind::Generic: return "generic";
  }
  return "generic";
}

Mask::Mask(int width, int height, MaskKind kind, float fill)
    : width_(width), height_(height), kind_(kind) {
  if (width < 1 || height < 1)
    throw Error(ErrorKind::InvalidParam, "mask dimensions must be >= 1");
  values_.assign(size_t(width) * height, fill);
}

Mask Mask::from_values(int width, int height, MaskKind kind,
                       std::vector<float> values) {
  Mask m(width, height, kind);
  if (values.size() != m.values_.size())
    throw Error(ErrorKind::InvalidParam, "mask value count mismatch");
  m.values_ = std::move(values);
  return m;
}

bool Mask::is_binary() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](float v) { return v == 0.0f || v == 1.0f; });
}

double Mask::area_fraction() const {
  double s = 0.0;
  for (float v : values_) s += v;
  return values_.empty() ? 0.0 : s / double(values_.size());
}

size_t Mask::count_above(float t) const {
  return static_cast<size_t>(
      std::count_if(values_.begin(), values_.end(),
                    [t](float v) { return v > t; }));
}

Mask Mask::thresholded(float t) const {
  Mask out(width_, height_, kind_);
  for (size_t i = 0; i < values_.size(); ++i)
    out.values_[i] = values_[i] > t ? 1.0f : 0.0f;
  return out;
}

BoundingBox BoundingBox::united(const BoundingBox& o) const {
  const int nx = std::min(x, o.x);
  const int ny = std::min(y, o.y);
  const int nx2 = std::max(x2(), o.x2());
  const int ny2 = std::max(y2(), o.y2());
  return {nx, ny, nx2 - nx, ny2 - ny};
}

BoundingBox BoundingBox::dilated(int px, int img_w, int img_h) const {
  const int nx = std::max(0, x - px);
  const int ny = std::max(0, y - px);
  const int nx2 = std::min(img_w, x2() + px);
  const int ny2 = std::min(img_h, y2() + px);
  return {nx, ny, nx2 - nx, ny2 - ny};
}

double BoundingBox::iou(const BoundingBox& o) const {
  const int ix = std::max(x, o.x);
  const int iy = std::max(y, o.y);
  const int ix2 = std::min(x2(), o.x2());
  const int iy2 = std::min(y2(), o.y2());
  const long inter =
      std::max(0, ix2 - ix) * static_cast<long>(std::max(0, iy2 - iy));
  const long uni = area() + o.area() - inter;
  return uni > 0 ? double(inter) / double(uni) : 0.0;
}

Kernel2D::Kernel2D(int kw, int kh, std::vector<float> taps)
    : kw_(kw), kh_(kh), taps_(std::move(taps)) {
  if (kw < 1 || kh < 1 || kw % 2 == 0 || kh % 2 == 0)
    throw Error(ErrorKind::InvalidKernel, "kernel sizes must be odd and >= 1");
  if (taps_.size() != size_t(kw) * kh)
    throw Error(ErrorKind::InvalidKernel, "tap count does not match size");
  for (float t : taps_)
    if (!std::isfinite(t))
      throw Error(ErrorKind::InvalidKernel, "kernel taps must be finite");
}

double Kernel2D::tap_sum() const {
  double s = 0.0;
  for (float t : taps_) s += t;
  return s;
}

Kernel2D Kernel2D::normalized() const {
  const double s = tap_sum();
  if (s == 0.0)
    throw Error(ErrorKind::InvalidKernel, "kernel sums to zero");
  std::vector<float> taps(taps_.begin(), taps_.end());
  for (float& t : taps) t = static_cast<float>(t / s);
  return Kernel2D(kw_, kh_, std::move(taps));
}

Kernel2D Kernel2D::identity() { return Kernel2D(1, 1, {1.0f}); }

}  // namespace dr
