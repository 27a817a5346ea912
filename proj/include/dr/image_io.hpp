#pragma once
// PNG and JPEG codecs. PNG is the lossless interchange format for corpus
// files and backend payloads; JPEG decode covers photo inputs and the
// encode side backs the compression degradation generator.

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "dr/image.hpp"

namespace dr::io {

bool looks_like_png(std::span<const uint8_t> bytes);
bool looks_like_jpeg(std::span<const uint8_t> bytes);

// Sniffs the format from file content; UnsupportedFormat for anything that
// is neither PNG nor JPEG, IoError when unreadable.
ImageBuffer load_image(const std::filesystem::path& path);

void save_png(const ImageBuffer& img, const std::filesystem::path& path);

std::vector<uint8_t> encode_png(const ImageBuffer& img);
ImageBuffer decode_png(std::span<const uint8_t> bytes);

// RGBA payloads carry an image plus a mask in the alpha channel (backend
// inpainting protocol).
std::vector<uint8_t> encode_png_rgba(const ImageBuffer& rgb, const Mask& alpha);
std::pair<ImageBuffer, Mask> decode_png_rgba(std::span<const uint8_t> bytes);

std::vector<uint8_t> encode_jpeg(const ImageBuffer& img, int quality);
ImageBuffer decode_jpeg(std::span<const uint8_t> bytes);

}  // namespace dr::io
