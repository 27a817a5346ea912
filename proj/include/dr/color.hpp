#pragma once
#include <vector>

#include "dr/image.hpp"

namespace dr {

// Rec.601 luma; 1-channel inputs come back unchanged. Output keeps the
// input depth, 8-bit values round half-to-even.
ImageBuffer to_grayscale(const ImageBuffer& img);

// Luminance plane on the 0..255 scale regardless of input depth.
std::vector<float> luma_plane_255(const ImageBuffer& img);

// HSV-style saturation (max-min)/max per pixel, 0 for grayscale inputs.
std::vector<float> saturation_plane(const ImageBuffer& img);

}  // namespace dr
