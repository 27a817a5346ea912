#pragma once

#include "dr/image.hpp"

namespace dr::metrics {

// Mean squared error over all samples. Throws DimensionMismatch when shapes
// or depths differ.
double mse(const ImageBuffer& a, const ImageBuffer& b);

// Peak signal-to-noise ratio in dB. Peak is 255 for U8 inputs and 1.0 for F32
// inputs. Identical images yield +infinity.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

// Mean structural similarity over all 8x8 windows at stride 1, computed on a
// 0..255 grayscale. Stabilizers: C1 = (0.01*255)^2, C2 = (0.03*255)^2.
// Window statistics use population variance (divide by 64). Color inputs are
// converted to grayscale first. Throws WindowTooLarge when either dimension
// is below 8.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace dr::metrics
