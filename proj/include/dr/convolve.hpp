#pragma once
#include <vector>

#include "dr/image.hpp"

namespace dr {

enum class EdgePolicy { Replicate, Reflect };

// Maps an out-of-range index into [0, n); replicate clamps, reflect mirrors
// symmetrically at the boundary (the edge sample repeats).
int fold_index(int i, int n, EdgePolicy edge);

// Direct 2-D convolution of a float image; the impulse response reproduces
// the kernel taps around the impulse (no flipping on symmetric kernels'
// behalf -- taps are applied as laid out).
ImageBuffer convolve(const ImageBuffer& img, const Kernel2D& k,
                     EdgePolicy edge = EdgePolicy::Replicate);

// Normalized 1-D Gaussian, radius ceil(3*sigma); {1} when sigma == 0.
std::vector<float> gaussian_taps(double sigma);

void gaussian_blur_plane(std::vector<float>& plane, int w, int h,
                         double sigma, EdgePolicy edge = EdgePolicy::Replicate);

// Separable Gaussian on any depth; 8-bit images round-trip through float.
ImageBuffer gaussian_blur_image(const ImageBuffer& img, double sigma,
                                EdgePolicy edge = EdgePolicy::Replicate);

// Anti-aliased line point-spread function for linear motion; normalized.
Kernel2D motion_line_kernel(double length, double angle_deg);

}  // namespace dr
