#pragma once
#include <vector>

#include "dr/image.hpp"

namespace dr::morph {

// grayscale min/max over a (2rx+1) x (2ry+1) window, replicate edges
std::vector<float> dilate_rect(const std::vector<float>& plane, int w, int h,
                               int rx, int ry);
std::vector<float> erode_rect(const std::vector<float>& plane, int w, int h,
                              int rx, int ry);

Mask dilate_disk(const Mask& m, int radius);
Mask erode_disk(const Mask& m, int radius);
Mask close_disk(const Mask& m, int radius);  // dilate then erode

// Otsu's threshold over a 256-bin histogram; returns the bin index t such
// that the split is {<= t} / {> t}. Degenerate histograms return 0.
int otsu_threshold(const std::vector<long>& hist);

struct Component {
  BoundingBox box;
  int pixels = 0;
};

// 8-connected components of a binary mask, smallest-first label order is
// row-major discovery order.
std::vector<Component> connected_components(const Mask& binary,
                                            int min_pixels = 1);

// Paints the pixels of every component whose size is >= min_pixels.
Mask filter_components(const Mask& binary, int min_pixels);

// Sliding-histogram median, window (2r+1)^2, replicate edges.
std::vector<uint8_t> median_filter_u8(const std::vector<uint8_t>& plane,
                                      int w, int h, int radius);

}  // namespace dr::morph
