#pragma once
// Deterministic procedural fixtures shared by the test suites. Scenes are
// noise-free and sharp, with balanced edge orientations (so clean images do
// not look motion-blurred to the classifier), stripe periods that never
// divide the 8-px JPEG block pitch (so clean images show no fake
// blockiness), and one smooth bright low-saturation zone that reflection
// overlays can push past the highlight gate.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dr/image.hpp"

namespace testsupport {

// 3-channel 8-bit scene, pure function of (seed, size).
dr::ImageBuffer make_scene(uint64_t seed, int w = 256, int h = 192);

// Writes `count` scenes as scene_00.png .. into dir (created if absent).
// Returns the sorted file paths.
std::vector<std::string> write_scene_dir(const std::filesystem::path& dir,
                                         int count, uint64_t seed0);

dr::ImageBuffer make_flat(int w, int h, uint8_t r, uint8_t g, uint8_t b);

// Gray single-channel constant image.
dr::ImageBuffer make_flat_gray(int w, int h, uint8_t v);

// Fresh directory under the build tree; wiped if it already exists.
std::filesystem::path fresh_dir(const std::string& tag);

}  // namespace testsupport
