#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "dr/convolve.hpp"
#include "dr/error.hpp"
#include "dr/fusion.hpp"
#include "dr/image.hpp"
#include "dr/image_io.hpp"
#include "dr/kernels.hpp"
#include "dr/metrics.hpp"
#include "dr/morphology.hpp"
#include "dr/rng.hpp"
#include "support/scenes.hpp"

using namespace dr;

namespace {

std::vector<float> random_floats(size_t n, uint64_t seed, float lo, float hi) {
  rng::Rng r(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = lo + float(r.next_double()) * (hi - lo);
  return v;
}

std::vector<uint8_t> random_bytes(size_t n, uint64_t seed) {
  rng::Rng r(seed);
  std::vector<uint8_t> v(n);
  for (auto& x : v) x = uint8_t(r.next_below(256));
  return v;
}

ImageBuffer flat_u8(int w, int h, int ch, uint8_t v) {
  return ImageBuffer::from_u8(w, h, ch,
                              std::vector<uint8_t>(size_t(w) * h * ch, v));
}

}  // namespace

TEST_CASE("scalar ops table is complete") {
  const auto& ops = kernels::scalar_ops();
  CHECK(ops.u8_to_f32 != nullptr);
  CHECK(ops.f32_to_u8 != nullptr);
  CHECK(ops.blend != nullptr);
  CHECK(ops.scale_add != nullptr);
  CHECK(ops.conv_h != nullptr);
  CHECK(ops.unsharp_mix != nullptr);
  CHECK(ops.sum_sq_diff_u8 != nullptr);
  CHECK(ops.sum_sq_diff_f32 != nullptr);
  CHECK(kernels::isa_available(kernels::Isa::Scalar));
  CHECK(kernels::active_name() != nullptr);
}

TEST_CASE("u8 to f32 round trip is the identity") {
  const auto& ops = kernels::active();
  std::vector<uint8_t> src(256);
  std::iota(src.begin(), src.end(), 0);
  std::vector<float> mid(256);
  std::vector<uint8_t> back(256);
  ops.u8_to_f32(src.data(), mid.data(), src.size());
  ops.f32_to_u8(mid.data(), back.data(), src.size());
  CHECK(back == src);
  CHECK(mid[0] == 0.0f);
  CHECK(mid[255] == 1.0f);
}

TEST_CASE("f32 to u8 clamps out-of-range input") {
  const auto& ops = kernels::active();
  const std::vector<float> src = {-1.0f, -0.001f, 0.0f, 1.0f, 1.001f, 7.0f};
  std::vector<uint8_t> dst(src.size());
  ops.f32_to_u8(src.data(), dst.data(), src.size());
  CHECK(dst == std::vector<uint8_t>({0, 0, 0, 255, 255, 255}));
}

TEST_CASE("simd variants match the scalar reference") {
  if (!kernels::isa_available(kernels::Isa::Avx2)) {
    MESSAGE("avx2 unavailable on this cpu; dispatch equivalence skipped");
    return;
  }
  const auto& s = kernels::ops_for(kernels::Isa::Scalar);
  const auto& v = kernels::ops_for(kernels::Isa::Avx2);

  // Lengths straddle the vector width so tail handling is exercised.
  for (size_t n : {size_t(1), size_t(7), size_t(8), size_t(9), size_t(31),
                   size_t(64), size_t(1013)}) {
    CAPTURE(n);
    const auto a = random_floats(n, 101 + n, -0.25f, 1.25f);
    const auto b = random_floats(n, 202 + n, -0.25f, 1.25f);
    const auto m = random_floats(n, 303 + n, 0.0f, 1.0f);
    const auto ua = random_bytes(n, 404 + n);
    const auto ub = random_bytes(n, 505 + n);

    std::vector<float> f1(n), f2(n);
    s.u8_to_f32(ua.data(), f1.data(), n);
    v.u8_to_f32(ua.data(), f2.data(), n);
    CHECK(f1 == f2);

    std::vector<uint8_t> d1(n), d2(n);
    s.f32_to_u8(a.data(), d1.data(), n);
    v.f32_to_u8(a.data(), d2.data(), n);
    CHECK(d1 == d2);

    s.blend(a.data(), b.data(), m.data(), f1.data(), n);
    v.blend(a.data(), b.data(), m.data(), f2.data(), n);
    CHECK(f1 == f2);

    f1 = a;
    f2 = a;
    s.scale_add(f1.data(), b.data(), 0.37f, n);
    v.scale_add(f2.data(), b.data(), 0.37f, n);
    CHECK(f1 == f2);

    s.unsharp_mix(a.data(), b.data(), 0.8f, f1.data(), n);
    v.unsharp_mix(a.data(), b.data(), 0.8f, f2.data(), n);
    CHECK(f1 == f2);

    const std::vector<float> taps = {0.1f, 0.2f, 0.4f, 0.2f, 0.1f};
    const auto padded = random_floats(n + taps.size() - 1, 606 + n, 0.f, 1.f);
    s.conv_h(padded.data(), taps.data(), int(taps.size()), f1.data(), n);
    v.conv_h(padded.data(), taps.data(), int(taps.size()), f2.data(), n);
    CHECK(f1 == f2);

    // Integer reduction is order-independent, so exact equality holds.
    CHECK(s.sum_sq_diff_u8(ua.data(), ub.data(), n) ==
          v.sum_sq_diff_u8(ua.data(), ub.data(), n));

    // Float reduction may reassociate; compare under a relative tolerance.
    const double r1 = s.sum_sq_diff_f32(a.data(), b.data(), n);
    const double r2 = v.sum_sq_diff_f32(a.data(), b.data(), n);
    CHECK(r2 == doctest::Approx(r1).epsilon(1e-6));
  }
}

TEST_CASE("psnr closed forms on flat images") {
  const int w = 64, h = 48;
  const auto a = flat_u8(w, h, 3, 100);
  const auto b10 = flat_u8(w, h, 3, 110);
  const auto b1 = flat_u8(w, h, 3, 101);

  // MSE 100 -> 10*log10(255^2/100) = 28.1308 dB.
  CHECK(metrics::psnr(a, b10) == doctest::Approx(28.1308).epsilon(1e-4));
  // MSE 1 -> 48.1308 dB.
  CHECK(metrics::psnr(a, b1) == doctest::Approx(48.1308).epsilon(1e-4));
  CHECK(std::isinf(metrics::psnr(a, a)));
  CHECK(metrics::psnr(a, a) > 0);
  CHECK(metrics::psnr(a, b10) == metrics::psnr(b10, a));
}

TEST_CASE("psnr uses peak 1.0 for float images") {
  const int n = 32 * 32;
  ImageBuffer a = ImageBuffer::from_f32(32, 32, 1, std::vector<float>(n, 0.5f));
  ImageBuffer b = ImageBuffer::from_f32(32, 32, 1, std::vector<float>(n, 0.6f));
  // MSE 0.01 against peak 1.0 -> 20 dB.
  CHECK(metrics::psnr(a, b) == doctest::Approx(20.0).epsilon(1e-4));
}

TEST_CASE("psnr rejects shape mismatches") {
  CHECK_THROWS_AS(metrics::psnr(flat_u8(8, 8, 1, 0), flat_u8(8, 9, 1, 0)),
                  Error);
  try {
    metrics::psnr(flat_u8(8, 8, 1, 0), flat_u8(9, 8, 1, 0));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("ssim of an image with itself is one") {
  const ImageBuffer scene = testsupport::make_scene(7, 96, 64);
  CHECK(metrics::ssim(scene, scene) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ssim decreases with heavier distortion") {
  const ImageBuffer scene = testsupport::make_scene(11, 128, 96);
  rng::Rng r(99);
  auto noisy = [&](double sigma) {
    ImageBuffer out = scene;
    for (auto& v : out.u8()) {
      const double nv = v + sigma * r.next_gaussian();
      v = uint8_t(std::clamp(nv, 0.0, 255.0));
    }
    return out;
  };
  const double s_light = metrics::ssim(scene, noisy(5));
  const double s_heavy = metrics::ssim(scene, noisy(35));
  CHECK(s_light > s_heavy);
  CHECK(s_light < 1.0);
  CHECK(s_heavy > 0.0);
}

TEST_CASE("ssim requires at least one 8x8 window") {
  const auto tiny = flat_u8(7, 12, 1, 128);
  try {
    metrics::ssim(tiny, tiny);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WindowTooLarge);
  }
  const auto ok = flat_u8(8, 8, 1, 128);
  CHECK(metrics::ssim(ok, ok) == doctest::Approx(1.0));
}

TEST_CASE("convolution of an impulse reproduces the kernel") {
  ImageBuffer img = ImageBuffer::from_f32(9, 9, 1,
                                          std::vector<float>(81, 0.0f));
  img.set_f32(4, 4, 0, 1.0f);
  const Kernel2D k(3, 3, {0.05f, 0.10f, 0.15f, 0.20f, 0.25f, 0.10f, 0.05f,
                          0.05f, 0.05f});
  const ImageBuffer out = convolve(img, k);
  for (int ty = 0; ty < 3; ++ty) {
    for (int tx = 0; tx < 3; ++tx) {
      CHECK(out.at_f32(3 + tx, 3 + ty) ==
            doctest::Approx(k.at(tx, ty)).epsilon(1e-6));
    }
  }
  CHECK(out.at_f32(0, 0) == doctest::Approx(0.0f));
}

TEST_CASE("convolution with a normalized kernel preserves constants") {
  const ImageBuffer img =
      ImageBuffer::from_f32(16, 12, 3, std::vector<float>(16 * 12 * 3, 0.42f));
  const ImageBuffer out = convolve(img, motion_line_kernel(9, 30));
  for (float v : out.f32()) CHECK(v == doctest::Approx(0.42f).epsilon(1e-5));
}

TEST_CASE("convolution is linear") {
  const auto av = random_floats(20 * 14, 1, 0.f, 0.5f);
  auto bv = random_floats(20 * 14, 2, 0.f, 0.5f);
  auto sum = av;
  for (size_t i = 0; i < sum.size(); ++i) sum[i] += bv[i];
  const auto a = ImageBuffer::from_f32(20, 14, 1, av);
  const auto b = ImageBuffer::from_f32(20, 14, 1, std::move(bv));
  const auto ab = ImageBuffer::from_f32(20, 14, 1, std::move(sum));
  const Kernel2D k = motion_line_kernel(5, 72);
  const auto ca = convolve(a, k);
  const auto cb = convolve(b, k);
  const auto cab = convolve(ab, k);
  for (size_t i = 0; i < av.size(); ++i) {
    CHECK(cab.f32()[i] ==
          doctest::Approx(ca.f32()[i] + cb.f32()[i]).epsilon(1e-5));
  }
}

TEST_CASE("edge index folding") {
  CHECK(fold_index(-1, 5, EdgePolicy::Replicate) == 0);
  CHECK(fold_index(-3, 5, EdgePolicy::Replicate) == 0);
  CHECK(fold_index(5, 5, EdgePolicy::Replicate) == 4);
  CHECK(fold_index(2, 5, EdgePolicy::Replicate) == 2);
  // Symmetric reflection: the edge sample itself is repeated.
  CHECK(fold_index(-1, 5, EdgePolicy::Reflect) == 0);
  CHECK(fold_index(-2, 5, EdgePolicy::Reflect) == 1);
  CHECK(fold_index(5, 5, EdgePolicy::Reflect) == 4);
  CHECK(fold_index(6, 5, EdgePolicy::Reflect) == 3);
}

TEST_CASE("gaussian taps are normalized with radius 3 sigma") {
  const auto one = gaussian_taps(0.0);
  CHECK(one.size() == 1);
  CHECK(one[0] == 1.0f);
  for (double sigma : {0.5, 1.0, 2.5}) {
    const auto taps = gaussian_taps(sigma);
    CHECK(int(taps.size()) == 2 * int(std::ceil(3 * sigma)) + 1);
    double sum = 0;
    for (float t : taps) sum += t;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    // Symmetric and peaked at the center.
    CHECK(taps.front() == doctest::Approx(taps.back()));
    CHECK(taps[taps.size() / 2] >= taps.front());
  }
}

TEST_CASE("motion kernels are normalized and odd-sized") {
  for (double len : {1.0, 9.0, 15.0, 25.0}) {
    for (double ang : {0.0, 37.0, 60.0, 120.0}) {
      const Kernel2D k = motion_line_kernel(len, ang);
      CHECK(k.kw() % 2 == 1);
      CHECK(k.kh() % 2 == 1);
      CHECK(k.tap_sum() == doctest::Approx(1.0).epsilon(1e-5));
    }
  }
  // Length-1 blur degenerates to (nearly) an identity.
  ImageBuffer img = testsupport::make_scene(3, 48, 32).to_float();
  const ImageBuffer out = convolve(img, motion_line_kernel(1, 45));
  CHECK(metrics::psnr(img, out) > 40.0);
}

TEST_CASE("rect dilation and erosion bracket the input") {
  const int w = 17, h = 13;
  auto plane = random_floats(size_t(w) * h, 5, 0.f, 1.f);
  const auto hi = morph::dilate_rect(plane, w, h, 2, 1);
  const auto lo = morph::erode_rect(plane, w, h, 2, 1);
  for (size_t i = 0; i < plane.size(); ++i) {
    CHECK(lo[i] <= plane[i]);
    CHECK(plane[i] <= hi[i]);
  }
  // A constant plane is a fixed point of both.
  const std::vector<float> c(size_t(w) * h, 0.3f);
  CHECK(morph::dilate_rect(c, w, h, 3, 3) == c);
  CHECK(morph::erode_rect(c, w, h, 3, 3) == c);
}

TEST_CASE("otsu separates a bimodal histogram") {
  std::vector<long> hist(256, 0);
  for (int i = 40; i < 60; ++i) hist[i] = 100;
  for (int i = 180; i < 220; ++i) hist[i] = 80;
  const int t = morph::otsu_threshold(hist);
  CHECK(t >= 59);
  CHECK(t < 180);
  CHECK(morph::otsu_threshold(std::vector<long>(256, 0)) == 0);
}

TEST_CASE("connected components find separated rectangles") {
  Mask m(40, 30, MaskKind::Generic, 0.0f);
  for (int y = 2; y < 8; ++y)
    for (int x = 3; x < 12; ++x) m.set(x, y, 1.0f);
  for (int y = 15; y < 25; ++y)
    for (int x = 20; x < 26; ++x) m.set(x, y, 1.0f);
  m.set(35, 2, 1.0f);  // single-pixel speck

  auto comps = morph::connected_components(m);
  CHECK(comps.size() == 3);
  comps = morph::connected_components(m, 5);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].box == BoundingBox{3, 2, 9, 6});
  CHECK(comps[0].pixels == 54);
  CHECK(comps[1].box == BoundingBox{20, 15, 6, 10});

  const Mask kept = morph::filter_components(m, 5);
  CHECK(kept.count_above(0.5f) == 54 + 60);
  CHECK(kept.at(35, 2) == 0.0f);
}

TEST_CASE("disk closing fills small gaps") {
  Mask m(30, 10, MaskKind::Generic, 0.0f);
  for (int y = 4; y <= 6; ++y) {
    for (int x = 5; x < 12; ++x) m.set(x, y, 1.0f);
    for (int x = 14; x < 20; ++x) m.set(x, y, 1.0f);  // 2 px gap
  }
  const Mask closed = morph::close_disk(m, 2);
  CHECK(closed.at(12, 5) == 1.0f);
  CHECK(closed.at(13, 5) == 1.0f);
  // Closing never removes foreground.
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 30; ++x)
      if (m.at(x, y) > 0.5f) CHECK(closed.at(x, y) > 0.5f);
}

TEST_CASE("median filter passes constants and kills salt noise") {
  const int w = 21, h = 15;
  std::vector<uint8_t> plane(size_t(w) * h, 90);
  CHECK(morph::median_filter_u8(plane, w, h, 2) == plane);
  plane[size_t(7) * w + 9] = 255;
  const auto out = morph::median_filter_u8(plane, w, h, 2);
  CHECK(out[size_t(7) * w + 9] == 90);
}

TEST_CASE("composite obeys mask endpoints and convexity") {
  const ImageBuffer base = testsupport::make_scene(21, 64, 48);
  const ImageBuffer patch = testsupport::make_scene(22, 64, 48);

  const Mask zeros(64, 48, MaskKind::Generic, 0.0f);
  const Mask ones(64, 48, MaskKind::Generic, 1.0f);
  CHECK(fusion::composite(base, patch, zeros) == base);
  CHECK(fusion::composite(base, patch, ones) == patch);

  Mask half(64, 48, MaskKind::Generic, 0.0f);
  rng::Rng r(17);
  for (auto& v : half.values()) v = float(r.next_double());
  const ImageBuffer mixed = fusion::composite(base, patch, half);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      for (int c = 0; c < 3; ++c) {
        const int lo = std::min(base.at_u8(x, y, c), patch.at_u8(x, y, c));
        const int hi = std::max(base.at_u8(x, y, c), patch.at_u8(x, y, c));
        const int v = mixed.at_u8(x, y, c);
        CHECK(v >= lo - 1);
        CHECK(v <= hi + 1);
      }
    }
  }
}

TEST_CASE("composite rejects mismatched shapes") {
  const auto a = flat_u8(10, 10, 3, 0);
  const auto b = flat_u8(10, 11, 3, 0);
  const Mask m(10, 10, MaskKind::Generic, 0.0f);
  CHECK_THROWS_AS(fusion::composite(a, b, m), Error);
}

TEST_CASE("feathering keeps saturated masks saturated") {
  const Mask ones(32, 24, MaskKind::Generic, 1.0f);
  const Mask f = fusion::feather_mask(ones, {4.0});
  for (float v : f.values()) CHECK(v == doctest::Approx(1.0f).epsilon(1e-6));
  const Mask zeros(32, 24, MaskKind::Generic, 0.0f);
  const Mask g = fusion::feather_mask(zeros, {4.0});
  for (float v : g.values()) CHECK(v == doctest::Approx(0.0f).epsilon(1e-6));
}

TEST_CASE("feathering a half plane yields a monotone transition band") {
  const int w = 64, h = 16;
  Mask m(w, h, MaskKind::Generic, 0.0f);
  for (int y = 0; y < h; ++y)
    for (int x = w / 2; x < w; ++x) m.set(x, y, 1.0f);
  const Mask f = fusion::feather_mask(m, {5.0});
  // Sigma 2.5 -> support radius 8; far from the edge the mask is unchanged.
  for (int y = 0; y < h; ++y) {
    CHECK(f.at(2, y) == doctest::Approx(0.0f).epsilon(1e-5));
    CHECK(f.at(w - 3, y) == doctest::Approx(1.0f).epsilon(1e-5));
    for (int x = 1; x < w; ++x) CHECK(f.at(x, y) >= f.at(x - 1, y) - 1e-6f);
  }
  // The boundary column is a genuine intermediate value.
  CHECK(f.at(w / 2, h / 2) > 0.1f);
  CHECK(f.at(w / 2, h / 2) < 0.9f);
}

TEST_CASE("feathered seams carry less energy than hard seams") {
  const ImageBuffer base = flat_u8(64, 32, 3, 40);
  const ImageBuffer patch = flat_u8(64, 32, 3, 220);
  Mask hard(64, 32, MaskKind::Generic, 0.0f);
  for (int y = 0; y < 32; ++y)
    for (int x = 32; x < 64; ++x) hard.set(x, y, 1.0f);
  const double e_hard = fusion::seam_energy(base, patch, hard);
  const double e_soft =
      fusion::seam_energy(base, patch, fusion::feather_mask(hard, {5.0}));
  CHECK(e_hard > 0.0);
  CHECK(e_soft < e_hard);
  // Degenerate masks have no 0.5 level set.
  CHECK(fusion::seam_energy(base, patch, Mask(64, 32, MaskKind::Generic,
                                              0.0f)) == 0.0);
}

TEST_CASE("png round trip is lossless") {
  for (int ch : {1, 3}) {
    ImageBuffer img(37, 23, ch, Depth::U8);
    rng::Rng r(31 + ch);
    for (auto& v : img.u8()) v = uint8_t(r.next_below(256));
    const ImageBuffer back = io::decode_png(io::encode_png(img));
    CHECK(back == img);
  }
}

TEST_CASE("rgba payload carries image and mask losslessly") {
  ImageBuffer img(25, 19, 3, Depth::U8);
  rng::Rng r(77);
  for (auto& v : img.u8()) v = uint8_t(r.next_below(256));
  Mask m(25, 19, MaskKind::Generic, 0.0f);
  for (int y = 3; y < 12; ++y)
    for (int x = 5; x < 15; ++x) m.set(x, y, 1.0f);
  auto [back_img, back_mask] =
      io::decode_png_rgba(io::encode_png_rgba(img, m));
  CHECK(back_img == img);
  REQUIRE(back_mask.width() == 25);
  for (int y = 0; y < 19; ++y)
    for (int x = 0; x < 25; ++x)
      CHECK(back_mask.at(x, y) == doctest::Approx(m.at(x, y)).epsilon(1e-3));
}

TEST_CASE("jpeg encode decode round trip stays close") {
  const ImageBuffer img = testsupport::make_scene(41, 96, 64);
  const ImageBuffer back = io::decode_jpeg(io::encode_jpeg(img, 90));
  CHECK(back.same_shape(img));
  CHECK(metrics::psnr(img, back) > 30.0);
}

TEST_CASE("format sniffing") {
  const auto png = io::encode_png(flat_u8(8, 8, 3, 1));
  const auto jpg = io::encode_jpeg(flat_u8(8, 8, 3, 1), 80);
  CHECK(io::looks_like_png(png));
  CHECK_FALSE(io::looks_like_jpeg(png));
  CHECK(io::looks_like_jpeg(jpg));
  CHECK_FALSE(io::looks_like_png(jpg));
  const std::vector<uint8_t> junk = {1, 2, 3, 4};
  CHECK_FALSE(io::looks_like_png(junk));
  CHECK_THROWS_AS(io::decode_png(junk), Error);
}

TEST_CASE("rng streams are deterministic and named streams independent") {
  rng::Rng a(123), b(123), c(124);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u64();
    all_equal = all_equal && (va == b.next_u64());
    any_diff = any_diff || (va != c.next_u64());
  }
  CHECK(all_equal);
  CHECK(any_diff);

  CHECK(rng::derive_stream(42, "x.png") == rng::derive_stream(42, "x.png"));
  CHECK(rng::derive_stream(42, "x.png") != rng::derive_stream(42, "y.png"));
  CHECK(rng::derive_stream(42, "x.png") != rng::derive_stream(43, "x.png"));
}

TEST_CASE("fnv1a64 matches published vectors") {
  CHECK(rng::fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(rng::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(rng::fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("rng distributions are sane") {
  rng::Rng r(7);
  for (int i = 0; i < 1000; ++i) CHECK(r.next_below(10) < 10);
  double sum = 0, sum2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double g = r.next_gaussian();
    sum += g;
    sum2 += g * g;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.05));
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.05));
  double u = 0;
  for (int i = 0; i < n; ++i) {
    const double d = r.next_double();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
    u += d;
  }
  CHECK(u / n == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("error carries kind and exit code") {
  const Error e(ErrorKind::BackendError, "backend exited", 3);
  CHECK(e.kind() == ErrorKind::BackendError);
  CHECK(e.code() == 3);
  CHECK(std::string(e.kind_name()) == "BackendError");
  CHECK(std::string(e.what()).find("backend exited") != std::string::npos);
  const Error plain(ErrorKind::InvalidParam, "p");
  CHECK(plain.code() == 0);
}
