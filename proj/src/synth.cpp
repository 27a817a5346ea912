#include "dr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "dr/color.hpp"
#include "dr/convolve.hpp"
#include "dr/error.hpp"
#include "dr/image_io.hpp"
#include "dr/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dr::synth {

namespace {

std::string format_number(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e9) {
    return std::to_string(static_cast<long long>(v));
  }
  std::string s = std::to_string(v);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

json params_to_json(const DegradationSpec& s) {
  json j;
  j["kind"] = s.kind;
  if (s.kind == "noise" || s.kind == "blur") {
    j["sigma"] = s.sigma;
  } else if (s.kind == "jpeg") {
    j["quality"] = s.quality;
  } else if (s.kind == "motion") {
    j["length"] = s.length;
    j["angle"] = s.angle;
  } else if (s.kind == "reflection") {
    j["opacity"] = s.opacity;
    j["pattern"] = s.pattern;
    if (s.region) {
      j["region"] = {{"x", s.region->x},
                     {"y", s.region->y},
                     {"w", s.region->w},
                     {"h", s.region->h}};
    }
  }
  return j;
}

DegradationSpec spec_from_json(const json& j) {
  DegradationSpec s;
  s.kind = j.at("kind").get<std::string>();
  if (s.kind == "noise" || s.kind == "blur") {
    s.sigma = j.at("sigma").get<double>();
  } else if (s.kind == "jpeg") {
    s.quality = j.at("quality").get<int>();
  } else if (s.kind == "motion") {
    s.length = j.at("length").get<double>();
    s.angle = j.at("angle").get<double>();
  } else if (s.kind == "reflection") {
    s.opacity = j.at("opacity").get<double>();
    s.pattern = j.at("pattern").get<std::string>();
    if (j.contains("region")) {
      const auto& r = j.at("region");
      s.region = BoundingBox{r.at("x").get<int>(), r.at("y").get<int>(),
                             r.at("w").get<int>(), r.at("h").get<int>()};
    }
  }
  s.validate();
  return s;
}

}  // namespace

Category DegradationSpec::category() const {
  if (kind == "noise" || kind == "blur" || kind == "jpeg") return Category::A;
  if (kind == "reflection") return Category::B;
  if (kind == "motion") return Category::C;
  return Category::D;
}

std::string DegradationSpec::slug() const {
  if (kind == "noise") return "noise" + format_number(sigma);
  if (kind == "blur") return "blur" + format_number(sigma);
  if (kind == "jpeg") return "jpeg" + std::to_string(quality);
  if (kind == "motion")
    return "motion" + format_number(length) + "a" + format_number(angle);
  if (kind == "reflection")
    return "reflect_" + pattern + "_" +
           std::to_string(static_cast<int>(std::lround(opacity * 100)));
  return "clean";
}

void DegradationSpec::validate() const {
  if (kind == "noise") {
    if (sigma < 0) throw Error(ErrorKind::InvalidParam, "noise sigma < 0");
  } else if (kind == "blur") {
    if (sigma < 0) throw Error(ErrorKind::InvalidParam, "blur sigma < 0");
  } else if (kind == "jpeg") {
    if (quality < 1 || quality > 100)
      throw Error(ErrorKind::InvalidParam, "jpeg quality outside 1..100");
  } else if (kind == "motion") {
    if (length < 1) throw Error(ErrorKind::InvalidParam, "motion length < 1");
  } else if (kind == "reflection") {
    if (opacity < 0 || opacity > 1)
      throw Error(ErrorKind::InvalidParam, "opacity outside [0,1]");
    if (pattern != "blobs" && pattern != "window_frame")
      throw Error(ErrorKind::InvalidParam,
                  "unknown reflection pattern: " + pattern);
  } else if (kind != "clean") {
    throw Error(ErrorKind::InvalidParam, "unknown degradation kind: " + kind);
  }
}

std::string CorpusManifest::to_json() const {
  json j;
  j["version"] = version;
  j["seed"] = seed;
  json arr = json::array();
  for (const auto& e : entries) {
    json je;
    je["clean"] = e.clean;
    je["degraded"] = e.degraded;
    je["category"] = category_name(e.spec.category());
    je["params"] = params_to_json(e.spec);
    je["stream_id"] = e.stream_id;
    arr.push_back(std::move(je));
  }
  j["entries"] = std::move(arr);
  return j.dump(2) + "\n";
}

CorpusManifest CorpusManifest::from_json(const std::string& text) {
  CorpusManifest m;
  try {
    const json j = json::parse(text);
    m.version = j.at("version").get<int>();
    m.seed = j.at("seed").get<uint64_t>();
    for (const auto& je : j.at("entries")) {
      CorpusEntry e;
      e.clean = je.at("clean").get<std::string>();
      e.degraded = je.at("degraded").get<std::string>();
      e.spec = spec_from_json(je.at("params"));
      e.stream_id = je.at("stream_id").get<uint64_t>();
      Category declared;
      if (!parse_category(je.at("category").get<std::string>(), declared) ||
          declared != e.spec.category()) {
        throw Error(ErrorKind::ConfigError,
                    "manifest category does not match params for " + e.degraded);
      }
      m.entries.push_back(std::move(e));
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::ConfigError,
                std::string("bad manifest: ") + ex.what());
  }
  return m;
}

void CorpusManifest::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  out << to_json();
}

CorpusManifest CorpusManifest::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

namespace {

DegradationSpec sigma_spec(const char* kind, double sigma) {
  DegradationSpec s;
  s.kind = kind;
  s.sigma = sigma;
  return s;
}

DegradationSpec jpeg_spec(int quality) {
  DegradationSpec s;
  s.kind = "jpeg";
  s.quality = quality;
  return s;
}

DegradationSpec motion_spec(double length, double angle) {
  DegradationSpec s;
  s.kind = "motion";
  s.length = length;
  s.angle = angle;
  return s;
}

DegradationSpec reflection_spec(double opacity, const char* pattern) {
  DegradationSpec s;
  s.kind = "reflection";
  s.opacity = opacity;
  s.pattern = pattern;
  return s;
}

DegradationSpec clean_spec() {
  DegradationSpec s;
  s.kind = "clean";
  return s;
}

}  // namespace

SpecGrid SpecGrid::defaults() {
  SpecGrid g;
  for (double s : {10.0, 25.0, 50.0}) g.specs.push_back(sigma_spec("noise", s));
  for (double s : {1.0, 2.0, 4.0}) g.specs.push_back(sigma_spec("blur", s));
  for (int q : {10, 30, 50}) g.specs.push_back(jpeg_spec(q));
  g.specs.push_back(motion_spec(9, 0));
  g.specs.push_back(motion_spec(15, 60));
  g.specs.push_back(motion_spec(25, 120));
  g.specs.push_back(reflection_spec(0.4, "blobs"));
  g.specs.push_back(reflection_spec(0.7, "window_frame"));
  g.specs.push_back(reflection_spec(1.0, "blobs"));
  g.specs.push_back(clean_spec());
  return g;
}

SpecGrid SpecGrid::mid_or_higher() {
  SpecGrid g;
  for (double s : {25.0, 50.0}) g.specs.push_back(sigma_spec("noise", s));
  for (double s : {2.0, 4.0}) g.specs.push_back(sigma_spec("blur", s));
  for (int q : {10, 30}) g.specs.push_back(jpeg_spec(q));
  g.specs.push_back(motion_spec(15, 60));
  g.specs.push_back(motion_spec(25, 120));
  g.specs.push_back(reflection_spec(0.7, "window_frame"));
  g.specs.push_back(reflection_spec(1.0, "blobs"));
  g.specs.push_back(clean_spec());
  return g;
}

SpecGrid SpecGrid::from_json(const std::string& text) {
  SpecGrid g;
  try {
    const json j = json::parse(text);
    for (const auto& je : j.at("specs")) g.specs.push_back(spec_from_json(je));
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::ConfigError,
                std::string("bad grid file: ") + ex.what());
  }
  if (g.specs.empty())
    throw Error(ErrorKind::ConfigError, "grid file lists no specs");
  return g;
}

ImageBuffer add_gaussian_noise(const ImageBuffer& img, double sigma,
                               uint64_t stream) {
  if (sigma < 0) throw Error(ErrorKind::InvalidParam, "noise sigma < 0");
  if (sigma == 0) return img;
  rng::Rng rng(stream);
  ImageBuffer out = img;
  if (img.depth() == Depth::U8) {
    auto dst = out.u8();
    const auto src = img.u8();
    for (size_t i = 0; i < src.size(); ++i) {
      const double v = double(src[i]) + sigma * rng.next_gaussian();
      dst[i] = static_cast<uint8_t>(
          std::clamp(std::nearbyint(v), 0.0, 255.0));
    }
  } else {
    auto dst = out.f32();
    const auto src = img.f32();
    const double scale = sigma / 255.0;
    for (size_t i = 0; i < src.size(); ++i) {
      const double v = double(src[i]) + scale * rng.next_gaussian();
      dst[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

ImageBuffer jpeg_degrade(const ImageBuffer& img, int quality) {
  const ImageBuffer u8 = img.depth() == Depth::U8 ? img : img.to_u8();
  return io::decode_jpeg(io::encode_jpeg(u8, quality));
}

ImageBuffer motion_blur(const ImageBuffer& img, double length, double angle) {
  const Kernel2D k = motion_line_kernel(length, angle);
  if (k.kw() == 1 && k.kh() == 1) return img;
  const ImageBuffer blurred = convolve(img.to_float(), k);
  return img.depth() == Depth::U8 ? blurred.to_u8() : blurred;
}

std::pair<ImageBuffer, Mask> overlay_reflection(const ImageBuffer& img,
                                                const ImageBuffer& overlay,
                                                double opacity,
                                                const BoundingBox& region,
                                                double edge_width) {
  if (opacity < 0 || opacity > 1)
    throw Error(ErrorKind::InvalidParam, "opacity outside [0,1]");
  if (!region.valid_within(img.width(), img.height()))
    throw Error(ErrorKind::InvalidRegion, "overlay region out of bounds");
  if (!overlay.same_shape(img))
    throw Error(ErrorKind::DimensionMismatch, "overlay shape != image shape");

  const int w = img.width(), h = img.height(), ch = img.channels();
  const std::vector<float> luma = luma_plane_255(overlay);
  const ImageBuffer src = img.depth() == Depth::U8 ? img : img.to_u8();
  const ImageBuffer ovl = overlay.depth() == Depth::U8 ? overlay
                                                       : overlay.to_u8();

  Mask mask(w, h, MaskKind::ReflectionStrong);
  ImageBuffer out = src;
  for (int y = region.y; y < region.y2(); ++y) {
    for (int x = region.x; x < region.x2(); ++x) {
      const int d = 1 + std::min({x - region.x, region.x2() - 1 - x,
                                  y - region.y, region.y2() - 1 - y});
      const float ramp =
          edge_width <= 0
              ? 1.0f
              : std::min(1.0f, float(d) / static_cast<float>(edge_width));
      const float m = static_cast<float>(opacity) * ramp *
                      luma[size_t(y) * w + x] / 255.0f;
      if (m <= 0.0f) continue;
      mask.set(x, y, m);
      for (int c = 0; c < ch; ++c) {
        const float v = (1.0f - m) * float(src.at_u8(x, y, c)) +
                        m * float(ovl.at_u8(x, y, c));
        out.set_u8(x, y, c,
                   static_cast<uint8_t>(
                       std::clamp(std::nearbyintf(v), 0.0f, 255.0f)));
      }
    }
  }
  if (img.depth() == Depth::F32) return {out.to_float(), mask};
  return {out, mask};
}

ImageBuffer render_reflection_pattern(const std::string& pattern, int width,
                                      int height, const BoundingBox& region,
                                      uint64_t stream) {
  if (!region.valid_within(width, height))
    throw Error(ErrorKind::InvalidRegion, "pattern region out of bounds");
  rng::Rng rng(stream);
  std::vector<float> plane(size_t(width) * height, 0.0f);

  auto deposit = [&](int x, int y, float v) {
    float& p = plane[size_t(y) * width + x];
    p = std::max(p, v);
  };

  // Saturated flat-top profiles: real specular glints clip the sensor, so the
  // pattern core sits at a constant near-white value and only the rim tapers.
  // A flat core also keeps the composite above the highlight gate for partial
  // opacities, where a fully tapered profile would survive only at its apex.
  auto flat_top = [](double d, double half) {
    const double t = std::abs(d) / half;
    if (t >= 1.0) return 0.0;
    if (t <= 0.55) return 1.0;
    const double u = (t - 0.55) / 0.45;
    return 1.0 - u * u;
  };

  if (pattern == "blobs") {
    const int nblobs = 4 + static_cast<int>(rng.next_below(3));
    const double rmin = std::min(region.w, region.h) / 5.0;
    const double rmax = std::min(region.w, region.h) / 3.0;
    for (int b = 0; b < nblobs; ++b) {
      const double cx = region.x + region.w * (0.2 + 0.6 * rng.next_double());
      const double cy = region.y + region.h * (0.2 + 0.6 * rng.next_double());
      const double radius = rmin + (rmax - rmin) * rng.next_double();
      const double peak = 252.0 + 3.0 * rng.next_double();
      const int x0 = std::max(region.x, int(cx - radius) - 1);
      const int x1 = std::min(region.x2(), int(cx + radius) + 2);
      const int y0 = std::max(region.y, int(cy - radius) - 1);
      const int y1 = std::min(region.y2(), int(cy + radius) + 2);
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          const double d = std::hypot(x - cx, y - cy);
          const double v = flat_top(d, radius);
          if (v > 0) deposit(x, y, static_cast<float>(peak * v));
        }
      }
    }
  } else if (pattern == "window_frame") {
    // two vertical bars and one horizontal bar, each with its own peak
    const double bar_w = std::max(4.0, region.w / 7.0);
    const double bar_h = std::max(4.0, region.h / 5.0);
    const double cx1 = region.x + region.w * (0.28 + 0.08 * rng.next_double());
    const double cx2 = region.x + region.w * (0.64 + 0.08 * rng.next_double());
    const double cyb = region.y + region.h * (0.42 + 0.16 * rng.next_double());
    const double pk1 = 252.0 + 3.0 * rng.next_double();
    const double pk2 = 252.0 + 3.0 * rng.next_double();
    const double pkb = 252.0 + 3.0 * rng.next_double();
    for (int y = region.y; y < region.y2(); ++y) {
      for (int x = region.x; x < region.x2(); ++x) {
        const double v = std::max({pk1 * flat_top(x - cx1, bar_w / 2),
                                   pk2 * flat_top(x - cx2, bar_w / 2),
                                   pkb * flat_top(y - cyb, bar_h / 2)});
        if (v > 0) deposit(x, y, static_cast<float>(v));
      }
    }
  } else {
    throw Error(ErrorKind::InvalidParam, "unknown pattern: " + pattern);
  }

  std::vector<uint8_t> data(size_t(width) * height * 3);
  for (size_t i = 0; i < plane.size(); ++i) {
    const auto v = static_cast<uint8_t>(
        std::clamp(std::nearbyintf(plane[i]), 0.0f, 255.0f));
    // slightly cool tint, saturation stays well under the highlight gate
    data[i * 3 + 0] = static_cast<uint8_t>(v * 0.97);
    data[i * 3 + 1] = v;
    data[i * 3 + 2] = v;
  }
  return ImageBuffer::from_u8(width, height, 3, std::move(data));
}

BoundingBox brightest_window(const ImageBuffer& img, int w, int h) {
  const int iw = img.width(), ih = img.height();
  w = std::min(w, iw);
  h = std::min(h, ih);
  const std::vector<float> luma = luma_plane_255(img);
  std::vector<double> integ(size_t(iw + 1) * (ih + 1), 0.0);
  for (int y = 0; y < ih; ++y) {
    double row = 0.0;
    for (int x = 0; x < iw; ++x) {
      row += luma[size_t(y) * iw + x];
      integ[size_t(y + 1) * (iw + 1) + x + 1] =
          integ[size_t(y) * (iw + 1) + x + 1] + row;
    }
  }
  auto window_sum = [&](int x, int y) {
    const int s = iw + 1;
    return integ[size_t(y + h) * s + x + w] - integ[size_t(y) * s + x + w] -
           integ[size_t(y + h) * s + x] + integ[size_t(y) * s + x];
  };
  BoundingBox best{0, 0, w, h};
  double best_sum = -1.0;
  for (int y = 0; y + h <= ih; ++y) {
    for (int x = 0; x + w <= iw; ++x) {
      const double s = window_sum(x, y);
      if (s > best_sum) {
        best_sum = s;
        best = {x, y, w, h};
      }
    }
  }
  return best;
}

ImageBuffer apply_spec(const ImageBuffer& clean, DegradationSpec& spec,
                       uint64_t stream, Mask* ground_truth_mask) {
  spec.validate();
  if (spec.kind == "noise") return add_gaussian_noise(clean, spec.sigma, stream);
  if (spec.kind == "blur") return gaussian_blur_image(clean, spec.sigma);
  if (spec.kind == "jpeg") return jpeg_degrade(clean, spec.quality);
  if (spec.kind == "motion") return motion_blur(clean, spec.length, spec.angle);
  if (spec.kind == "reflection") {
    if (!spec.region) {
      spec.region = brightest_window(clean,
                                     std::max(16, clean.width() * 2 / 5),
                                     std::max(16, clean.height() * 3 / 10));
    }
    const ImageBuffer ovl = render_reflection_pattern(
        spec.pattern, clean.width(), clean.height(), *spec.region, stream);
    auto [out, mask] = overlay_reflection(clean, ovl, spec.opacity,
                                          *spec.region);
    if (ground_truth_mask) *ground_truth_mask = std::move(mask);
    return out;
  }
  return clean;
}

CorpusManifest make_corpus(const std::string& clean_dir, const SpecGrid& grid,
                           const std::string& out_dir, uint64_t seed) {
  std::vector<fs::path> cleans;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(clean_dir, ec)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg")
      cleans.push_back(entry.path());
  }
  if (ec) throw Error(ErrorKind::IoError, "cannot list " + clean_dir);
  if (cleans.empty())
    throw Error(ErrorKind::EmptyCorpus, "no decodable images in " + clean_dir);
  std::sort(cleans.begin(), cleans.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string();
            });

  fs::create_directories(out_dir);
  CorpusManifest manifest;
  manifest.seed = seed;
  for (const auto& clean_path : cleans) {
    const std::string fname = clean_path.filename().string();
    const std::string stem = clean_path.stem().string();
    const ImageBuffer clean_img = io::load_image(clean_path);
    for (const DegradationSpec& grid_spec : grid.specs) {
      DegradationSpec spec = grid_spec;
      const std::string slug = spec.slug();
      const uint64_t stream = rng::derive_stream(seed, fname + "/" + slug);
      std::string out_name;
      if (spec.kind == "clean") {
        out_name = stem + "__clean" + clean_path.extension().string();
        fs::copy_file(clean_path, fs::path(out_dir) / out_name,
                      fs::copy_options::overwrite_existing);
      } else {
        out_name = stem + "__" + slug + ".png";
        const ImageBuffer degraded = apply_spec(clean_img, spec, stream);
        io::save_png(degraded, fs::path(out_dir) / out_name);
      }
      manifest.entries.push_back(
          {clean_path.string(), out_name, spec, stream});
    }
  }
  manifest.save((fs::path(out_dir) / "manifest.json").string());
  return manifest;
}

}  // namespace dr::synth
