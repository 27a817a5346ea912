#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "dr/color.hpp"
#include "dr/convolve.hpp"
#include "dr/error.hpp"
#include "dr/pipeline.hpp"
#include "pipeline_internal.hpp"

namespace dr::pipeline {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& fftw_mutex() {
  static std::mutex mu;
  return mu;
}

struct FftBuffers {
  int w = 0;
  int h = 0;
  double* real = nullptr;
  fftw_complex* freq = nullptr;

  FftBuffers(int width, int height) : w(width), h(height) {
    real = fftw_alloc_real(static_cast<size_t>(w) * h);
    freq = fftw_alloc_complex(static_cast<size_t>(h) * (w / 2 + 1));
    if (!real || !freq) throw std::bad_alloc();
  }
  FftBuffers(const FftBuffers&) = delete;
  FftBuffers& operator=(const FftBuffers&) = delete;
  ~FftBuffers() {
    fftw_free(real);
    fftw_free(freq);
  }

  void forward() {
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(fftw_mutex());
      plan = fftw_plan_dft_r2c_2d(h, w, real, freq, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }

  void inverse() {
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(fftw_mutex());
      plan = fftw_plan_dft_c2r_2d(h, w, freq, real, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
};

}  // namespace

ImageBuffer wiener_deblur(const ImageBuffer& img, const Kernel2D& kernel,
                          double nsr) {
  if (!(nsr > 0.0) || !std::isfinite(nsr)) {
    throw Error(ErrorKind::InvalidParam, "nsr must be > 0");
  }
  const int w = img.width();
  const int h = img.height();
  if (kernel.kw() > w || kernel.kh() > h) {
    throw Error(ErrorKind::KernelTooLarge, "kernel exceeds image size");
  }

  const int pad = std::max(16, std::max(kernel.kw(), kernel.kh()));
  const int pw = w + 2 * pad;
  const int ph = h + 2 * pad;
  const int freq_w = pw / 2 + 1;
  const size_t freq_n = static_cast<size_t>(ph) * freq_w;

  // Optical transfer function: kernel center wrapped to the origin of the
  // padded tile so convolution by the kernel is a pure phaseless product.
  std::vector<std::complex<double>> otf(freq_n);
  {
    FftBuffers buf(pw, ph);
    std::fill(buf.real, buf.real + static_cast<size_t>(pw) * ph, 0.0);
    const int cx = kernel.kw() / 2;
    const int cy = kernel.kh() / 2;
    for (int ky = 0; ky < kernel.kh(); ++ky) {
      for (int kx = 0; kx < kernel.kw(); ++kx) {
        const int ox = ((kx - cx) % pw + pw) % pw;
        const int oy = ((ky - cy) % ph + ph) % ph;
        buf.real[static_cast<size_t>(oy) * pw + ox] = kernel.at(kx, ky);
      }
    }
    buf.forward();
    for (size_t i = 0; i < freq_n; ++i) {
      otf[i] = {buf.freq[i][0], buf.freq[i][1]};
    }
  }

  const ImageBuffer work = img.to_float();
  ImageBuffer result(w, h, img.channels(), Depth::F32);
  const double inv_n = 1.0 / (static_cast<double>(pw) * ph);

  FftBuffers buf(pw, ph);
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < ph; ++y) {
      const int sy = fold_index(y - pad, h, EdgePolicy::Reflect);
      for (int x = 0; x < pw; ++x) {
        const int sx = fold_index(x - pad, w, EdgePolicy::Reflect);
        buf.real[static_cast<size_t>(y) * pw + x] =
            work.at_f32(sx, sy, c);
      }
    }
    buf.forward();
    for (size_t i = 0; i < freq_n; ++i) {
      const std::complex<double> f(buf.freq[i][0], buf.freq[i][1]);
      const std::complex<double> g =
          f * std::conj(otf[i]) / (std::norm(otf[i]) + nsr);
      buf.freq[i][0] = g.real();
      buf.freq[i][1] = g.imag();
    }
    buf.inverse();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double v =
            buf.real[static_cast<size_t>(y + pad) * pw + (x + pad)] * inv_n;
        result.set_f32(x, y, c,
                       static_cast<float>(std::clamp(v, 0.0, 1.0)));
      }
    }
  }
  return img.depth() == Depth::U8 ? result.to_u8() : result;
}

namespace {

// Spectral evidence for kernel search. A length-L box blur multiplies the
// spectrum by a sinc with zeros spaced 1/L cycles/px along the motion
// direction, so the log power spectrum carries a dip comb at nu = k/L and a
// strong high-frequency cutoff along that direction. Both are measured on
// 1D profiles of the log spectrum.
struct SpectralEvidence {
  std::vector<double> log_power;  // r2c half plane, row-major
  int cw = 0;
  int ch = 0;

  static constexpr double kNu0 = 0.02;
  static constexpr double kNu1 = 0.48;
  static constexpr double kDnu = 1.0 / 512.0;
  static constexpr double kMuSpan = 0.30;
  static constexpr int kBaselineHalf = 10;

  explicit SpectralEvidence(const ImageBuffer& crop) {
    cw = crop.width();
    ch = crop.height();
    std::vector<float> gray = luma_plane_255(crop);
    std::vector<double> windowed(gray.size());
    double mean = 0.0;
    for (float v : gray) mean += v;
    mean /= static_cast<double>(gray.size());
    for (int y = 0; y < ch; ++y) {
      const double wy =
          0.5 - 0.5 * std::cos(2.0 * M_PI * y / std::max(1, ch - 1));
      for (int x = 0; x < cw; ++x) {
        const double wx =
            0.5 - 0.5 * std::cos(2.0 * M_PI * x / std::max(1, cw - 1));
        windowed[static_cast<size_t>(y) * cw + x] =
            (gray[static_cast<size_t>(y) * cw + x] - mean) * wx * wy;
      }
    }
    FftBuffers buf(cw, ch);
    std::copy(windowed.begin(), windowed.end(), buf.real);
    buf.forward();
    const int wc = cw / 2 + 1;
    log_power.resize(static_cast<size_t>(ch) * wc);
    for (size_t i = 0; i < log_power.size(); ++i) {
      const double re = buf.freq[i][0];
      const double im = buf.freq[i][1];
      log_power[i] = std::log(re * re + im * im + 1e-12);
    }
  }

  // Bilinear sample at (fx, fy) in cycles/px using conjugate symmetry.
  double sample(double fx, double fy) const {
    if (fx < 0) {
      fx = -fx;
      fy = -fy;
    }
    const double bx = fx * cw;
    double by = fy * ch;
    if (by < 0) by += ch;
    const int wc = cw / 2 + 1;
    const int x0 = std::min(static_cast<int>(bx), wc - 2);
    const int y0 = static_cast<int>(by) % ch;
    const int y1 = (y0 + 1) % ch;
    const double tx = bx - x0;
    const double ty = by - static_cast<int>(by);
    const auto at = [&](int y, int x) {
      return log_power[static_cast<size_t>(y) * wc + x];
    };
    return (1 - tx) * ((1 - ty) * at(y0, x0) + ty * at(y1, x0)) +
           tx * ((1 - ty) * at(y0, x0 + 1) + ty * at(y1, x0 + 1));
  }

  // Log power at radial frequency nu along the direction, averaged across
  // the perpendicular coordinate so scene anisotropy cancels.
  std::vector<double> direction_profile(double angle_deg) const {
    const double rad = angle_deg * M_PI / 180.0;
    const double ux = std::cos(rad);
    const double uy = std::sin(rad);
    std::vector<double> prof;
    prof.reserve(static_cast<size_t>((kNu1 - kNu0) / kDnu) + 1);
    for (double nu = kNu0; nu <= kNu1 + 1e-12; nu += kDnu) {
      double acc = 0.0;
      int n = 0;
      for (double mu = -kMuSpan; mu <= kMuSpan + 1e-9; mu += 1.0 / 256.0) {
        const double fx = nu * ux - mu * uy;
        const double fy = nu * uy + mu * ux;
        if (std::abs(fx) > 0.499 || std::abs(fy) > 0.499) continue;
        acc += sample(fx, fy);
        ++n;
      }
      prof.push_back(n ? acc / n : 0.0);
    }
    return prof;
  }
};

// Dips of the profile below a running-mean baseline; non-positive signal.
// Texture peaks clip to zero so only null-like notches remain.
std::vector<double> dip_signal(const std::vector<double>& prof, int half) {
  const int n = static_cast<int>(prof.size());
  std::vector<double> out(prof.size());
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    int cnt = 0;
    for (int j = std::max(0, i - half); j <= std::min(n - 1, i + half); ++j) {
      acc += prof[j];
      ++cnt;
    }
    out[i] = std::min(0.0, prof[i] - acc / cnt);
  }
  return out;
}

// Cosine probe at quefrency L: dips the candidate predicts (nu = k/L) add
// credit, dips elsewhere subtract, so harmonically related lengths separate.
double comb_score(const std::vector<double>& dips, double length) {
  double acc = 0.0;
  for (size_t i = 0; i < dips.size(); ++i) {
    const double nu = SpectralEvidence::kNu0 + i * SpectralEvidence::kDnu;
    acc += dips[i] * std::cos(2.0 * M_PI * nu * length);
  }
  return -acc / static_cast<double>(dips.size());
}

double highband_mean(const std::vector<double>& prof) {
  double acc = 0.0;
  int n = 0;
  for (size_t i = 0; i < prof.size(); ++i) {
    const double nu = SpectralEvidence::kNu0 + i * SpectralEvidence::kDnu;
    if (nu < 0.28 || nu > 0.45) continue;
    acc += prof[i];
    ++n;
  }
  return n ? acc / n : 0.0;
}

double normalize_angle(double angle_deg) {
  return angle_deg - 180.0 * std::floor(angle_deg / 180.0);
}

}  // namespace

MotionKernelEstimate estimate_motion_kernel(
    const ImageBuffer& img, const std::vector<double>& lengths,
    const std::vector<double>& angles) {
  if (lengths.empty() || angles.empty()) {
    throw Error(ErrorKind::InvalidParam, "kernel search grid is empty");
  }
  std::vector<double> sorted_lengths = lengths;
  std::vector<double> sorted_angles = angles;
  std::sort(sorted_lengths.begin(), sorted_lengths.end());
  std::sort(sorted_angles.begin(), sorted_angles.end());

  const int cw = std::min(256, img.width());
  const int ch = std::min(256, img.height());
  const bool scoreable = cw >= 16 && ch >= 16;

  // Blur along a direction also wipes out its high band; candidates whose
  // direction shows no attenuation relative to the perpendicular are scene
  // artifacts. The margin keeps identity ahead unless comb evidence is
  // significant.
  constexpr double kAttWeight = 0.02;
  constexpr double kMargin = 0.07;
  // Scores within this of each other are ties; rounding dust in the dip
  // signal must not override the smaller-length, smaller-angle preference.
  constexpr double kTieEps = 1e-9;

  struct AngleEvidence {
    std::vector<double> dips;
    double att = 0.0;
  };
  std::map<double, AngleEvidence> per_angle;
  if (scoreable) {
    const BoundingBox crop_box{(img.width() - cw) / 2,
                               (img.height() - ch) / 2, cw, ch};
    const SpectralEvidence evidence(crop_image(img, crop_box));
    std::map<double, std::vector<double>> profiles;
    const auto profile_of = [&](double a) -> const std::vector<double>& {
      auto it = profiles.find(a);
      if (it == profiles.end()) {
        it = profiles.emplace(a, evidence.direction_profile(a)).first;
      }
      return it->second;
    };
    for (double angle : sorted_angles) {
      const double a = normalize_angle(angle);
      if (per_angle.count(a)) continue;
      const auto& prof = profile_of(a);
      const auto& perp = profile_of(normalize_angle(a + 90.0));
      per_angle.emplace(
          a, AngleEvidence{dip_signal(prof, SpectralEvidence::kBaselineHalf),
                           highband_mean(perp) - highband_mean(prof)});
    }
  }

  MotionKernelEstimate best;
  bool have_best = false;
  for (double length : sorted_lengths) {
    for (double angle : sorted_angles) {
      const double norm_angle = normalize_angle(angle);
      const Kernel2D k = motion_line_kernel(length, norm_angle);
      if (k.kw() > img.width() || k.kh() > img.height()) continue;
      double score = 0.0;
      if (scoreable && length >= 2.0) {
        const AngleEvidence& ev = per_angle.at(norm_angle);
        score = comb_score(ev.dips, length) + kAttWeight * ev.att - kMargin;
      }
      if (!have_best || score > best.score) {
        best = {length, norm_angle, score};
        have_best = true;
      }
    }
  }
  if (!have_best) {
    throw Error(ErrorKind::InvalidParam,
                "no kernel candidate fits the image");
  }
  return best;
}

ImageBuffer run_deblur_pipeline(const ImageBuffer& img, const DeblurPlan& plan,
                                Fragment& frag, const Deadline& deadline) {
  check_deadline(deadline);
  ImageBuffer deblurred;
  {
    StageTimer timer(frag, "deblur", plan.deblurrer.name);
    if (plan.deblurrer.transport == backend::Transport::Builtin &&
        plan.deblurrer.target == "wiener_deblur") {
      // Inline path keeps the kernel estimate for the report; the registry
      // count matches what a dispatched invocation would record.
      const MotionKernelEstimate est =
          estimate_motion_kernel(img, plan.grid_lengths, plan.grid_angles);
      frag.kernel = est;
      const Kernel2D k = motion_line_kernel(est.length, est.angle);
      deblurred = wiener_deblur(img, k, plan.wiener_nsr);
      backend::Registry::instance().count(plan.deblurrer.name);
    } else {
      deblurred = backend::invoke_image_backend(plan.deblurrer, img);
    }
  }

  check_deadline(deadline);
  backend::DetectionResult faces;
  {
    StageTimer timer(frag, "face_detect", plan.face_detector.name);
    faces = backend::invoke_detector_backend(plan.face_detector, deblurred);
  }
  frag.boxes = merge_and_sort_boxes(std::move(faces.boxes));
  if (frag.boxes.empty()) return deblurred;

  check_deadline(deadline);
  ImageBuffer out = deblurred;
  {
    StageTimer timer(frag, "face_enhance", plan.face_enhancer.name);
    for (const auto& d : frag.boxes) {
      check_deadline(deadline);
      const int margin_px = std::max(
          1, static_cast<int>(std::lround(0.25 * std::max(d.box.w, d.box.h))));
      const BoundingBox margin =
          d.box.dilated(margin_px, out.width(), out.height());
      const ImageBuffer crop = crop_image(deblurred, margin);
      const ImageBuffer enhanced =
          backend::invoke_image_backend(plan.face_enhancer, crop);

      ImageBuffer patch = out;
      paste_into(patch, enhanced, margin.x, margin.y);

      Mask region(out.width(), out.height(), MaskKind::Face, 0.0f);
      for (int y = d.box.y; y < d.box.y2(); ++y) {
        for (int x = d.box.x; x < d.box.x2(); ++x) region.set(x, y, 1.0f);
      }
      out = fusion::composite(out, patch,
                              fusion::feather_mask(region, plan.feather));
    }
  }
  return out;
}

}  // namespace dr::pipeline
