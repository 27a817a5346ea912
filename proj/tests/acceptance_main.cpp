// Acceptance gate. Each criterion prints exactly one PASS/FAIL line with the
// measured numbers behind the verdict; the process exits nonzero when any
// criterion fails. Criteria 2, 3 and 8 share one generated corpus.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dr/backend.hpp"
#include "dr/category.hpp"
#include "dr/config.hpp"
#include "dr/convolve.hpp"
#include "dr/fusion.hpp"
#include "dr/image.hpp"
#include "dr/image_io.hpp"
#include "dr/metrics.hpp"
#include "dr/orchestrator.hpp"
#include "dr/pipeline.hpp"
#include "dr/rng.hpp"
#include "dr/synth.hpp"
#include "json.hpp"
#include "support/scenes.hpp"
#include "support/stub_http.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dr;
using testsupport::fresh_dir;
using testsupport::make_flat;
using testsupport::make_scene;

namespace {

// ---------------------------------------------------------------- reporting

struct Check {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void expect(bool cond, const std::string& what) {
    if (!cond) failures.push_back(what);
  }
  void note(const std::string& s) { notes.push_back(s); }
};

struct Result {
  int id = 0;
  std::string label;
  bool pass = false;
  std::string detail;
};

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

std::vector<Result> g_results;

void run_criterion(int id, const std::string& label,
                   const std::function<void(Check&)>& body) {
  Result r;
  r.id = id;
  r.label = label;
  Check c;
  try {
    body(c);
    r.pass = c.failures.empty();
    r.detail = r.pass ? join(c.notes) : join(c.failures);
  } catch (const std::exception& ex) {
    r.pass = false;
    r.detail = std::string("exception: ") + ex.what();
  }
  g_results.push_back(std::move(r));
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

// ------------------------------------------------------------------ helpers

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// First top-level JSON object embedded in `text` (brace scan, string aware).
std::string extract_first_json(const std::string& text) {
  const size_t start = text.find('{');
  if (start == std::string::npos) throw std::runtime_error("no JSON in output");
  int depth = 0;
  bool in_string = false;
  for (size_t i = start; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_string) {
      if (ch == '\\')
        ++i;
      else if (ch == '"')
        in_string = false;
      continue;
    }
    if (ch == '"') in_string = true;
    if (ch == '{') ++depth;
    if (ch == '}' && --depth == 0) return text.substr(start, i - start + 1);
  }
  throw std::runtime_error("unterminated JSON in output");
}

backend::BackendDescriptor subprocess_desc(const std::string& name,
                                           backend::Role role,
                                           const std::string& mode,
                                           double timeout) {
  backend::BackendDescriptor d;
  d.name = name;
  d.role = role;
  d.transport = backend::Transport::Subprocess;
  d.target = std::string(STUB_BACKEND_PATH) + " " + mode;
  d.timeout_seconds = timeout;
  return d;
}

backend::BackendDescriptor http_desc(const std::string& name,
                                     backend::Role role,
                                     const std::string& url, double timeout) {
  backend::BackendDescriptor d;
  d.name = name;
  d.role = role;
  d.transport = backend::Transport::Http;
  d.target = url;
  d.timeout_seconds = timeout;
  return d;
}

// Route-A fixture: heavy noise on a dark flat field keeps the highlight
// ratio at zero while the noise estimate is unmistakable.
ImageBuffer noisy_fixture() {
  return synth::add_gaussian_noise(make_flat(96, 64, 60, 60, 60), 50.0, 17);
}

// Route-B fixture: a large bright low-saturation block on a flat field.
ImageBuffer highlight_fixture() {
  ImageBuffer img = make_flat(96, 64, 120, 120, 120);
  for (int y = 16; y < 40; ++y) {
    for (int x = 20; x < 68; ++x) {
      img.set_u8(x, y, 0, 252);
      img.set_u8(x, y, 1, 250);
      img.set_u8(x, y, 2, 248);
    }
  }
  return img;
}

ImageBuffer clean_fixture() { return make_flat(96, 64, 128, 128, 128); }

// ------------------------------------------------- criterion 1: routing

void criterion_routing(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  testsupport::StubServer srv;
  for (const std::string letter : {"A", "B", "C", "D"}) {
    srv.server.Post("/" + letter, [letter](const httplib::Request&,
                                           httplib::Response& res) {
      json j;
      j["text"] = letter;
      res.set_content(j.dump(), "application/json");
    });
  }
  srv.start();

  const ImageBuffer img = make_scene(5, 96, 64);
  const std::map<char, std::string> first_stage = {
      {'A', "base_restore"}, {'B', "reflect_detect"}, {'C', "deblur"}};

  for (const char letter : {'A', 'B', 'C', 'D'}) {
    PipelineConfig cfg = PipelineConfig::defaults();
    cfg.classifier.mode = ClassifierMode::Vlm;
    cfg.classifier.backend = http_desc(
        "stub_vlm", backend::Role::Classifier,
        srv.url("/" + std::string(1, letter)), 5.0);
    cfg.validate();

    if (letter == 'D') backend::Registry::instance().reset_counters();
    const EnhanceResult res =
        enhance(img, cfg, std::string("probe_") + letter);

    c.expect(res.report.ok, std::string("route ") + letter + " not ok: " +
                                res.report.error_detail);
    c.expect(category_name(res.report.route) == std::string(1, letter),
             std::string("forced ") + letter + " routed to " +
                 category_name(res.report.route));
    if (letter == 'D') {
      c.expect(res.report.stages.empty(), "route D ran stages");
      c.expect(res.image == img, "route D altered the image");
      const long calls = backend::Registry::instance().total_invocations();
      c.expect(calls == 0,
               "route D invoked " + std::to_string(calls) + " backends");
    } else {
      c.expect(!res.report.stages.empty() &&
                   res.report.stages[0].name == first_stage.at(letter),
               std::string("route ") + letter + " first stage " +
                   (res.report.stages.empty()
                        ? std::string("<none>")
                        : res.report.stages[0].name));
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 5.0, "runtime " + fmt("%.2f", secs) + "s >= 5s");
  c.note("4/4 forced routes correct, route D invoked 0 backends, " +
         fmt("%.2f", secs) + "s");
}

// ------------------------------------------------- criterion 4: Wiener

void criterion_wiener(Check& c) {
  const ImageBuffer clean = make_scene(42);
  const ImageBuffer blurred = synth::motion_blur(clean, 15.0, 0.0);
  const Kernel2D truth = motion_line_kernel(15.0, 0.0);
  const ImageBuffer deblurred = pipeline::wiener_deblur(blurred, truth, 0.005);
  const double before = metrics::psnr(blurred, clean);
  const double after = metrics::psnr(deblurred, clean);
  c.expect(after >= before + 4.0,
           "true-kernel gain " + fmt("%.2f", after - before) + " dB < 4 dB");

  const ImageBuffer identity =
      pipeline::wiener_deblur(clean, Kernel2D::identity(), 1e-6);
  const double id_psnr = metrics::psnr(identity, clean);
  c.expect(id_psnr >= 50.0,
           "identity-kernel PSNR " + fmt("%.2f", id_psnr) + " dB < 50 dB");
  c.note("true-kernel gain " + fmt("%.2f", after - before) +
         " dB, identity-kernel PSNR " +
         (std::isinf(id_psnr) ? std::string("inf") : fmt("%.2f", id_psnr)) +
         " dB");
}

// ------------------------------------------------ criterion 5: inpainting

void criterion_inpainting(Check& c) {
  // Locality: unmasked pixels bit-identical.
  {
    const ImageBuffer img = make_scene(11, 128, 96);
    Mask mask(img.width(), img.height(), MaskKind::ReflectionStrong);
    for (int y = 30; y < 50; ++y)
      for (int x = 40; x < 70; ++x) mask.set(x, y, 1.0f);
    const ImageBuffer out = pipeline::inpaint_fast_marching(img, mask, 5);
    bool identical = true;
    for (int y = 0; y < img.height() && identical; ++y)
      for (int x = 0; x < img.width() && identical; ++x) {
        if (mask.at(x, y) > 0.0f) continue;
        for (int ch = 0; ch < 3; ++ch)
          if (out.at_u8(x, y, ch) != img.at_u8(x, y, ch)) identical = false;
      }
    c.expect(identical, "unmasked pixels changed");
  }

  // Constant image: exact fill.
  {
    const ImageBuffer img = make_flat(64, 48, 90, 140, 200);
    Mask mask(64, 48, MaskKind::ReflectionStrong);
    for (int y = 15; y < 33; ++y)
      for (int x = 20; x < 44; ++x) mask.set(x, y, 1.0f);
    const ImageBuffer out = pipeline::inpaint_fast_marching(img, mask, 4);
    c.expect(out == img, "constant-image fill not exact");
  }

  // Two-tone: each filled pixel whose known neighborhood holds a single tone
  // must land within 2 LSB of that tone (brute-force nearest-known oracle).
  {
    const int w = 64, h = 40, radius = 4;
    ImageBuffer img(w, h, 3, Depth::U8);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int ch = 0; ch < 3; ++ch)
          img.set_u8(x, y, ch, x < w / 2 ? 60 : 180);
    Mask mask(w, h, MaskKind::ReflectionStrong);
    for (int y = 12; y < 28; ++y)
      for (int x = 20; x < 44; ++x) mask.set(x, y, 1.0f);
    const ImageBuffer out = pipeline::inpaint_fast_marching(img, mask, radius);

    int checked = 0, bad = 0;
    for (int y = 12; y < 28; ++y) {
      for (int x = 20; x < 44; ++x) {
        double nearest = 1e18;
        for (int ky = 0; ky < h; ++ky)
          for (int kx = 0; kx < w; ++kx)
            if (mask.at(kx, ky) == 0.0f)
              nearest = std::min(nearest, std::hypot(kx - x, ky - y));
        std::vector<uint8_t> tones;
        for (int ky = 0; ky < h; ++ky)
          for (int kx = 0; kx < w; ++kx)
            if (mask.at(kx, ky) == 0.0f &&
                std::hypot(kx - x, ky - y) <= nearest + radius + 1)
              tones.push_back(img.at_u8(kx, ky, 0));
        const bool single =
            std::all_of(tones.begin(), tones.end(),
                        [&](uint8_t t) { return t == tones.front(); });
        if (!single) continue;
        ++checked;
        for (int ch = 0; ch < 3; ++ch)
          if (std::abs(int(out.at_u8(x, y, ch)) - int(tones.front())) > 2)
            ++bad;
      }
    }
    c.expect(checked > 0, "two-tone oracle checked no pixels");
    c.expect(bad == 0, std::to_string(bad) + " two-tone samples off by > 2");
    c.note("locality exact, constant fill exact, " + std::to_string(checked) +
           " single-tone pixels within 2 LSB");
  }
}

// --------------------------------------------------- criterion 6: fusion

void criterion_fusion(Check& c) {
  const int w = 96, h = 96;
  const ImageBuffer base = make_flat(w, h, 0, 0, 0);
  const ImageBuffer patch = make_flat(w, h, 255, 255, 255);
  Mask circle(w, h, MaskKind::Generic);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = x - w / 2.0, dy = y - h / 2.0;
      circle.set(x, y, dx * dx + dy * dy <= 28.0 * 28.0 ? 1.0f : 0.0f);
    }

  const Mask zeros(w, h, MaskKind::Generic, 0.0f);
  const Mask ones(w, h, MaskKind::Generic, 1.0f);
  c.expect(fusion::composite(base, patch, zeros) == base,
           "all-zeros identity not exact");
  c.expect(fusion::composite(base, patch, ones) == patch,
           "all-ones identity not exact");

  // Convexity on random content under a random soft mask.
  {
    rng::Rng rng(99);
    ImageBuffer a(48, 32, 3, Depth::U8), b(48, 32, 3, Depth::U8);
    Mask m(48, 32, MaskKind::Generic);
    for (auto& v : a.u8()) v = uint8_t(rng.next_below(256));
    for (auto& v : b.u8()) v = uint8_t(rng.next_below(256));
    for (auto& v : m.values()) v = float(rng.next_double());
    const ImageBuffer out = fusion::composite(a, b, m);
    int violations = 0;
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 48; ++x)
        for (int ch = 0; ch < 3; ++ch) {
          const uint8_t lo = std::min(a.at_u8(x, y, ch), b.at_u8(x, y, ch));
          const uint8_t hi = std::max(a.at_u8(x, y, ch), b.at_u8(x, y, ch));
          const uint8_t v = out.at_u8(x, y, ch);
          if (v < lo || v > hi) ++violations;
        }
    c.expect(violations == 0,
             std::to_string(violations) + " convexity violations");
  }

  const Mask soft = fusion::feather_mask(circle, fusion::FeatherSpec{5.0});
  const double e_hard = fusion::seam_energy(base, patch, circle);
  const double e_soft = fusion::seam_energy(base, patch, soft);
  c.expect(e_soft < e_hard, "feathered seam energy " + fmt("%.2f", e_soft) +
                                " not below hard " + fmt("%.2f", e_hard));
  c.note("identities exact, convexity holds, seam energy " +
         fmt("%.2f", e_soft) + " feathered vs " + fmt("%.2f", e_hard) +
         " hard");
}

// -------------------------------------------------- criterion 7: metrics

void criterion_metrics(Check& c) {
  const ImageBuffer a = make_flat(64, 64, 100, 100, 100);
  const ImageBuffer b = make_flat(64, 64, 110, 110, 110);
  const double measured = metrics::psnr(a, b);
  const double closed_form = 20.0 * std::log10(255.0 / 10.0);
  c.expect(std::abs(measured - closed_form) <= 0.01,
           "offset-10 PSNR " + fmt("%.4f", measured) + " vs closed form " +
               fmt("%.4f", closed_form));
  c.expect(std::abs(measured - 28.13) <= 0.01,
           "offset-10 PSNR " + fmt("%.4f", measured) + " not 28.13 +- 0.01");

  const ImageBuffer s = make_scene(3);
  const double self = metrics::ssim(s, s);
  c.expect(std::abs(self - 1.0) <= 1e-9,
           "SSIM(identical) " + fmt("%.12f", self));
  c.note("offset-10 PSNR " + fmt("%.4f", measured) + " dB, SSIM(identical) " +
         fmt("%.12f", self));
}

// ------------------------------------------------- criterion 9: protocol

struct BatchProbe {
  std::string tag;
  PipelineConfig cfg;
  std::string expected_error;  // empty = success expected
};

void check_probe(Check& c, const BatchProbe& probe, const fs::path& fail_item,
                 const fs::path& clean_item) {
  std::vector<BatchItem> items;
  items.push_back({"subject", fail_item.string(), std::nullopt});
  items.push_back({"bystander", clean_item.string(), std::nullopt});
  const auto reports = enhance_batch(items, probe.cfg, 2);
  c.expect(reports.size() == 2, probe.tag + ": batch aborted");
  if (reports.size() != 2) return;
  if (probe.expected_error.empty()) {
    c.expect(reports[0].ok,
             probe.tag + ": expected success, got " + reports[0].error);
  } else {
    c.expect(!reports[0].ok && reports[0].error == probe.expected_error,
             probe.tag + ": expected " + probe.expected_error + ", got " +
                 (reports[0].ok ? std::string("ok") : reports[0].error));
  }
  c.expect(reports[1].ok, probe.tag + ": bystander failed: " +
                              reports[1].error);
}

void criterion_protocol(Check& c) {
  const fs::path dir = fresh_dir("accept_protocol");
  const fs::path noisy = dir / "noisy.png";
  const fs::path bright = dir / "bright.png";
  const fs::path clean = dir / "clean.png";
  io::save_png(noisy_fixture(), noisy);
  io::save_png(highlight_fixture(), bright);
  io::save_png(clean_fixture(), clean);

  testsupport::StubServer srv;
  srv.server.Post("/invert", [](const httplib::Request& req,
                                httplib::Response& res) {
    const std::vector<uint8_t> body(req.body.begin(), req.body.end());
    ImageBuffer img = io::decode_png(body);
    for (auto& v : img.u8()) v = uint8_t(255 - v);
    const std::vector<uint8_t> reply = io::encode_png(img);
    res.set_content(std::string(reply.begin(), reply.end()), "image/png");
  });
  srv.server.Post("/slow", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    res.set_content("late", "text/plain");
  });
  srv.server.Post("/garbage",
                  [](const httplib::Request&, httplib::Response& res) {
                    res.set_content("not an image at all", "text/plain");
                  });
  srv.server.Post("/oob", [](const httplib::Request&, httplib::Response& res) {
    json j;
    j["protocol"] = "1";
    j["boxes"] = json::array(
        {{{"x", 10000}, {"y", 0}, {"w", 5}, {"h", 5}, {"conf", 0.5}}});
    res.set_content(j.dump(), "application/json");
  });
  srv.start();

  std::vector<BatchProbe> probes;
  auto add = [&](const std::string& tag, backend::BackendDescriptor desc,
                 const std::string& expected) {
    BatchProbe p;
    p.tag = tag;
    p.cfg = PipelineConfig::defaults();
    if (desc.role == backend::Role::BaseSr)
      p.cfg.sr.base = desc;
    else
      p.cfg.reflection.detector = desc;
    p.cfg.validate();
    p.expected_error = expected;
    probes.push_back(std::move(p));
  };

  add("subprocess success",
      subprocess_desc("sp_invert", backend::Role::BaseSr, "invert", 10.0), "");
  add("subprocess timeout",
      subprocess_desc("sp_sleep", backend::Role::BaseSr, "sleep", 0.5),
      "BackendTimeout");
  add("subprocess malformed",
      subprocess_desc("sp_garbage", backend::Role::BaseSr, "garbage", 10.0),
      "BackendProtocolError");
  add("subprocess oob detection",
      subprocess_desc("sp_oob", backend::Role::ReflectionDetector, "oob_box",
                      10.0),
      "BackendProtocolError");
  add("http success",
      http_desc("ht_invert", backend::Role::BaseSr, srv.url("/invert"), 10.0),
      "");
  add("http timeout",
      http_desc("ht_slow", backend::Role::BaseSr, srv.url("/slow"), 0.3),
      "BackendTimeout");
  add("http malformed",
      http_desc("ht_garbage", backend::Role::BaseSr, srv.url("/garbage"),
                10.0),
      "BackendProtocolError");
  add("http oob detection",
      http_desc("ht_oob", backend::Role::ReflectionDetector, srv.url("/oob"),
                10.0),
      "BackendProtocolError");

  for (const auto& probe : probes) {
    const bool detector_probe = probe.tag.find("oob") != std::string::npos;
    check_probe(c, probe, detector_probe ? bright : noisy, clean);
  }
  c.note("8/8 stub probes yielded the expected outcome with no batch abort");
}

// --------------------------------------------- corpus phase (2, 3, 8)

struct CorpusArtifacts {
  fs::path clean_dir;
  fs::path corpus1;
  fs::path corpus2;
  synth::CorpusManifest manifest1;
  synth::CorpusManifest manifest2;
  fs::path out_p1;
  fs::path out_p4a;
  fs::path out_p4b;
};

constexpr uint64_t kCorpusSeed = 20260822;
constexpr int kSceneCount = 24;

std::optional<CorpusArtifacts> g_corpus;
std::string g_corpus_error;

void build_corpus_phase() {
  try {
    CorpusArtifacts a;
    a.clean_dir = fresh_dir("accept_clean");
    testsupport::write_scene_dir(a.clean_dir, kSceneCount, 5000);
    a.corpus1 = fresh_dir("accept_corpus1");
    a.corpus2 = fresh_dir("accept_corpus2");
    const synth::SpecGrid grid = synth::SpecGrid::mid_or_higher();
    a.manifest1 = synth::make_corpus(a.clean_dir.string(), grid,
                                     a.corpus1.string(), kCorpusSeed);
    a.manifest2 = synth::make_corpus(a.clean_dir.string(), grid,
                                     a.corpus2.string(), kCorpusSeed);

    std::vector<BatchItem> items;
    for (const auto& e : a.manifest1.entries) {
      BatchItem item;
      item.id = fs::path(e.degraded).stem().string();
      item.input_path = (a.corpus1 / e.degraded).string();
      items.push_back(std::move(item));
    }
    const PipelineConfig cfg = PipelineConfig::defaults();
    a.out_p1 = fresh_dir("accept_out_p1");
    enhance_batch(items, cfg, 1, a.out_p1.string());
    a.out_p4a = fresh_dir("accept_out_p4a");
    enhance_batch(items, cfg, 4, a.out_p4a.string());
    a.out_p4b = fresh_dir("accept_out_p4b");
    enhance_batch(items, cfg, 4, a.out_p4b.string());
    g_corpus = std::move(a);
  } catch (const std::exception& ex) {
    g_corpus_error = ex.what();
  }
}

void criterion_classifier(Check& c) {
  if (!g_corpus) throw std::runtime_error("corpus phase: " + g_corpus_error);
  const fs::path manifest = g_corpus->corpus1 / "manifest.json";
  const fs::path capture = g_corpus->corpus1 / "eval_stdout.txt";
  const std::string cmd = std::string(DEGRADE_ROUTER_BIN) +
                          " eval --manifest " + manifest.string() + " > " +
                          capture.string() + " 2>&1";
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = std::system(cmd.c_str());
  const double secs = seconds_since(t0);
  c.expect(rc == 0, "eval command exited " + std::to_string(rc));
  const std::string output = read_bytes(capture);
  c.expect(output.find("confusion matrix") != std::string::npos,
           "no confusion matrix in eval output");

  const json j = json::parse(extract_first_json(output));
  const double acc = j.at("overall_accuracy").get<double>();
  c.expect(acc >= 0.85, "overall accuracy " + fmt("%.3f", acc) + " < 0.85");
  std::string recalls;
  for (int t = 0; t < 4; ++t) {
    const auto& r = j.at("per_category_recall").at(t);
    const double recall = r.is_null() ? 0.0 : r.get<double>();
    if (!recalls.empty()) recalls += "/";
    recalls += fmt("%.3f", recall);
    c.expect(!r.is_null() && recall >= 0.75,
             std::string("recall ") + category_name(Category(t)) + " " +
                 fmt("%.3f", recall) + " < 0.75");
  }
  c.expect(j.at("counts").at("total").get<long>() ==
               long(g_corpus->manifest1.entries.size()),
           "eval did not cover every manifest entry");
  c.expect(secs < 300.0, "eval runtime " + fmt("%.1f", secs) + "s >= 300s");
  c.note("accuracy " + fmt("%.3f", acc) + ", recalls " + recalls + ", " +
         std::to_string(g_corpus->manifest1.entries.size()) + " entries in " +
         fmt("%.1f", secs) + "s");
}

void criterion_restoration(Check& c) {
  if (!g_corpus) throw std::runtime_error("corpus phase: " + g_corpus_error);
  const std::string output =
      read_bytes(g_corpus->corpus1 / "eval_stdout.txt");
  const json j = json::parse(extract_first_json(output));

  const auto& samples = j.at("counts").at("psnr_samples");
  const long n_a = samples.at(0).get<long>();
  const long n_c = samples.at(2).get<long>();
  c.expect(n_a >= 20, "only " + std::to_string(n_a) + " A fixtures");
  c.expect(n_c >= 20, "only " + std::to_string(n_c) + " C fixtures");
  const auto& mdp = j.at("mean_delta_psnr");
  const double delta_a = mdp.at("A").is_null() ? -1.0 : mdp.at("A").get<double>();
  const double delta_c = mdp.at("C").is_null() ? -1.0 : mdp.at("C").get<double>();
  c.expect(delta_a > 0.0, "mean dPSNR(A) " + fmt("%.2f", delta_a) + " <= 0");
  c.expect(delta_c > 0.0, "mean dPSNR(C) " + fmt("%.2f", delta_c) + " <= 0");

  // Strong-reflection fixtures, end to end, from the parallelism-1 outputs.
  double sum = 0.0;
  int count = 0;
  for (const auto& e : g_corpus->manifest1.entries) {
    if (e.spec.kind != "reflection" || e.spec.opacity < 0.999) continue;
    const ImageBuffer clean = io::load_image(e.clean);
    const ImageBuffer degraded =
        io::load_image(g_corpus->corpus1 / e.degraded);
    const fs::path restored_path =
        g_corpus->out_p1 / (fs::path(e.degraded).stem().string() + ".png");
    if (!fs::exists(restored_path)) {
      c.expect(false, "missing restored output " + restored_path.string());
      continue;
    }
    const ImageBuffer restored = io::load_image(restored_path);
    sum += metrics::psnr(restored, clean) - metrics::psnr(degraded, clean);
    ++count;
  }
  const double delta_b = count > 0 ? sum / count : -1.0;
  c.expect(count >= 20,
           "only " + std::to_string(count) + " strong-reflection fixtures");
  c.expect(delta_b >= 3.0,
           "strong-reflection mean dPSNR " + fmt("%.2f", delta_b) + " < 3 dB");
  c.note("mean dPSNR A " + fmt("%+.2f", delta_a) + " dB (" +
         std::to_string(n_a) + "), C " + fmt("%+.2f", delta_c) + " dB (" +
         std::to_string(n_c) + "), strong B " + fmt("%+.2f", delta_b) +
         " dB (" + std::to_string(count) + ")");
}

void criterion_determinism(Check& c) {
  if (!g_corpus) throw std::runtime_error("corpus phase: " + g_corpus_error);
  const std::string m1 = read_bytes(g_corpus->corpus1 / "manifest.json");
  const std::string m2 = read_bytes(g_corpus->corpus2 / "manifest.json");
  c.expect(rng::fnv1a64(m1) == rng::fnv1a64(m2),
           "manifest hashes differ across runs");

  int mismatched_corpus = 0;
  for (const auto& e : g_corpus->manifest1.entries) {
    if (read_bytes(g_corpus->corpus1 / e.degraded) !=
        read_bytes(g_corpus->corpus2 / e.degraded))
      ++mismatched_corpus;
  }
  c.expect(mismatched_corpus == 0, std::to_string(mismatched_corpus) +
                                       " degraded files differ across runs");

  auto listing = [](const fs::path& dir) {
    std::vector<std::string> names;
    for (const auto& ent : fs::directory_iterator(dir))
      names.push_back(ent.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
  };
  const auto n1 = listing(g_corpus->out_p1);
  c.expect(n1.size() == g_corpus->manifest1.entries.size(),
           "parallelism-1 run wrote " + std::to_string(n1.size()) + " of " +
               std::to_string(g_corpus->manifest1.entries.size()) + " outputs");
  c.expect(n1 == listing(g_corpus->out_p4a) &&
               n1 == listing(g_corpus->out_p4b),
           "output file sets differ");
  int mismatched_out = 0;
  for (const auto& name : n1) {
    const std::string ref = read_bytes(g_corpus->out_p1 / name);
    if (ref != read_bytes(g_corpus->out_p4a / name) ||
        ref != read_bytes(g_corpus->out_p4b / name))
      ++mismatched_out;
  }
  c.expect(mismatched_out == 0,
           std::to_string(mismatched_out) + " output images differ");
  c.note("manifests hash-identical, " + std::to_string(n1.size()) +
         " outputs byte-identical across two runs and parallelism {1,4}");
}

}  // namespace

int main() {
  run_criterion(1, "routing fidelity", criterion_routing);
  run_criterion(4, "Wiener oracle", criterion_wiener);
  run_criterion(5, "inpainting locality and correctness",
                criterion_inpainting);
  run_criterion(6, "fusion algebra", criterion_fusion);
  run_criterion(7, "metric sanity", criterion_metrics);
  run_criterion(9, "protocol conformance", criterion_protocol);
  build_corpus_phase();
  run_criterion(2, "classifier accuracy", criterion_classifier);
  run_criterion(3, "restoration improves fidelity", criterion_restoration);
  run_criterion(8, "determinism", criterion_determinism);

  std::sort(g_results.begin(), g_results.end(),
            [](const Result& a, const Result& b) { return a.id < b.id; });
  bool all_pass = true;
  for (const auto& r : g_results) {
    std::printf("criterion %d (%s): %s%s%s\n", r.id, r.label.c_str(),
                r.pass ? "PASS" : "FAIL", r.detail.empty() ? "" : " - ",
                r.detail.c_str());
    all_pass = all_pass && r.pass;
  }
  std::printf("%s\n", all_pass ? "ACCEPTANCE: all criteria passed"
                               : "ACCEPTANCE: FAILURES PRESENT");
  return all_pass ? 0 : 1;
}
