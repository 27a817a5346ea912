#include "dr/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dr {

namespace {

using nlohmann::json;

// +inf is not representable in JSON; the report contract spells it "inf".
json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

const char* source_name(ClassifierSource s) {
  return s == ClassifierSource::Heuristic ? "heuristic" : "vlm";
}

json outcome_to_json(const ClassificationOutcome& o) {
  json j;
  j["category"] = category_name(o.category);
  j["source"] = source_name(o.source);
  j["confidence"] = o.confidence;
  if (o.raw_response) j["raw_response"] = *o.raw_response;
  if (o.features) {
    j["features"] = {
        {"laplacian_variance", o.features->laplacian_variance},
        {"blockiness", o.features->blockiness},
        {"gradient_anisotropy", o.features->gradient_anisotropy},
        {"highlight_ratio", o.features->highlight_ratio},
        {"noise_estimate", o.features->noise_estimate},
    };
  }
  return j;
}

}  // namespace

std::string EnhancementReport::to_json_line() const {
  json j;
  j["input"] = input_id;
  j["ok"] = ok;
  if (!ok) {
    j["error"] = error;
    j["error_detail"] = error_detail;
  }
  j["route"] = category_name(route);
  if (outcome) j["outcome"] = outcome_to_json(*outcome);
  j["stages"] = json::array();
  for (const auto& s : stages) {
    j["stages"].push_back({{"name", s.name},
                           {"backend", s.backend},
                           {"duration_ms", s.duration_ms},
                           {"status", s.status}});
  }
  j["masks"] = json::object();
  for (const auto& [kind, fraction] : mask_fractions) {
    j["masks"][kind] = fraction;
  }
  j["needs_review"] = needs_review;
  if (kernel) {
    j["kernel"] = {{"length", kernel->length},
                   {"angle", kernel->angle},
                   {"score", kernel->score}};
  }
  if (metrics) {
    j["metrics"] = {{"psnr_in", number_or_inf(metrics->psnr_in)},
                    {"psnr_out", number_or_inf(metrics->psnr_out)},
                    {"ssim_in", metrics->ssim_in},
                    {"ssim_out", metrics->ssim_out}};
  }
  return j.dump();
}

long EvalSummary::row_total(int truth) const {
  long n = 0;
  for (int p = 0; p < 4; ++p) n += confusion[truth][p];
  return n;
}

double EvalSummary::recall(int truth) const {
  const long n = row_total(truth);
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(confusion[truth][truth]) / n;
}

double EvalSummary::overall_accuracy() const {
  long trace = 0;
  long total = 0;
  for (int t = 0; t < 4; ++t) {
    trace += confusion[t][t];
    total += row_total(t);
  }
  if (total == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(trace) / total;
}

std::string EvalSummary::to_json() const {
  json j;
  j["categories"] = {"A", "B", "C", "D"};
  j["confusion"] = json::array();
  for (int t = 0; t < 4; ++t) {
    j["confusion"].push_back(confusion[t]);
  }
  auto nullable = [](double v) {
    return std::isnan(v) ? json(nullptr) : json(v);
  };
  j["per_category_recall"] = json::array();
  for (int t = 0; t < 4; ++t) {
    j["per_category_recall"].push_back(nullable(recall(t)));
  }
  j["overall_accuracy"] = nullable(overall_accuracy());
  j["mean_delta_psnr"] = json::object();
  j["mean_delta_ssim"] = json::object();
  for (int t = 0; t < 4; ++t) {
    const char* name = category_name(static_cast<Category>(t));
    j["mean_delta_psnr"][name] =
        psnr_samples[t] > 0 ? json(mean_delta_psnr[t]) : json(nullptr);
    j["mean_delta_ssim"][name] =
        ssim_samples[t] > 0 ? json(mean_delta_ssim[t]) : json(nullptr);
  }
  j["counts"] = {
      {"total", total_entries},   {"evaluated", evaluated},
      {"skipped", skipped_files}, {"failed", failed},
      {"psnr_samples", psnr_samples}, {"ssim_samples", ssim_samples}};
  return j.dump(2) + "\n";
}

std::string EvalSummary::to_text_table() const {
  std::ostringstream out;
  char line[160];
  out << "confusion matrix (rows = truth, columns = routed)\n";
  std::snprintf(line, sizeof(line), "%9s %7s %7s %7s %7s %8s\n", "", "A", "B",
                "C", "D", "recall");
  out << line;
  for (int t = 0; t < 4; ++t) {
    const double r = recall(t);
    char rbuf[16];
    if (std::isnan(r)) {
      std::snprintf(rbuf, sizeof(rbuf), "%8s", "-");
    } else {
      std::snprintf(rbuf, sizeof(rbuf), "%8.3f", r);
    }
    std::snprintf(line, sizeof(line), "%8s: %7ld %7ld %7ld %7ld %s\n",
                  category_name(static_cast<Category>(t)), confusion[t][0],
                  confusion[t][1], confusion[t][2], confusion[t][3], rbuf);
    out << line;
  }
  const double acc = overall_accuracy();
  long trace = 0;
  long total = 0;
  for (int t = 0; t < 4; ++t) {
    trace += confusion[t][t];
    total += row_total(t);
  }
  if (std::isnan(acc)) {
    out << "overall accuracy: - (0/0)\n";
  } else {
    std::snprintf(line, sizeof(line), "overall accuracy: %.3f (%ld/%ld)\n",
                  acc, trace, total);
    out << line;
  }
  if (skipped_files > 0) {
    std::snprintf(line, sizeof(line), "skipped entries: %ld\n", skipped_files);
    out << line;
  }
  if (failed > 0) {
    std::snprintf(line, sizeof(line), "failed entries: %ld\n", failed);
    out << line;
  }
  return out.str();
}

}  // namespace dr
