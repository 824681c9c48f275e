#include "lift/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lift/error.hpp"

namespace lift {

std::size_t Histogram::total() const {
  std::size_t t = 0;
  for (const auto& b : bins) t += b.count;
  return t;
}

Histogram histogram_of(std::span<const double> values, double bin_width) {
  if (!(bin_width > 0.0)) throw Error("analysis.bin_width", "histogram bin width must be positive");
  Histogram h;
  h.bin_width = bin_width;
  const auto n_bins = static_cast<std::size_t>(std::max(1.0, std::ceil(100.0 / bin_width - 1e-9)));
  h.bins.resize(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) h.bins[i].lower_edge = static_cast<double>(i) * bin_width;
  for (double v : values) {
    double idx = std::isfinite(v) ? std::floor(std::clamp(v, 0.0, 100.0) / bin_width) : 0.0;
    const auto i = std::min(static_cast<std::size_t>(idx), n_bins - 1);
    ++h.bins[i].count;
  }
  return h;
}

Histogram score_histogram(std::span<const QualityAssessment> assessments, double bin_width,
                          ScoreField field) {
  std::vector<double> values;
  values.reserve(assessments.size());
  for (const auto& a : assessments)
    values.push_back(field == ScoreField::kGpt ? static_cast<double>(a.gpt.total) : a.final_score);
  return histogram_of(values, bin_width);
}

CompositionReport composition_report(const Dataset& final_dataset) {
  std::map<int, std::size_t> counts;
  for (const auto& r : final_dataset.records) ++counts[r.source_round];
  CompositionReport rep;
  rep.total = final_dataset.size();
  for (const auto& [round, count] : counts) {
    rep.entries.push_back(
        {round, count, static_cast<double>(count) / static_cast<double>(rep.total)});
  }
  return rep;
}

CostReport estimate_cost(double n_items, double hours_per_kitem, double emission_rate) {
  if (!(hours_per_kitem > 0.0) || !(emission_rate > 0.0))
    throw Error("analysis.cost_rates", "cost rates must be positive");
  if (!(n_items >= 0.0)) throw Error("analysis.cost_rates", "item count must be nonnegative");
  CostReport r;
  r.dataset_size = n_items;
  r.hours_per_kitem = hours_per_kitem;
  r.emission_rate = emission_rate;
  r.gpu_hours = n_items / 1000.0 * hours_per_kitem;
  r.co2_kg = emission_rate * r.gpu_hours;
  return r;
}

double co2_from_gpu_hours(double gpu_hours, double emission_rate) {
  if (!(emission_rate > 0.0)) throw Error("analysis.cost_rates", "emission rate must be positive");
  return gpu_hours * emission_rate;
}

double pass_at_k(std::int64_t n, std::int64_t c, std::int64_t k) {
  if (n < 0 || c < 0 || c > n || k < 1 || k > n)
    throw Error("analysis.pass_at_k", "pass@k needs 0 <= c <= n and 1 <= k <= n (n=" + std::to_string(n) +
                                          ", c=" + std::to_string(c) + ", k=" + std::to_string(k) + ")");
  if (n - c < k) return 1.0;
  // C(n-c, k) / C(n, k) = prod_{i=n-c+1}^{n} (1 - k / i)
  double miss = 1.0;
  for (std::int64_t i = n - c + 1; i <= n; ++i)
    miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
  return 1.0 - miss;
}

double mean_pass_at_k(std::span<const PassAtKSample> problems, std::int64_t k) {
  if (problems.empty()) throw Error("analysis.pass_at_k", "pass@k needs at least one problem");
  double s = 0.0;
  for (const auto& p : problems) s += pass_at_k(p.n, p.c, k);
  return s / static_cast<double>(problems.size());
}

nlohmann::ordered_json to_json(const Histogram& h) {
  nlohmann::ordered_json j;
  j["bin_width"] = h.bin_width;
  j["bins"] = nlohmann::ordered_json::array();
  for (const auto& b : h.bins) j["bins"].push_back({{"lower_edge", b.lower_edge}, {"count", b.count}});
  return j;
}

nlohmann::ordered_json to_json(const CompositionReport& r) {
  nlohmann::ordered_json j;
  j["total"] = r.total;
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : r.entries)
    j["entries"].push_back({{"source_round", e.source_round}, {"count", e.count}, {"proportion", e.proportion}});
  return j;
}

nlohmann::ordered_json to_json(const CostReport& r) {
  nlohmann::ordered_json j;
  j["dataset_size"] = r.dataset_size;
  j["gpu_hours"] = r.gpu_hours;
  j["co2_kg"] = r.co2_kg;
  j["hours_per_kitem"] = r.hours_per_kitem;
  j["emission_rate"] = r.emission_rate;
  return j;
}

std::string histogram_text(const Histogram& h) {
  std::string out;
  char buf[64];
  for (const auto& b : h.bins) {
    std::snprintf(buf, sizeof buf, "%g %zu\n", b.lower_edge, b.count);
    out += buf;
  }
  return out;
}

std::string composition_table(const CompositionReport& r) {
  std::string out = "source_round  count  proportion\n";
  char buf[96];
  for (const auto& e : r.entries) {
    std::snprintf(buf, sizeof buf, "%12d  %5zu  %10.4f\n", e.source_round, e.count, e.proportion);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%12s  %5zu  %10.4f\n", "total", r.total, r.total ? 1.0 : 0.0);
  out += buf;
  return out;
}

std::string cost_table(const CostReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "dataset_size     %.0f items\nhours_per_kitem  %.4f h\ngpu_hours        %.2f h\n"
                "emission_rate    %.4f kg/GPU-h\nco2              %.2f kg CO2-eq\n",
                r.dataset_size, r.hours_per_kitem, r.gpu_hours, r.emission_rate, r.co2_kg);
  return buf;
}

}  // namespace lift
