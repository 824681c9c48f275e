#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lift/dataset.hpp"
#include "lift/quality.hpp"

namespace lift {

struct HistogramBin {
  double lower_edge = 0.0;
  std::size_t count = 0;
};

/// Contiguous bins covering [0, 100]; the last bin is closed on the right.
struct Histogram {
  double bin_width = 10.0;
  std::vector<HistogramBin> bins;

  std::size_t total() const;
};

/// Which score a histogram counts.
enum class ScoreField { kFinal, kGpt };

Histogram score_histogram(std::span<const QualityAssessment> assessments, double bin_width,
                          ScoreField field = ScoreField::kFinal);
Histogram histogram_of(std::span<const double> values, double bin_width);

struct CompositionEntry {
  int source_round = 0;
  std::size_t count = 0;
  double proportion = 0.0;
};

struct CompositionReport {
  std::size_t total = 0;
  std::vector<CompositionEntry> entries;  // ascending source_round
};

CompositionReport composition_report(const Dataset& final_dataset);

struct CostReport {
  double dataset_size = 0.0;   // items
  double gpu_hours = 0.0;
  double co2_kg = 0.0;
  double hours_per_kitem = 0.0;
  double emission_rate = 0.0;  // kg CO2-eq per GPU-hour
};

/// Default emission rate in kg CO2-eq per GPU-hour.
inline constexpr double kDefaultEmissionRate = 0.09;

CostReport estimate_cost(double n_items, double hours_per_kitem, double emission_rate = kDefaultEmissionRate);

/// CO2 estimate for a measured number of GPU-hours.
double co2_from_gpu_hours(double gpu_hours, double emission_rate = kDefaultEmissionRate);

/// Unbiased pass@k for one problem: 1 − C(n−c, k) / C(n, k).
double pass_at_k(std::int64_t n, std::int64_t c, std::int64_t k);

struct PassAtKSample {
  std::int64_t n = 0;
  std::int64_t c = 0;
};

/// Mean of per-problem pass@k.
double mean_pass_at_k(std::span<const PassAtKSample> problems, std::int64_t k);

nlohmann::ordered_json to_json(const Histogram& h);
nlohmann::ordered_json to_json(const CompositionReport& r);
nlohmann::ordered_json to_json(const CostReport& r);

/// "bin_lower count" lines.
std::string histogram_text(const Histogram& h);
std::string composition_table(const CompositionReport& r);
std::string cost_table(const CostReport& r);

}  // namespace lift
