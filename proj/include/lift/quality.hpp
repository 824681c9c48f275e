#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lift/dataset.hpp"
#include "lift/gateway.hpp"

namespace lift {

/// A manually scored anchor shown to the judge before the item under review.
struct FewShotExample {
  std::string instruction;
  std::string input;
  std::string output;
  int score = 0;
  std::string rationale;

  friend bool operator==(const FewShotExample&, const FewShotExample&) = default;
};

struct QualityConfig {
  std::vector<FewShotExample> few_shot_examples;  // poor, average, high
  double weight_gpt = 0.8;
  double weight_len = 0.2;
  double length_ref = 2048.0;        // characters at which the length score saturates
  double length_score_max = 100.0;
  std::optional<std::size_t> keep_count;
  std::optional<double> keep_fraction;  // used when keep_count is unset
};

void validate(const QualityConfig& cfg);

/// Built-in anchors for a task profile; the same content ships as editable
/// JSON fixtures under data/.
std::vector<FewShotExample> default_few_shot(TaskProfile profile);

/// Reads a fixture file: a JSON array of exactly three objects with keys
/// instruction, input, output, score, rationale.
std::vector<FewShotExample> load_few_shot(const std::filesystem::path& path);

struct GptScore {
  int total = 0;                 // [0, 100]
  std::string raw_response;
  bool parse_ok = false;
  bool out_of_range = false;
  std::string explanation;       // lines after the score line
  std::optional<std::string> provider_error;

  friend bool operator==(const GptScore&, const GptScore&) = default;
};

struct QualityAssessment {
  std::string record_id;
  GptScore gpt;
  double length_score = 0.0;
  double final_score = 0.0;
};

PromptPair build_score_prompt(const InstructionRecord& r, const QualityConfig& cfg);

/// Reads the first non-blank line as an integer total. Never throws.
GptScore parse_score_response(std::string_view text);

/// Number of Unicode code points in UTF-8 text.
std::size_t utf8_length(std::string_view s);

/// S_max · min(1, ln(1+L) / ln(1+L_ref)) with L the character count of
/// instruction, input and output.
double length_score(const InstructionRecord& r, const QualityConfig& cfg);
double length_score_for(std::size_t characters, const QualityConfig& cfg);

double fuse_scores(int gpt_total, double length, const QualityConfig& cfg);

/// One assessment per record, in dataset order. Provider failures become
/// zero-score assessments flagged with provider_error.
std::vector<QualityAssessment> score_dataset(const Dataset& d, Gateway& gateway,
                                             const QualityConfig& cfg);

/// Number of records quality curation keeps from `n`.
std::size_t quality_keep_size(std::size_t n, const QualityConfig& cfg);

/// Keeps the highest final scores (ties to the smaller id), preserving the
/// dataset order among survivors.
Dataset quality_curate(const Dataset& d, std::span<const QualityAssessment> assessments,
                       const QualityConfig& cfg);

/// Scored-dataset file: the dataset schema plus gpt_score, parse_ok,
/// length_score and final_score on every line.
void save_scored(const Dataset& d, std::span<const QualityAssessment> assessments,
                 const std::filesystem::path& path);
std::string dump_scored(const Dataset& d, std::span<const QualityAssessment> assessments);

struct ScoredDataset {
  Dataset dataset;
  std::vector<QualityAssessment> assessments;
};
ScoredDataset load_scored(const std::filesystem::path& path, TaskProfile profile);

}  // namespace lift
