#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lift/dataset.hpp"
#include "lift/expansion.hpp"
#include "lift/gateway.hpp"
#include "lift/quality.hpp"
#include "lift/variety.hpp"

namespace lift {

struct ReportConfig {
  double histogram_bin_width = 5.0;
  std::optional<double> hours_per_kitem;  // cost report is skipped when unset
  double emission_rate = 0.09;
};

struct PipelineConfig {
  std::filesystem::path input_path;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> cache_dir;  // default: <output_dir>/cache
  TaskProfile task_profile = TaskProfile::kNlu;

  bool mock_mode = false;
  std::uint64_t mock_seed = 0;
  std::size_t mock_embedding_dims = 1536;

  ExpansionConfig expansion;
  VarietyConfig variety;
  QualityConfig quality;
  std::optional<std::filesystem::path> few_shot_path;
  bool skip_failed_embeddings = false;

  ProviderConfig chat_provider;
  ProviderConfig embedding_provider;
  ReportConfig reports;
};

/// Parses a config object. Relative paths are resolved against `base_dir`.
/// Unknown keys are rejected. The result is validated.
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});

/// Applies "a.b.c=value" overrides; value is parsed as JSON when possible and
/// taken as a string otherwise.
void apply_overrides(nlohmann::json& j, const std::vector<std::string>& overrides);

void validate(const PipelineConfig& cfg);

enum class Stage { kExpand, kEmbed, kVariety, kScore, kQuality, kReport };

std::string_view to_string(Stage s);
const std::vector<Stage>& all_stages();

enum class ProviderRole { kChat, kEmbedding };

/// Seams for tests and alternative backends.
struct PipelineHooks {
  /// Overrides provider construction (default: mock or HTTP per config).
  std::function<std::shared_ptr<Provider>(ProviderRole)> provider_factory;
  /// Receives progress lines.
  std::function<void(const std::string&)> log;
};

/// Artifact file names inside output_dir.
namespace artifacts {
inline constexpr const char* kExpanded = "expanded.jsonl";
inline constexpr const char* kEmbeddings = "embeddings.jsonl";
inline constexpr const char* kVariety = "variety.jsonl";
inline constexpr const char* kVarietyDiagnostics = "variety_diagnostics.jsonl";
inline constexpr const char* kScored = "scored.jsonl";
inline constexpr const char* kScoreResponses = "score_responses.jsonl";
inline constexpr const char* kFinal = "final.jsonl";
inline constexpr const char* kComposition = "composition.json";
inline constexpr const char* kHistogram = "histogram.json";
inline constexpr const char* kHistogramGpt = "histogram_gpt.json";
inline constexpr const char* kCost = "cost.json";
inline constexpr const char* kRunManifest = "run.manifest.json";
std::string round_file(int round);
std::string manifest_file(Stage s);
}  // namespace artifacts

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg, PipelineHooks hooks = {});

  /// Runs a single stage from its prerequisite artifacts and returns its
  /// manifest.
  nlohmann::ordered_json run_stage(Stage stage);

  /// Runs every stage in order, skipping stages whose manifest matches the
  /// current inputs and config, and writes run.manifest.json.
  nlohmann::ordered_json run_all();

  const PipelineConfig& config() const { return cfg_; }

 private:
  nlohmann::ordered_json expand_stage();
  nlohmann::ordered_json embed_stage();
  nlohmann::ordered_json variety_stage();
  nlohmann::ordered_json score_stage();
  nlohmann::ordered_json quality_stage();
  nlohmann::ordered_json report_stage();

  Gateway& chat_gateway();
  Gateway& embedding_gateway();
  std::shared_ptr<ResponseCache> cache();

  std::filesystem::path out(const std::string& name) const { return cfg_.output_dir / name; }
  std::filesystem::path require(const std::filesystem::path& p, Stage producer) const;
  nlohmann::ordered_json stage_config(Stage s) const;
  std::vector<std::filesystem::path> stage_inputs(Stage s) const;
  bool up_to_date(Stage s) const;
  nlohmann::ordered_json finish_manifest(Stage s, nlohmann::ordered_json body,
                                         const std::vector<std::filesystem::path>& outputs);
  void log(const std::string& line) const;

  PipelineConfig cfg_;
  PipelineHooks hooks_;
  std::shared_ptr<ResponseCache> cache_;
  std::unique_ptr<Gateway> chat_;
  std::unique_ptr<Gateway> embed_;
};

/// SHA-256 hex of a file's bytes.
std::string file_digest(const std::filesystem::path& p);

void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);

}  // namespace lift
