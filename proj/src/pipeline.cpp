#include "lift/pipeline.hpp"

#include <set>
#include <unordered_set>

#include "lift/analysis.hpp"
#include "lift/error.hpp"
#include "lift/http_provider.hpp"
#include "lift/mock_provider.hpp"

namespace lift {

namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Reads keys from a JSON object and rejects any key that was never asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw Error("config.invalid", name_ + " must be an object");
  }

  template <class T>
  T get(const char* key, T fallback) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return fallback;
    try {
      return it->get<T>();
    } catch (const json::exception&) {
      throw Error("config.invalid", name_ + "." + key + " has the wrong type");
    }
  }

  template <class T>
  std::optional<T> opt(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return std::nullopt;
    try {
      return it->get<T>();
    } catch (const json::exception&) {
      throw Error("config.invalid", name_ + "." + key + " has the wrong type");
    }
  }

  Section child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    static const json kEmpty = json::object();
    return Section(it == j_.end() || it->is_null() ? kEmpty : *it, name_ + "." + key);
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.contains(key)) throw Error("config.unknown_key", "unknown config key " + name_ + "." + key);
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return (path.is_absolute() || base.empty() ? path : base / path).lexically_normal();
}

ProviderConfig provider_from(Section s, ProviderConfig defaults) {
  ProviderConfig c = defaults;
  c.endpoint = s.get<std::string>("endpoint", c.endpoint);
  c.model_name = s.get<std::string>("model_name", c.model_name);
  c.credential_env = s.get<std::string>("credential_env", c.credential_env);
  c.max_retries = s.get<int>("max_retries", c.max_retries);
  c.backoff_base = std::chrono::milliseconds(s.get<long long>("backoff_base_ms", c.backoff_base.count()));
  c.backoff_cap = std::chrono::milliseconds(s.get<long long>("backoff_cap_ms", c.backoff_cap.count()));
  c.max_in_flight = s.get<int>("max_in_flight", c.max_in_flight);
  c.request_timeout =
      std::chrono::milliseconds(s.get<long long>("request_timeout_ms", c.request_timeout.count()));
  c.embed_batch_size = s.get<int>("embed_batch_size", c.embed_batch_size);
  c.temperature = s.opt<double>("temperature");
  s.finish();
  return c;
}

ojson provider_to_json(const ProviderConfig& c) {
  ojson j;
  j["endpoint"] = c.endpoint;
  j["model_name"] = c.model_name;
  j["credential_env"] = c.credential_env;
  j["max_retries"] = c.max_retries;
  j["backoff_base_ms"] = c.backoff_base.count();
  j["backoff_cap_ms"] = c.backoff_cap.count();
  j["max_in_flight"] = c.max_in_flight;
  j["request_timeout_ms"] = c.request_timeout.count();
  j["embed_batch_size"] = c.embed_batch_size;
  j["temperature"] = c.temperature ? ojson(*c.temperature) : ojson(nullptr);
  return j;
}

std::string json_digest(const ojson& j) { return sha256(j.dump()).hex(); }

std::string provider_identity(const PipelineConfig& cfg, const ProviderConfig& p) {
  if (cfg.mock_mode)
    return "mock:" + std::to_string(cfg.mock_seed) + ":" + std::to_string(cfg.mock_embedding_dims);
  return p.endpoint + "#" + p.model_name;
}

ojson few_shot_json(const std::vector<FewShotExample>& examples) {
  ojson arr = ojson::array();
  for (const auto& e : examples)
    arr.push_back({{"instruction", e.instruction},
                   {"input", e.input},
                   {"output", e.output},
                   {"score", e.score},
                   {"rationale", e.rationale}});
  return arr;
}

Dataset load_valid(const fs::path& p, TaskProfile profile) {
  Dataset d = load_dataset(p, profile);
  validate(d);
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void apply_overrides(json& j, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error("config.override", "override must look like key.path=value: " + o);
    const std::string path = o.substr(0, eq);
    const std::string raw = o.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw;
    }
    json* node = &j;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (key.empty()) throw Error("config.override", "empty key in override " + o);
      if (!node->is_object()) *node = json::object();
      if (dot == std::string::npos) {
        (*node)[key] = value;
        break;
      }
      node = &(*node)[key];
      start = dot + 1;
    }
  }
}

PipelineConfig config_from_json(const json& j, const fs::path& base_dir) {
  PipelineConfig cfg;
  Section root(j, "config");
  cfg.input_path = resolve(base_dir, root.get<std::string>("input_path", ""));
  cfg.output_dir = resolve(base_dir, root.get<std::string>("output_dir", ""));
  if (auto c = root.opt<std::string>("cache_dir")) cfg.cache_dir = resolve(base_dir, *c);
  cfg.task_profile = parse_task_profile(root.get<std::string>("task_profile", "nlu"));
  cfg.skip_failed_embeddings = root.get<bool>("skip_failed_embeddings", false);

  {
    auto s = root.child("mock");
    cfg.mock_mode = s.get<bool>("enabled", false);
    cfg.mock_seed = s.get<std::uint64_t>("seed", 0);
    cfg.mock_embedding_dims = s.get<std::size_t>("embedding_dims", MockProvider::kDefaultDims);
    s.finish();
  }
  {
    auto s = root.child("expansion");
    cfg.expansion.rounds = s.get<int>("rounds", 0);
    cfg.expansion.answer_generation =
        parse_answer_generation(s.get<std::string>("answer_generation", "regenerate"));
    cfg.expansion.skip_on_error = s.get<bool>("skip_on_error", true);
    s.finish();
  }
  cfg.expansion.task_profile = cfg.task_profile;
  {
    auto s = root.child("variety");
    cfg.variety.reduced_dim = s.get<int>("reduced_dim", cfg.variety.reduced_dim);
    cfg.variety.keep_fraction = s.get<double>("keep_fraction", cfg.variety.keep_fraction);
    cfg.variety.eigen_tolerance = s.get<double>("eigen_tolerance", cfg.variety.eigen_tolerance);
    cfg.variety.whiten = s.get<bool>("whiten", false);
    s.finish();
  }
  {
    auto s = root.child("quality");
    if (auto p = s.opt<std::string>("few_shot_path"); p && !p->empty())
      cfg.few_shot_path = resolve(base_dir, *p);
    cfg.quality.weight_gpt = s.get<double>("weight_gpt", cfg.quality.weight_gpt);
    cfg.quality.weight_len = s.get<double>("weight_len", cfg.quality.weight_len);
    cfg.quality.length_ref = s.get<double>("length_ref", cfg.quality.length_ref);
    cfg.quality.length_score_max = s.get<double>("length_score_max", cfg.quality.length_score_max);
    cfg.quality.keep_count = s.opt<std::size_t>("keep_count");
    cfg.quality.keep_fraction = s.opt<double>("keep_fraction");
    s.finish();
  }
  cfg.quality.few_shot_examples =
      cfg.few_shot_path ? load_few_shot(*cfg.few_shot_path) : default_few_shot(cfg.task_profile);

  ProviderConfig chat_defaults;
  chat_defaults.model_name = "gpt-4";
  cfg.chat_provider = provider_from(root.child("chat_provider"), chat_defaults);
  ProviderConfig embed_defaults;
  embed_defaults.model_name = "text-embedding-ada-002";
  cfg.embedding_provider = provider_from(root.child("embedding_provider"), embed_defaults);
  {
    auto s = root.child("reports");
    cfg.reports.histogram_bin_width = s.get<double>("histogram_bin_width", cfg.reports.histogram_bin_width);
    cfg.reports.hours_per_kitem = s.opt<double>("hours_per_kitem");
    cfg.reports.emission_rate = s.get<double>("emission_rate", cfg.reports.emission_rate);
    s.finish();
  }
  root.finish();
  validate(cfg);
  return cfg;
}

ojson config_to_json(const PipelineConfig& cfg) {
  ojson j;
  j["input_path"] = cfg.input_path.string();
  j["output_dir"] = cfg.output_dir.string();
  j["cache_dir"] = cfg.cache_dir ? ojson(cfg.cache_dir->string()) : ojson(nullptr);
  j["task_profile"] = to_string(cfg.task_profile);
  j["skip_failed_embeddings"] = cfg.skip_failed_embeddings;
  j["mock"] = {{"enabled", cfg.mock_mode}, {"seed", cfg.mock_seed}, {"embedding_dims", cfg.mock_embedding_dims}};
  j["expansion"] = {{"rounds", cfg.expansion.rounds},
                    {"answer_generation", to_string(cfg.expansion.answer_generation)},
                    {"skip_on_error", cfg.expansion.skip_on_error}};
  j["variety"] = {{"reduced_dim", cfg.variety.reduced_dim},
                  {"keep_fraction", cfg.variety.keep_fraction},
                  {"eigen_tolerance", cfg.variety.eigen_tolerance},
                  {"whiten", cfg.variety.whiten}};
  ojson q;
  q["few_shot_path"] = cfg.few_shot_path ? ojson(cfg.few_shot_path->string()) : ojson(nullptr);
  q["weight_gpt"] = cfg.quality.weight_gpt;
  q["weight_len"] = cfg.quality.weight_len;
  q["length_ref"] = cfg.quality.length_ref;
  q["length_score_max"] = cfg.quality.length_score_max;
  q["keep_count"] = cfg.quality.keep_count ? ojson(*cfg.quality.keep_count) : ojson(nullptr);
  q["keep_fraction"] = cfg.quality.keep_fraction ? ojson(*cfg.quality.keep_fraction) : ojson(nullptr);
  j["quality"] = q;
  j["chat_provider"] = provider_to_json(cfg.chat_provider);
  j["embedding_provider"] = provider_to_json(cfg.embedding_provider);
  j["reports"] = {{"histogram_bin_width", cfg.reports.histogram_bin_width},
                  {"hours_per_kitem", cfg.reports.hours_per_kitem ? ojson(*cfg.reports.hours_per_kitem)
                                                                  : ojson(nullptr)},
                  {"emission_rate", cfg.reports.emission_rate}};
  return j;
}

PipelineConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error("config.invalid", path.string() + ": " + e.what());
  }
  apply_overrides(j, overrides);
  return config_from_json(j, path.parent_path());
}

void validate(const PipelineConfig& cfg) {
  if (cfg.input_path.empty()) throw Error("config.invalid", "input_path is required");
  if (cfg.output_dir.empty()) throw Error("config.invalid", "output_dir is required");
  if (cfg.mock_mode && cfg.mock_embedding_dims < 1)
    throw Error("config.invalid", "mock.embedding_dims must be >= 1");
  validate(cfg.expansion);
  validate(cfg.variety);
  validate(cfg.quality);
  validate(cfg.chat_provider);
  validate(cfg.embedding_provider);
  if (cfg.expansion.task_profile != cfg.task_profile)
    throw Error("config.invalid", "expansion task profile differs from pipeline task profile");
  if (!(cfg.reports.histogram_bin_width > 0.0))
    throw Error("config.invalid", "reports.histogram_bin_width must be positive");
  if (!(cfg.reports.emission_rate > 0.0)) throw Error("config.invalid", "reports.emission_rate must be positive");
  if (cfg.reports.hours_per_kitem && !(*cfg.reports.hours_per_kitem > 0.0))
    throw Error("config.invalid", "reports.hours_per_kitem must be positive");
}

// ---------------------------------------------------------------------------
// Artifacts

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kExpand: return "expand";
    case Stage::kEmbed: return "embed";
    case Stage::kVariety: return "variety";
    case Stage::kScore: return "score";
    case Stage::kQuality: return "quality";
    case Stage::kReport: return "report";
  }
  return "unknown";
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> kStages{Stage::kExpand, Stage::kEmbed,   Stage::kVariety,
                                          Stage::kScore,  Stage::kQuality, Stage::kReport};
  return kStages;
}

namespace artifacts {
std::string round_file(int round) { return "round_" + std::to_string(round) + ".jsonl"; }
std::string manifest_file(Stage s) { return std::string(to_string(s)) + ".manifest.json"; }
}  // namespace artifacts

std::string file_digest(const fs::path& p) { return sha256(read_file(p)).hex(); }

void save_embeddings(const EmbeddingMatrix& m, const fs::path& path) {
  std::string out;
  for (std::size_t i = 0; i < m.rows; ++i) {
    ojson j;
    j["id"] = m.row_ids[i];
    const auto row = m.row(i);
    j["embedding"] = std::vector<double>(row.begin(), row.end());
    out += j.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

EmbeddingMatrix load_embeddings(const fs::path& path) {
  const std::string text = read_file(path);
  EmbeddingMatrix m;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      auto v = j.at("embedding").get<std::vector<double>>();
      if (m.rows == 0) m.dims = v.size();
      if (v.size() != m.dims || v.empty()) throw std::invalid_argument("inconsistent embedding dimension");
      m.row_ids.push_back(j.at("id").get<std::string>());
      m.values.insert(m.values.end(), v.begin(), v.end());
      ++m.rows;
    } catch (const std::exception& e) {
      throw Error("embedding.malformed_line", path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate(m);
  return m;
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(PipelineConfig cfg, PipelineHooks hooks) : cfg_(std::move(cfg)), hooks_(std::move(hooks)) {
  validate(cfg_);
}

void Pipeline::log(const std::string& line) const {
  if (hooks_.log) hooks_.log(line);
}

std::shared_ptr<ResponseCache> Pipeline::cache() {
  if (!cache_) cache_ = std::make_shared<ResponseCache>(cfg_.cache_dir.value_or(cfg_.output_dir / "cache"));
  return cache_;
}

Gateway& Pipeline::chat_gateway() {
  if (!chat_) {
    std::shared_ptr<Provider> p;
    if (hooks_.provider_factory) p = hooks_.provider_factory(ProviderRole::kChat);
    else if (cfg_.mock_mode) p = std::make_shared<MockProvider>(cfg_.mock_seed, cfg_.mock_embedding_dims);
    else p = std::make_shared<HttpProvider>(cfg_.chat_provider);
    chat_ = std::make_unique<Gateway>(std::move(p), cfg_.chat_provider, cache());
  }
  return *chat_;
}

Gateway& Pipeline::embedding_gateway() {
  if (!embed_) {
    std::shared_ptr<Provider> p;
    if (hooks_.provider_factory) p = hooks_.provider_factory(ProviderRole::kEmbedding);
    else if (cfg_.mock_mode) p = std::make_shared<MockProvider>(cfg_.mock_seed, cfg_.mock_embedding_dims);
    else p = std::make_shared<HttpProvider>(cfg_.embedding_provider);
    embed_ = std::make_unique<Gateway>(std::move(p), cfg_.embedding_provider, cache());
  }
  return *embed_;
}

fs::path Pipeline::require(const fs::path& p, Stage producer) const {
  if (!fs::exists(p))
    throw Error("stage.missing_input", "expected file " + p.string() + " (produced by the " +
                                           std::string(to_string(producer)) + " stage)");
  return p;
}

ojson Pipeline::stage_config(Stage s) const {
  ojson j;
  j["task_profile"] = to_string(cfg_.task_profile);
  switch (s) {
    case Stage::kExpand:
      j["rounds"] = cfg_.expansion.rounds;
      j["answer_generation"] = to_string(cfg_.expansion.answer_generation);
      j["skip_on_error"] = cfg_.expansion.skip_on_error;
      j["provider"] = provider_identity(cfg_, cfg_.chat_provider);
      j["temperature"] = cfg_.chat_provider.temperature ? ojson(*cfg_.chat_provider.temperature) : ojson(nullptr);
      break;
    case Stage::kEmbed:
      j["provider"] = provider_identity(cfg_, cfg_.embedding_provider);
      break;
    case Stage::kVariety:
      j["reduced_dim"] = cfg_.variety.reduced_dim;
      j["keep_fraction"] = cfg_.variety.keep_fraction;
      j["eigen_tolerance"] = cfg_.variety.eigen_tolerance;
      j["whiten"] = cfg_.variety.whiten;
      j["skip_failed_embeddings"] = cfg_.skip_failed_embeddings;
      break;
    case Stage::kScore:
      j["few_shot"] = few_shot_json(cfg_.quality.few_shot_examples);
      j["weight_gpt"] = cfg_.quality.weight_gpt;
      j["weight_len"] = cfg_.quality.weight_len;
      j["length_ref"] = cfg_.quality.length_ref;
      j["length_score_max"] = cfg_.quality.length_score_max;
      j["provider"] = provider_identity(cfg_, cfg_.chat_provider);
      j["temperature"] = cfg_.chat_provider.temperature ? ojson(*cfg_.chat_provider.temperature) : ojson(nullptr);
      break;
    case Stage::kQuality:
      j["keep_count"] = cfg_.quality.keep_count ? ojson(*cfg_.quality.keep_count) : ojson(nullptr);
      j["keep_fraction"] = cfg_.quality.keep_fraction ? ojson(*cfg_.quality.keep_fraction) : ojson(nullptr);
      break;
    case Stage::kReport:
      j["histogram_bin_width"] = cfg_.reports.histogram_bin_width;
      j["hours_per_kitem"] = cfg_.reports.hours_per_kitem ? ojson(*cfg_.reports.hours_per_kitem) : ojson(nullptr);
      j["emission_rate"] = cfg_.reports.emission_rate;
      break;
  }
  return j;
}

std::vector<fs::path> Pipeline::stage_inputs(Stage s) const {
  switch (s) {
    case Stage::kExpand: return {cfg_.input_path};
    case Stage::kEmbed: return {out(artifacts::kExpanded)};
    case Stage::kVariety: return {out(artifacts::kExpanded), out(artifacts::kEmbeddings)};
    case Stage::kScore: return {out(artifacts::kVariety)};
    case Stage::kQuality: return {out(artifacts::kScored)};
    case Stage::kReport:
      return {cfg_.input_path, out(artifacts::kExpanded), out(artifacts::kScored), out(artifacts::kFinal)};
  }
  return {};
}

ojson Pipeline::finish_manifest(Stage s, ojson body, const std::vector<fs::path>& outputs) {
  ojson m;
  m["stage"] = to_string(s);
  ojson inputs = ojson::object();
  for (const auto& p : stage_inputs(s))
    inputs[p == cfg_.input_path ? std::string("input") : p.filename().string()] = file_digest(p);
  m["inputs"] = inputs;
  m["config_digest"] = json_digest(stage_config(s));
  for (auto& [k, v] : body.items()) m[k] = v;
  ojson outs = ojson::object();
  for (const auto& p : outputs) outs[p.filename().string()] = file_digest(p);
  m["outputs"] = outs;
  write_file_atomic(out(artifacts::manifest_file(s)), m.dump(2) + "\n");
  return m;
}

bool Pipeline::up_to_date(Stage s) const {
  const auto path = out(artifacts::manifest_file(s));
  if (!fs::exists(path)) return false;
  try {
    const auto m = json::parse(read_file(path));
    if (m.at("config_digest").get<std::string>() != json_digest(stage_config(s))) return false;
    for (const auto& p : stage_inputs(s)) {
      const std::string key = p == cfg_.input_path ? std::string("input") : p.filename().string();
      if (!fs::exists(p) || m.at("inputs").at(key).get<std::string>() != file_digest(p)) return false;
    }
    for (const auto& [name, digest] : m.at("outputs").items()) {
      const auto p = out(name);
      if (!fs::exists(p) || file_digest(p) != digest.get<std::string>()) return false;
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

ojson Pipeline::run_stage(Stage stage) {
  fs::create_directories(cfg_.output_dir);
  log("stage " + std::string(to_string(stage)) + ": running");
  switch (stage) {
    case Stage::kExpand: return expand_stage();
    case Stage::kEmbed: return embed_stage();
    case Stage::kVariety: return variety_stage();
    case Stage::kScore: return score_stage();
    case Stage::kQuality: return quality_stage();
    case Stage::kReport: return report_stage();
  }
  throw Error("stage.unknown", "unknown stage");
}

ojson Pipeline::expand_stage() {
  if (!fs::exists(cfg_.input_path))
    throw Error("stage.missing_input", "expected input dataset " + cfg_.input_path.string());
  const Dataset original = load_valid(cfg_.input_path, cfg_.task_profile);

  std::vector<fs::path> outputs;
  ExpansionResult result;
  try {
    result = expand(original, chat_gateway(), cfg_.expansion, [&](int i, const RoundResult& r) {
      const auto p = out(artifacts::round_file(i));
      save_dataset(r.records, p);
      outputs.push_back(p);
      log("  round " + std::to_string(i) + ": " + std::to_string(r.records.size()) + " records, " +
          std::to_string(r.skips.size()) + " skipped");
    });
  } catch (const ExpansionAborted& e) {
    const auto partial = out("round_" + std::to_string(e.round()) + ".partial.jsonl");
    save_dataset(e.partial(), partial);
    throw Error("expansion.aborted", std::string(e.what()) + "; partial results in " + partial.string());
  }
  const auto expanded = out(artifacts::kExpanded);
  save_dataset(result.merged, expanded);
  outputs.push_back(expanded);

  ojson body;
  ojson counts;
  counts["original"] = original.size();
  ojson rounds = ojson::array();
  for (const auto& r : result.rounds) rounds.push_back(r.size());
  counts["rounds"] = rounds;
  counts["merged"] = result.merged.size();
  counts["skipped"] = result.skips.size();
  body["counts"] = counts;
  ojson skips = ojson::array();
  for (const auto& s : result.skips)
    skips.push_back({{"parent_id", s.parent_id}, {"round", s.round}, {"step", s.step}, {"reason", s.reason}});
  body["skips"] = skips;
  return finish_manifest(Stage::kExpand, body, outputs);
}

ojson Pipeline::embed_stage() {
  const Dataset d = load_valid(require(out(artifacts::kExpanded), Stage::kExpand), cfg_.task_profile);
  if (d.empty()) throw Error("embed.empty", "nothing to embed: " + out(artifacts::kExpanded).string() + " is empty");
  std::vector<TextItem> items;
  items.reserve(d.size());
  for (const auto& r : d.records) items.push_back({r.id, embedding_text(r)});
  EmbedResult result = embedding_gateway().embed_batch(items);
  if (!result.errors.empty() && !cfg_.skip_failed_embeddings) {
    const auto& e = result.errors.front();
    throw Error("embed.failed", std::to_string(result.errors.size()) + " embedding(s) failed; first \"" + e.id +
                                    "\": " + e.error.message);
  }
  const auto path = out(artifacts::kEmbeddings);
  save_embeddings(result.matrix, path);

  ojson body;
  body["counts"] = {{"records", d.size()}, {"embedded", result.matrix.rows}, {"failed", result.errors.size()}};
  body["dims"] = result.matrix.dims;
  ojson failures = ojson::array();
  for (const auto& e : result.errors)
    failures.push_back({{"id", e.id}, {"kind", to_string(e.error.kind)}, {"message", e.error.message}});
  body["failures"] = failures;
  return finish_manifest(Stage::kEmbed, body, {path});
}

ojson Pipeline::variety_stage() {
  Dataset d = load_valid(require(out(artifacts::kExpanded), Stage::kExpand), cfg_.task_profile);
  const EmbeddingMatrix x = load_embeddings(require(out(artifacts::kEmbeddings), Stage::kEmbed));
  std::size_t dropped = 0;
  if (cfg_.skip_failed_embeddings) {
    std::unordered_set<std::string> have(x.row_ids.begin(), x.row_ids.end());
    const auto before = d.size();
    std::erase_if(d.records, [&](const InstructionRecord& r) { return !have.contains(r.id); });
    dropped = before - d.size();
  }
  const VarietyResult result = variety_curate(d, x, cfg_.variety);

  const auto curated = out(artifacts::kVariety);
  save_dataset(result.curated, curated);
  std::string diag;
  for (const auto& dg : result.diagnostics) {
    ojson j;
    j["id"] = dg.id;
    j["row_variance"] = dg.row_variance;
    j["selected"] = dg.selected;
    diag += j.dump() + "\n";
  }
  const auto diag_path = out(artifacts::kVarietyDiagnostics);
  write_file_atomic(diag_path, diag);

  ojson body;
  body["counts"] = {{"input", d.size()}, {"selected", result.curated.size()}, {"dropped_unembedded", dropped}};
  body["reduced_dim"] = result.eigenvalues.size();
  body["eigenvalues"] = result.eigenvalues;
  return finish_manifest(Stage::kVariety, body, {curated, diag_path});
}

ojson Pipeline::score_stage() {
  const Dataset d = load_valid(require(out(artifacts::kVariety), Stage::kVariety), cfg_.task_profile);
  const auto assessments = score_dataset(d, chat_gateway(), cfg_.quality);
  const auto scored = out(artifacts::kScored);
  save_scored(d, assessments, scored);

  std::string responses;
  std::size_t parse_failures = 0, provider_failures = 0, out_of_range = 0;
  for (const auto& a : assessments) {
    if (a.gpt.provider_error) ++provider_failures;
    else if (!a.gpt.parse_ok) ++parse_failures;
    if (a.gpt.out_of_range) ++out_of_range;
    ojson j;
    j["id"] = a.record_id;
    j["raw_response"] = a.gpt.raw_response;
    j["parse_ok"] = a.gpt.parse_ok;
    j["out_of_range"] = a.gpt.out_of_range;
    j["provider_error"] = a.gpt.provider_error ? ojson(*a.gpt.provider_error) : ojson(nullptr);
    responses += j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
  }
  const auto responses_path = out(artifacts::kScoreResponses);
  write_file_atomic(responses_path, responses);

  ojson body;
  body["counts"] = {{"scored", assessments.size()},
                    {"parse_failures", parse_failures},
                    {"provider_failures", provider_failures},
                    {"out_of_range", out_of_range}};
  return finish_manifest(Stage::kScore, body, {scored, responses_path});
}

ojson Pipeline::quality_stage() {
  const auto scored = load_scored(require(out(artifacts::kScored), Stage::kScore), cfg_.task_profile);
  const Dataset final_set = quality_curate(scored.dataset, scored.assessments, cfg_.quality);
  const auto path = out(artifacts::kFinal);
  save_dataset(final_set, path);
  ojson body;
  body["counts"] = {{"input", scored.dataset.size()}, {"kept", final_set.size()}};
  return finish_manifest(Stage::kQuality, body, {path});
}

ojson Pipeline::report_stage() {
  const Dataset original = load_valid(cfg_.input_path, cfg_.task_profile);
  const Dataset expanded = load_valid(require(out(artifacts::kExpanded), Stage::kExpand), cfg_.task_profile);
  const auto scored = load_scored(require(out(artifacts::kScored), Stage::kScore), cfg_.task_profile);
  const Dataset final_set = load_valid(require(out(artifacts::kFinal), Stage::kQuality), cfg_.task_profile);

  std::vector<fs::path> outputs;
  auto emit = [&](const char* json_name, const ojson& j, const std::string& text) {
    const auto jp = out(json_name);
    write_file_atomic(jp, j.dump(2) + "\n");
    auto tp = jp;
    tp.replace_extension(".txt");
    write_file_atomic(tp, text);
    outputs.push_back(jp);
    outputs.push_back(tp);
  };

  const auto composition = composition_report(final_set);
  emit(artifacts::kComposition, to_json(composition), composition_table(composition));

  const auto hist = score_histogram(scored.assessments, cfg_.reports.histogram_bin_width, ScoreField::kFinal);
  emit(artifacts::kHistogram, to_json(hist), histogram_text(hist));
  const auto hist_gpt = score_histogram(scored.assessments, cfg_.reports.histogram_bin_width, ScoreField::kGpt);
  emit(artifacts::kHistogramGpt, to_json(hist_gpt), histogram_text(hist_gpt));

  if (cfg_.reports.hours_per_kitem) {
    ojson cost;
    std::string text;
    const std::pair<const char*, std::size_t> sizes[] = {
        {"original", original.size()}, {"expanded", expanded.size()}, {"curated", final_set.size()}};
    for (const auto& [name, n] : sizes) {
      const auto c = estimate_cost(static_cast<double>(n), *cfg_.reports.hours_per_kitem, cfg_.reports.emission_rate);
      cost[name] = to_json(c);
      text += std::string("[") + name + "]\n" + cost_table(c);
    }
    emit(artifacts::kCost, cost, text);
  }

  ojson body;
  body["counts"] = {{"original", original.size()},
                    {"expanded", expanded.size()},
                    {"scored", scored.dataset.size()},
                    {"final", final_set.size()}};
  return finish_manifest(Stage::kReport, body, outputs);
}

ojson Pipeline::run_all() {
  fs::create_directories(cfg_.output_dir);
  ojson stages = ojson::array();
  std::optional<Stage> last_completed;
  for (Stage s : all_stages()) {
    try {
      ojson m;
      if (up_to_date(s)) {
        log("stage " + std::string(to_string(s)) + ": up to date");
        m = ojson::parse(read_file(out(artifacts::manifest_file(s))));
      } else {
        m = run_stage(s);
      }
      stages.push_back(std::move(m));
      last_completed = s;
    } catch (const std::exception& e) {
      ojson failed;
      failed["status"] = "failed";
      failed["failed_stage"] = to_string(s);
      failed["last_completed_stage"] = last_completed ? ojson(to_string(*last_completed)) : ojson(nullptr);
      failed["error"] = e.what();
      write_file_atomic(out(artifacts::kRunManifest), failed.dump(2) + "\n");
      throw;
    }
  }
  ojson run;
  run["status"] = "complete";
  ojson all_cfg = ojson::object();
  for (Stage s : all_stages()) all_cfg[std::string(to_string(s))] = json_digest(stage_config(s));
  run["config_digests"] = all_cfg;
  run["stages"] = stages;
  write_file_atomic(out(artifacts::kRunManifest), run.dump(2) + "\n");
  return run;
}

}  // namespace lift
