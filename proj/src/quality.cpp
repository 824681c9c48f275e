#include "lift/quality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "lift/error.hpp"
#include "lift/prompts.hpp"

namespace lift {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(first, last - first + 1));
}

// Examples 1 and 3 have no input slot in the judge template; a non-empty
// input is carried on the instruction line instead.
std::string example_instruction(const FewShotExample& ex) {
  return ex.input.empty() ? ex.instruction : ex.instruction + "\n" + ex.input;
}

std::string example_score(const FewShotExample& ex) {
  std::string s = std::to_string(ex.score);
  if (!ex.rationale.empty()) s += "\n" + ex.rationale;
  return s;
}

}  // namespace

void validate(const QualityConfig& cfg) {
  if (cfg.few_shot_examples.size() != 3)
    throw Error("config.quality", "exactly 3 few-shot examples are required, got " +
                                      std::to_string(cfg.few_shot_examples.size()));
  for (const auto& ex : cfg.few_shot_examples)
    if (ex.score < 0 || ex.score > 100) throw Error("config.quality", "few-shot score outside [0, 100]");
  if (!(cfg.weight_gpt >= 0.0) || !(cfg.weight_len >= 0.0))
    throw Error("config.quality", "fusion weights must be nonnegative");
  if (std::abs(cfg.weight_gpt + cfg.weight_len - 1.0) > 1e-9)
    throw Error("config.quality", "fusion weights must sum to 1");
  if (!(cfg.length_ref > 0.0)) throw Error("config.quality", "length_ref must be positive");
  if (!(cfg.length_score_max >= 0.0)) throw Error("config.quality", "length_score_max must be >= 0");
  if (!cfg.keep_count && !cfg.keep_fraction)
    throw Error("config.quality", "one of keep_count or keep_fraction is required");
  if (cfg.keep_fraction && !(*cfg.keep_fraction > 0.0 && *cfg.keep_fraction <= 1.0))
    throw Error("config.quality", "keep_fraction must lie in (0, 1]");
}

std::vector<FewShotExample> default_few_shot(TaskProfile profile) {
  if (profile == TaskProfile::kCode) {
    return {
        {"Write a function that adds two numbers.", "",
         "def add(a, b): return a - b", 22,
         "The task is trivial, the code is wrong (it subtracts) and nothing is explained."},
        {"Reverse the words in the given sentence.", "sentence = \"data quality matters\"",
         "words = sentence.split()\nprint(' '.join(reversed(words)))\n\nSplit on whitespace, "
         "reverse the list and join it back.",
         63, "Correct and clear but an easy task with a one-line explanation."},
        {"Implement an LRU cache with O(1) get and put operations and a fixed capacity.", "",
         "Use a hash map from key to a node in a doubly linked list. The list keeps entries in "
         "recency order: get moves the node to the front, put inserts at the front and evicts "
         "the tail when the capacity is exceeded. Both operations touch a constant number of "
         "nodes, so they run in O(1).\n\nclass LRUCache: ...",
         90, "A demanding problem, a correct design and a thorough explanation of the complexity."},
    };
  }
  return {
      {"What is the capital of Australia?", "", "Sydney.", 18,
       "Simple question and the answer is factually wrong (it is Canberra)."},
      {"Summarize the passage in one sentence.",
       "Photosynthesis converts light energy into chemical energy stored in glucose.",
       "Plants use light to make glucose, storing the light's energy chemically.", 61,
       "Accurate and clear, but the task is easy and there is no explanation."},
      {"A train leaves at 3:40 pm and travels 150 km at 60 km/h, then 90 km at 45 km/h. When "
       "does it arrive?",
       "",
       "The first leg takes 150 / 60 = 2.5 h and the second 90 / 45 = 2 h, so the trip lasts "
       "4.5 h. Adding 4 h 30 min to 3:40 pm gives an arrival time of 8:10 pm.",
       92, "Multi-step reasoning, every step shown and the result is correct."},
  };
}

std::vector<FewShotExample> load_few_shot(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error("config.few_shot", path.string() + ": " + e.what());
  }
  if (!j.is_array() || j.size() != 3)
    throw Error("config.few_shot", path.string() + ": expected an array of exactly 3 examples");
  std::vector<FewShotExample> out;
  for (const auto& e : j) {
    try {
      for (const auto& [key, _] : e.items())
        if (key != "instruction" && key != "input" && key != "output" && key != "score" &&
            key != "rationale")
          throw Error("config.few_shot", path.string() + ": unknown key \"" + key + "\"");
      FewShotExample ex;
      ex.instruction = e.at("instruction").get<std::string>();
      ex.input = e.value("input", "");
      ex.output = e.at("output").get<std::string>();
      ex.score = e.at("score").get<int>();
      ex.rationale = e.value("rationale", "");
      out.push_back(std::move(ex));
    } catch (const json::exception& ex) {
      throw Error("config.few_shot", path.string() + ": " + ex.what());
    }
  }
  return out;
}

PromptPair build_score_prompt(const InstructionRecord& r, const QualityConfig& cfg) {
  if (cfg.few_shot_examples.size() != 3)
    throw Error("quality.precondition", "score prompt needs exactly 3 few-shot examples");
  const auto& ex = cfg.few_shot_examples;
  const std::map<std::string, std::string, std::less<>> values{
      {"EXAMPLE INSTRUCTION 1", example_instruction(ex[0])},
      {"EXAMPLE OUTPUT 1", ex[0].output},
      {"SCORE 1", example_score(ex[0])},
      {"EXAMPLE INSTRUCTION 2", ex[1].instruction},
      {"EXAMPLE INPUT 2", ex[1].input},
      {"EXAMPLE OUTPUT 2", ex[1].output},
      {"SCORE 2", example_score(ex[1])},
      {"EXAMPLE INSTRUCTION 3", example_instruction(ex[2])},
      {"EXAMPLE OUTPUT 3", ex[2].output},
      {"SCORE 3", example_score(ex[2])},
      {"INSTRUCTION", r.instruction},
      {"INPUT", r.input},
      {"OUTPUT", r.output},
  };
  return {std::string(prompts::kScoreSystem), prompts::render(prompts::kScoreUser, values)};
}

GptScore parse_score_response(std::string_view text) {
  GptScore s;
  s.raw_response = std::string(text);

  std::size_t pos = 0;
  std::string first;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    first = trim(line);
    if (!first.empty()) break;
  }
  if (pos < text.size()) s.explanation = trim(text.substr(pos));
  if (first.empty()) return s;

  std::size_t i = 0;
  bool negative = false;
  if (first[0] == '+' || first[0] == '-') {
    negative = first[0] == '-';
    i = 1;
  }
  if (i == first.size()) return s;
  long long value = 0;
  bool huge = false;
  for (; i < first.size(); ++i) {
    const char c = first[i];
    if (c < '0' || c > '9') return s;
    if (value < 1000000) value = value * 10 + (c - '0');
    else huge = true;
  }
  if (negative && (value != 0 || huge)) {
    s.total = 0;
    s.out_of_range = true;
  } else if (huge || value > 100) {
    s.total = 100;
    s.out_of_range = true;
  } else {
    s.total = static_cast<int>(value);
  }
  s.parse_ok = true;
  return s;
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

double length_score_for(std::size_t characters, const QualityConfig& cfg) {
  const double ratio = std::log1p(static_cast<double>(characters)) / std::log1p(cfg.length_ref);
  return cfg.length_score_max * std::min(1.0, ratio);
}

double length_score(const InstructionRecord& r, const QualityConfig& cfg) {
  return length_score_for(utf8_length(r.instruction) + utf8_length(r.input) + utf8_length(r.output), cfg);
}

double fuse_scores(int gpt_total, double length, const QualityConfig& cfg) {
  return cfg.weight_gpt * static_cast<double>(gpt_total) + cfg.weight_len * length;
}

std::vector<QualityAssessment> score_dataset(const Dataset& d, Gateway& gateway,
                                             const QualityConfig& cfg) {
  validate(cfg);
  std::vector<QualityAssessment> out(d.size());
  gateway.for_each_index(d.size(), [&](std::size_t i) {
    const auto& r = d.records[i];
    auto& a = out[i];
    a.record_id = r.id;
    auto response = gateway.chat_complete(build_score_prompt(r, cfg));
    if (response.ok()) {
      a.gpt = parse_score_response(response.value());
    } else {
      a.gpt = GptScore{};
      a.gpt.provider_error = std::string(to_string(response.error().kind)) + ": " + response.error().message;
    }
    a.length_score = length_score(r, cfg);
    a.final_score = fuse_scores(a.gpt.total, a.length_score, cfg);
  });
  return out;
}

std::size_t quality_keep_size(std::size_t n, const QualityConfig& cfg) {
  if (cfg.keep_count) return *cfg.keep_count;
  if (!cfg.keep_fraction) throw Error("config.quality", "one of keep_count or keep_fraction is required");
  if (n == 0) return 0;
  const double raw = *cfg.keep_fraction * static_cast<double>(n);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw))), 1, n);
}

Dataset quality_curate(const Dataset& d, std::span<const QualityAssessment> assessments,
                       const QualityConfig& cfg) {
  const std::size_t keep = quality_keep_size(d.size(), cfg);
  if (keep > d.size())
    throw Error("quality.keep_count", "keep_count " + std::to_string(keep) + " exceeds dataset size " +
                                          std::to_string(d.size()));
  std::unordered_map<std::string_view, double> score_of;
  for (const auto& a : assessments) score_of.emplace(a.record_id, a.final_score);

  std::vector<std::size_t> order(d.size());
  std::vector<double> scores(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto it = score_of.find(d.records[i].id);
    if (it == score_of.end())
      throw Error("quality.alignment", "no assessment for record \"" + d.records[i].id + "\"");
    scores[i] = it->second;
  }
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return d.records[a].id < d.records[b].id;
                    });
  order.resize(keep);
  std::sort(order.begin(), order.end());

  Dataset out;
  out.task_profile = d.task_profile;
  for (std::size_t i : order) out.records.push_back(d.records[i]);
  return out;
}

std::string dump_scored(const Dataset& d, std::span<const QualityAssessment> assessments) {
  if (assessments.size() != d.size())
    throw Error("quality.alignment", "assessment count does not match dataset size");
  std::string out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& a = assessments[i];
    if (a.record_id != d.records[i].id)
      throw Error("quality.alignment", "assessment order does not match dataset order");
    auto j = record_to_json(d.records[i]);
    j["gpt_score"] = a.gpt.total;
    j["parse_ok"] = a.gpt.parse_ok;
    j["length_score"] = a.length_score;
    j["final_score"] = a.final_score;
    out += j.dump(-1, ' ', false, json::error_handler_t::strict);
    out += '\n';
  }
  return out;
}

void save_scored(const Dataset& d, std::span<const QualityAssessment> assessments,
                 const std::filesystem::path& path) {
  write_file_atomic(path, dump_scored(d, assessments));
}

ScoredDataset load_scored(const std::filesystem::path& path, TaskProfile profile) {
  static constexpr std::string_view kExtra[] = {"gpt_score", "parse_ok", "length_score", "final_score"};
  const std::string text = read_file(path);
  ScoredDataset out;
  out.dataset.task_profile = profile;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      auto r = record_from_json(j, profile, out.dataset.size(), kExtra);
      QualityAssessment a;
      a.record_id = r.id;
      a.gpt.total = j.at("gpt_score").get<int>();
      a.gpt.parse_ok = j.at("parse_ok").get<bool>();
      a.length_score = j.at("length_score").get<double>();
      a.final_score = j.at("final_score").get<double>();
      if (a.gpt.total < 0 || a.gpt.total > 100) throw std::invalid_argument("gpt_score outside [0, 100]");
      out.dataset.records.push_back(std::move(r));
      out.assessments.push_back(std::move(a));
    } catch (const std::exception& e) {
      throw Error("dataset.malformed_line", path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate(out.dataset);
  return out;
}

}  // namespace lift
