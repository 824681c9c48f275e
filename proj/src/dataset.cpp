#include "lift/dataset.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "lift/error.hpp"

namespace lift {

using nlohmann::json;

namespace {

constexpr std::string_view kRecordKeys[] = {
    "id", "instruction", "input", "output", "source_round", "parent_id",
    "task_profile"};

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  });
}

const std::string& require_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(std::string("missing \"") + key + "\"");
  if (!it->is_string()) throw std::invalid_argument(std::string("\"") + key + "\" must be a string");
  return it->get_ref<const std::string&>();
}

std::string optional_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) return {};
  if (!it->is_string()) throw std::invalid_argument(std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

}  // namespace

std::string_view to_string(TaskProfile p) {
  return p == TaskProfile::kCode ? "code" : "nlu";
}

TaskProfile parse_task_profile(std::string_view s) {
  if (s == "nlu") return TaskProfile::kNlu;
  if (s == "code") return TaskProfile::kCode;
  throw Error("config.task_profile",
              "unknown task profile \"" + std::string(s) + "\" (expected nlu or code)");
}

void validate(const Dataset& d) {
  std::unordered_set<std::string_view> ids;
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const auto& r = d.records[i];
    const std::string where = "record " + std::to_string(i) + " (id \"" + r.id + "\")";
    if (r.id.empty()) throw Error("dataset.invalid_record", where + ": empty id");
    if (!ids.insert(r.id).second)
      throw Error("dataset.duplicate_id", "duplicate id \"" + r.id + "\"");
    if (r.instruction.empty())
      throw Error("dataset.invalid_record", where + ": empty instruction");
    if (r.source_round < 0)
      throw Error("dataset.invalid_record", where + ": negative source_round");
    if ((r.source_round == 0) != !r.parent_id.has_value())
      throw Error("dataset.invalid_record",
                  where + ": source_round 0 must coincide with an absent parent_id");
    if (r.task_profile != d.task_profile)
      throw Error("dataset.mixed_profile", where + ": task_profile differs from dataset");
  }
}

Digest content_hash(const InstructionRecord& r) {
  Hasher h;
  h.field(r.instruction).field(r.input).field(r.output);
  return h.finish();
}

std::string embedding_text(const InstructionRecord& r) {
  return r.instruction + "\n" + r.input + "\n" + r.output;
}

nlohmann::ordered_json record_to_json(const InstructionRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["instruction"] = r.instruction;
  j["input"] = r.input;
  j["output"] = r.output;
  j["source_round"] = r.source_round;
  j["parent_id"] = r.parent_id ? nlohmann::ordered_json(*r.parent_id) : nlohmann::ordered_json(nullptr);
  j["task_profile"] = to_string(r.task_profile);
  return j;
}

InstructionRecord record_from_json(const json& j, TaskProfile profile, std::size_t index,
                                   std::span<const std::string_view> extra_keys) {
  if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    const bool known =
        std::find(std::begin(kRecordKeys), std::end(kRecordKeys), key) != std::end(kRecordKeys) ||
        std::find(extra_keys.begin(), extra_keys.end(), key) != extra_keys.end();
    if (!known) throw std::invalid_argument("unknown key \"" + key + "\"");
  }

  InstructionRecord r;
  if (j.contains("id")) {
    r.id = require_string(j, "id");
  } else {
    r.id = std::to_string(index);
  }
  r.instruction = require_string(j, "instruction");
  if (r.instruction.empty()) throw std::invalid_argument("\"instruction\" is empty");
  r.input = optional_string(j, "input");
  r.output = optional_string(j, "output");
  if (const auto it = j.find("source_round"); it != j.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 0)
      throw std::invalid_argument("\"source_round\" must be a non-negative integer");
    r.source_round = it->get<int>();
  }
  if (const auto it = j.find("parent_id"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw std::invalid_argument("\"parent_id\" must be a string or null");
    r.parent_id = it->get<std::string>();
  }
  if ((r.source_round == 0) != !r.parent_id.has_value())
    throw std::invalid_argument("source_round 0 must coincide with a null parent_id");
  r.task_profile = profile;
  if (const auto it = j.find("task_profile"); it != j.end()) {
    if (!it->is_string()) throw std::invalid_argument("\"task_profile\" must be a string");
    const auto& s = it->get_ref<const std::string&>();
    if (s != "nlu" && s != "code") throw std::invalid_argument("unknown task_profile \"" + s + "\"");
    if (parse_task_profile(s) != profile)
      throw std::invalid_argument("task_profile \"" + s + "\" does not match dataset profile \"" +
                                  std::string(to_string(profile)) + "\"");
  }
  return r;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io.read", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  // Unique per writer so concurrent writers never share a temp file.
  static std::atomic<std::uint64_t> counter{0};
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io.write", "cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw Error("io.write", "write failed for " + path.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("io.write", "cannot rename into " + path.string());
  }
}

Dataset load_dataset(const std::filesystem::path& path, TaskProfile profile) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io.read", "cannot open dataset " + path.string());

  Dataset d;
  d.task_profile = profile;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    InstructionRecord r;
    try {
      r = record_from_json(json::parse(line), profile, d.records.size());
    } catch (const std::exception& e) {
      throw Error("dataset.malformed_line",
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(r.id).second)
      throw Error("dataset.duplicate_id", path.string() + ":" + std::to_string(line_no) +
                                              ": duplicate id \"" + r.id + "\"");
    d.records.push_back(std::move(r));
  }
  return d;
}

std::string dump_dataset(const Dataset& d) {
  std::string out;
  for (const auto& r : d.records) {
    out += record_to_json(r).dump(-1, ' ', false, json::error_handler_t::strict);
    out += '\n';
  }
  return out;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  write_file_atomic(path, dump_dataset(d));
}

Dataset merge(std::span<const Dataset> parts) {
  if (parts.empty()) throw Error("dataset.merge_empty", "merge needs at least one dataset");
  Dataset out;
  out.task_profile = parts.front().task_profile;
  std::set<Digest> seen;
  std::unordered_set<std::string> ids;
  for (const auto& part : parts) {
    if (part.task_profile != out.task_profile)
      throw Error("dataset.mixed_profile", "cannot merge datasets with different task profiles");
    for (const auto& r : part.records) {
      if (!seen.insert(content_hash(r)).second) continue;
      if (!ids.insert(r.id).second)
        throw Error("dataset.duplicate_id", "merge: id \"" + r.id + "\" reused for different content");
      out.records.push_back(r);
    }
  }
  return out;
}

}  // namespace lift
