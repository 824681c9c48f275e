#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lift/digest.hpp"

namespace lift {

enum class TaskProfile { kNlu, kCode };

std::string_view to_string(TaskProfile p);
TaskProfile parse_task_profile(std::string_view s);

/// One instruction/input/output triple plus provenance.
struct InstructionRecord {
  std::string id;
  std::string instruction;
  std::string input;
  std::string output;
  int source_round = 0;              // 0 = original dataset
  std::optional<std::string> parent_id;
  TaskProfile task_profile = TaskProfile::kNlu;

  friend bool operator==(const InstructionRecord&,
                         const InstructionRecord&) = default;
};

/// Ordered, profile-homogeneous collection of records.
struct Dataset {
  TaskProfile task_profile = TaskProfile::kNlu;
  std::vector<InstructionRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Checks the record/dataset invariants (unique non-empty ids, non-empty
/// instruction, round/parent consistency, homogeneous profile). Throws
/// lift::Error on the first violation.
void validate(const Dataset& d);

/// Digest over (instruction, input, output) only; provenance is excluded.
Digest content_hash(const InstructionRecord& r);

/// Text used for embedding a record: instruction, input and output joined by
/// newlines.
std::string embedding_text(const InstructionRecord& r);

nlohmann::ordered_json record_to_json(const InstructionRecord& r);

/// Parses one record object. Keys outside `extra_keys` and the record schema
/// are rejected. `index` is the record's position, used as default id.
InstructionRecord record_from_json(const nlohmann::json& j, TaskProfile profile,
                                   std::size_t index,
                                   std::span<const std::string_view> extra_keys = {});

Dataset load_dataset(const std::filesystem::path& path, TaskProfile profile);
void save_dataset(const Dataset& d, const std::filesystem::path& path);

/// Serialised dataset bytes, exactly as save_dataset would write them.
std::string dump_dataset(const Dataset& d);

/// Concatenates parts in order, dropping exact-content duplicates (first
/// occurrence wins).
Dataset merge(std::span<const Dataset> parts);

/// Writes `contents` to `path` via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace lift
