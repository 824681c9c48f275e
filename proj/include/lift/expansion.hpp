#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lift/dataset.hpp"
#include "lift/error.hpp"
#include "lift/gateway.hpp"

namespace lift {

enum class AnswerGeneration { kRegenerate, kCopyParent };

std::string_view to_string(AnswerGeneration a);
AnswerGeneration parse_answer_generation(std::string_view s);

struct ExpansionConfig {
  int rounds = 0;
  TaskProfile task_profile = TaskProfile::kNlu;
  AnswerGeneration answer_generation = AnswerGeneration::kRegenerate;
  bool skip_on_error = true;
};

void validate(const ExpansionConfig& cfg);

/// Rewriter prompt for the record's task profile, with the record's
/// instruction and input substituted.
PromptPair build_rewrite_prompt(const InstructionRecord& r);

/// Prompt used to regenerate an answer for a rewritten instruction.
PromptPair build_answer_prompt(const std::string& instruction);

struct SkipEntry {
  std::string parent_id;
  int round = 0;
  std::string step;  // "rewrite" or "answer"
  std::string reason;

  friend bool operator==(const SkipEntry&, const SkipEntry&) = default;
};

struct RoundResult {
  Dataset records;  // newly created records only, in parent order
  std::vector<SkipEntry> skips;
};

/// Raised when an item fails with skip_on_error disabled. Carries the records
/// completed so far in the failing round.
class ExpansionAborted : public Error {
 public:
  ExpansionAborted(const std::string& message, int round, Dataset partial)
      : Error("expansion.aborted", message), round_(round), partial_(std::move(partial)) {}

  int round() const { return round_; }
  const Dataset& partial() const { return partial_; }

 private:
  int round_;
  Dataset partial_;
};

/// One rewriting pass over `d`: every record yields at most one child with
/// source_round = parent.source_round + 1.
RoundResult expand_round(const Dataset& d, Gateway& gateway, const ExpansionConfig& cfg);

struct ExpansionResult {
  Dataset merged;              // original followed by every round, deduplicated
  std::vector<Dataset> rounds; // rounds[i] holds round i+1
  std::vector<SkipEntry> skips;
};

/// Runs cfg.rounds chained rounds (round i rewrites round i-1's records) and
/// merges them with the original. `on_round(i, round_result)` is invoked after
/// each completed round.
ExpansionResult expand(const Dataset& d, Gateway& gateway, const ExpansionConfig& cfg,
                       const std::function<void(int, const RoundResult&)>& on_round = {});

}  // namespace lift
