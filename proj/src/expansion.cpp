#include "lift/expansion.hpp"

#include <optional>

#include "lift/prompts.hpp"

namespace lift {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string describe(const ProviderError& e) {
  return std::string(to_string(e.kind)) + ": " + e.message;
}

}  // namespace

std::string_view to_string(AnswerGeneration a) {
  return a == AnswerGeneration::kCopyParent ? "copy_parent" : "regenerate";
}

AnswerGeneration parse_answer_generation(std::string_view s) {
  if (s == "regenerate") return AnswerGeneration::kRegenerate;
  if (s == "copy_parent") return AnswerGeneration::kCopyParent;
  throw Error("config.expansion", "unknown answer_generation \"" + std::string(s) + "\"");
}

void validate(const ExpansionConfig& cfg) {
  if (cfg.rounds < 0) throw Error("config.expansion", "rounds must be >= 0");
}

PromptPair build_rewrite_prompt(const InstructionRecord& r) {
  const bool code = r.task_profile == TaskProfile::kCode;
  std::string user_tmpl(code ? prompts::kCodeRewriteUser : prompts::kNluRewriteUser);
  if (!r.input.empty()) user_tmpl += prompts::kRewriteInputBlock;
  return {std::string(code ? prompts::kCodeRewriteSystem : prompts::kNluRewriteSystem),
          prompts::render(user_tmpl, {{"Instruction", r.instruction}, {"Input", r.input}})};
}

PromptPair build_answer_prompt(const std::string& instruction) { return {"", instruction}; }

RoundResult expand_round(const Dataset& d, Gateway& gateway, const ExpansionConfig& cfg) {
  if (d.empty()) throw Error("expansion.precondition", "expand_round needs a non-empty dataset");
  if (d.task_profile != cfg.task_profile)
    throw Error("expansion.precondition", "dataset profile does not match expansion profile");

  struct Slot {
    std::optional<InstructionRecord> record;
    std::optional<SkipEntry> skip;
  };
  std::vector<Slot> slots(d.size());

  gateway.for_each_index(d.size(), [&](std::size_t i) {
    const auto& parent = d.records[i];
    const int round = parent.source_round + 1;
    auto fail = [&](std::string step, std::string reason) {
      slots[i].skip = SkipEntry{parent.id, round, std::move(step), std::move(reason)};
    };

    auto rewritten = gateway.chat_complete(build_rewrite_prompt(parent));
    if (!rewritten.ok()) return fail("rewrite", describe(rewritten.error()));
    std::string instruction = trim(rewritten.value());
    if (instruction.empty()) return fail("rewrite", "empty rewrite");

    std::string output;
    if (cfg.answer_generation == AnswerGeneration::kCopyParent) {
      output = parent.output;
    } else {
      auto answer = gateway.chat_complete(build_answer_prompt(instruction));
      if (!answer.ok()) return fail("answer", describe(answer.error()));
      output = trim(answer.value());
      if (output.empty()) return fail("answer", "empty answer");
    }

    InstructionRecord child;
    child.id = parent.id + ".r" + std::to_string(round);
    child.instruction = std::move(instruction);
    child.output = std::move(output);
    child.source_round = round;
    child.parent_id = parent.id;
    child.task_profile = parent.task_profile;
    slots[i].record = std::move(child);
  });

  RoundResult out;
  out.records.task_profile = d.task_profile;
  for (auto& s : slots) {
    if (s.record) out.records.records.push_back(std::move(*s.record));
    if (s.skip) out.skips.push_back(std::move(*s.skip));
  }
  if (!cfg.skip_on_error && !out.skips.empty()) {
    const auto& first = out.skips.front();
    throw ExpansionAborted("expansion aborted in round " + std::to_string(first.round) + " at \"" +
                               first.parent_id + "\" (" + first.step + "): " + first.reason,
                           first.round, std::move(out.records));
  }
  return out;
}

ExpansionResult expand(const Dataset& d, Gateway& gateway, const ExpansionConfig& cfg,
                       const std::function<void(int, const RoundResult&)>& on_round) {
  validate(cfg);
  ExpansionResult result;
  std::vector<Dataset> parts{d};
  result.rounds.reserve(static_cast<std::size_t>(cfg.rounds));
  const Dataset* previous = &d;
  for (int i = 1; i <= cfg.rounds; ++i) {
    RoundResult round;
    round.records.task_profile = d.task_profile;
    if (!previous->empty()) round = expand_round(*previous, gateway, cfg);
    if (on_round) on_round(i, round);
    result.skips.insert(result.skips.end(), round.skips.begin(), round.skips.end());
    result.rounds.push_back(std::move(round.records));
    previous = &result.rounds.back();
  }
  parts.insert(parts.end(), result.rounds.begin(), result.rounds.end());
  result.merged = merge(parts);
  return result;
}

}  // namespace lift
