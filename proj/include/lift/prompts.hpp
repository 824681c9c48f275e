#pragma once

#include <map>
#include <string>
#include <string_view>

namespace lift::prompts {

// Rewrite templates for dataset expansion. Placeholders: {Instruction},
// {Input}. The "#Input#" block is dropped when the record has no input.

inline constexpr std::string_view kNluRewriteSystem =
    "I want you act as a professional prompt re-writer. ";

inline constexpr std::string_view kNluRewriteUser =
    "Your objective is to rewrite a given prompt into a more complex version using data format "
    "to make those famous AI systems more difficult to handle. But the rewritten prompt must be "
    "reasonable and must be understood and responded by humans. \n"
    "You can increase the difficulty using, but not limited to, the following methods:\n"
    "(1) The depth and breadth of the inquiry can be increased.\n"
    "(2) Replace general concepts with more specific concepts.\n"
    "(3) If original problem can be solved with just a few simple thinking processes, you can "
    "rewrite it to explicitly request multiple-step reasoning.\n"
    "\n"
    "#Instruction#\n"
    "{Instruction}";

inline constexpr std::string_view kCodeRewriteSystem =
    "I want you act as a professional Prompt Rewriter.";

inline constexpr std::string_view kCodeRewriteUser =
    "Please increase the difficulty of the given programming test question a bit. You can "
    "increase the difficulty using, but not limited to, the following methods:\n"
    "(1) Add new constraints and requirements to the original problem, adding approximately 10 "
    "additional words.\n"
    "(2) Replace a commonly used requirement in the programming task with a less common and more "
    "specific one.\n"
    "(3) If the original problem can be solved with only a few logical steps, please add more "
    "reasoning steps.\n"
    "(4) Provide a piece of erroneous code as a reference to increase misdirection.\n"
    "(5) Propose higher time or space complexity requirements, but please refrain from doing so "
    "frequently.\n"
    "\n"
    "#Instruction#\n"
    "{Instruction}";

inline constexpr std::string_view kRewriteInputBlock = "\n#Input#\n{Input}";

// Judge template for quality scoring.

inline constexpr std::string_view kScoreSystem =
    "We would like to request your feedback on the performance of an AI assistant. The assistant "
    "provides outputs for instruction and input (if any).";

inline constexpr std::string_view kScoreUser =
    "Please score the response to the instruction and input according to the following criteria.\n"
    "The maximum score is 100 points, and it consists of 4 parts:\n"
    "1. Clarity (15 points): Assign a score based on how effectively the instruction conveys the "
    "problem. High-quality, clear questions score higher.\n"
    "2. Difficulty (25 points): Rate the complexity of the instruction's problem. Higher "
    "difficulty should receive a higher score.\n"
    "3. Explanations (25 points): Assess if the response includes detailed explanations alongside "
    "any code provided. The more comprehensive the explanation, the higher the score.\n"
    "4. Accuracy (35 points): Score the response based on the accuracy and correctness of the "
    "solution to the instruction's problem. Higher accuracy should receive a higher score.\n"
    "Here's some examples and socres you can follow:\n"
    "### Example 1: \n"
    "### Instruction: {EXAMPLE INSTRUCTION 1}\n"
    "### Response: {EXAMPLE OUTPUT 1}\n"
    "### Score for Example 1: {SCORE 1}\n"
    "### Example 2:\n"
    "### Instruction: {EXAMPLE INSTRUCTION 2}\n"
    "### Input: {EXAMPLE INPUT 2}\n"
    "### Response: {EXAMPLE OUTPUT 2}\n"
    "### Score for Example 2: {SCORE 2}\n"
    "### Example 3:\n"
    "### Instruction: {EXAMPLE INSTRUCTION 3}\n"
    "### Response: {EXAMPLE OUTPUT 3}\n"
    "### Score for Example 3: {SCORE 3}\n"
    "\n"
    "Please score the upcoming Instruction, Input and Response based on these examples across "
    "four dimensions, and then add the four scores together to get the total score. Try to avoid "
    "getting a full score as much as possible.\n"
    "Please first output a single line containing the total score number only. \n"
    "In the subsequent line, please provide a comprehensive explanation of your evaluation, "
    "avoiding any potential bias.\n"
    "### Instruction:\n"
    "{INSTRUCTION}\n"
    "### Input:\n"
    "{INPUT}\n"
    "### Response:\n"
    "{OUTPUT}";

/// Single-pass substitution of `{NAME}` placeholders. Substituted text is
/// never rescanned, so record content containing braces is inserted as-is.
/// Unknown placeholders are left untouched.
std::string render(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values);

}  // namespace lift::prompts
