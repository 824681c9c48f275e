#pragma once

#include <cstdint>
#include <string>

#include "lift/gateway.hpp"

namespace lift {

/// Offline provider whose outputs are pure functions of (seed, request).
///
/// Completions are recognised by their system message:
///  - rewrite prompts return the original instruction wrapped with a
///    "[rewritten]" marker and a digest-derived variant tag;
///  - judge prompts return "<score>\n<explanation>" with a score in [60, 100];
///  - anything else returns a templated answer.
/// Embeddings are unit-norm Gaussian vectors seeded by a digest of the text.
class MockProvider : public Provider {
 public:
  static constexpr std::size_t kDefaultDims = 1536;

  explicit MockProvider(std::uint64_t seed, std::size_t dims = kDefaultDims);

  std::string identity() const override;
  Result<std::string> complete(const PromptPair& prompt) override;
  Result<std::vector<Vector>> embed(std::span<const std::string> texts) override;

  Vector embed_one(const std::string& text) const;

 private:
  std::uint64_t seed_;
  std::size_t dims_;
};

}  // namespace lift
