#include "lift/mock_provider.hpp"

#include <cmath>
#include <numbers>

#include "lift/digest.hpp"
#include "lift/prompts.hpp"

namespace lift {

namespace {

// splitmix64: small, portable and fully specified, unlike std distributions.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // Uniform in (0, 1].
  double unit() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }
};

Digest request_digest(std::uint64_t seed, std::string_view kind, std::string_view a,
                      std::string_view b = {}) {
  Hasher h;
  h.field(std::to_string(seed)).field(kind).field(a).field(b);
  return h.finish();
}

std::string extract_instruction(const std::string& user) {
  static constexpr std::string_view kMarker = "#Instruction#\n";
  auto start = user.rfind(kMarker);
  if (start == std::string::npos) return user;
  start += kMarker.size();
  auto end = user.find("\n#Input#\n", start);
  return user.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

}  // namespace

MockProvider::MockProvider(std::uint64_t seed, std::size_t dims) : seed_(seed), dims_(dims) {}

std::string MockProvider::identity() const {
  return "mock:" + std::to_string(seed_) + ":" + std::to_string(dims_);
}

Result<std::string> MockProvider::complete(const PromptPair& prompt) {
  const Digest d = request_digest(seed_, "chat", prompt.system, prompt.user);
  const std::string tag = d.hex().substr(0, 12);
  if (prompt.system == prompts::kNluRewriteSystem || prompt.system == prompts::kCodeRewriteSystem) {
    return "[rewritten] " + extract_instruction(prompt.user) + " (variant " + tag + ")";
  }
  if (prompt.system == prompts::kScoreSystem) {
    const int total = 60 + static_cast<int>(d.prefix64() % 41);
    return std::to_string(total) + "\nMock evaluation " + tag +
           ": the response addresses the instruction with adequate detail.";
  }
  return "[mock answer " + tag + "] A worked response to: " + prompt.user.substr(0, 160);
}

Vector MockProvider::embed_one(const std::string& text) const {
  SplitMix64 rng{request_digest(seed_, "embed", text).prefix64()};
  Vector v(dims_);
  for (std::size_t i = 0; i < dims_; i += 2) {
    const double r = std::sqrt(-2.0 * std::log(rng.unit()));
    const double theta = 2.0 * std::numbers::pi * rng.unit();
    v[i] = r * std::cos(theta);
    if (i + 1 < dims_) v[i + 1] = r * std::sin(theta);
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

Result<std::vector<Vector>> MockProvider::embed(std::span<const std::string> texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

}  // namespace lift
