#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lift/cache.hpp"

namespace lift {

struct PromptPair {
  std::string system;
  std::string user;

  friend bool operator==(const PromptPair&, const PromptPair&) = default;
};

struct ProviderConfig {
  std::string endpoint = "https://api.openai.com/v1";
  std::string model_name;
  std::string credential_env = "OPENAI_API_KEY";
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{60000};
  int max_in_flight = 4;
  std::chrono::milliseconds request_timeout{120000};
  int embed_batch_size = 64;
  std::optional<double> temperature;
};

/// Throws lift::Error when a field violates its bound.
void validate(const ProviderConfig& cfg);

/// Delay before retry number `attempt` (1-based): base * 2^(attempt-1),
/// saturating at the configured cap.
std::chrono::milliseconds backoff_delay(const ProviderConfig& cfg, int attempt);

enum class ErrorKind { kTransient, kPermanent };

struct ProviderError {
  ErrorKind kind = ErrorKind::kTransient;
  std::string message;
  int attempts = 0;
};

std::string_view to_string(ErrorKind k);

/// A value or a ProviderError. Provider failures travel as values so a single
/// bad item never tears down a batch.
template <class T>
class Result {
 public:
  Result(T value) : v_(std::move(value)) {}  // NOLINT(implicit)
  Result(ProviderError error) : v_(std::move(error)) {}  // NOLINT(implicit)

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }

  const T& value() const& { return std::get<0>(v_); }
  T& value() & { return std::get<0>(v_); }
  T&& value() && { return std::get<0>(std::move(v_)); }
  const ProviderError& error() const { return std::get<1>(v_); }

 private:
  std::variant<T, ProviderError> v_;
};

using Vector = std::vector<double>;

/// Backend for chat completions and embeddings. Implementations report
/// failures through Result; they do not retry.
class Provider {
 public:
  virtual ~Provider() = default;

  /// Stable identity (model name plus anything else that changes outputs)
  /// used in cache keys.
  virtual std::string identity() const = 0;
  virtual Result<std::string> complete(const PromptPair& prompt) = 0;
  virtual Result<std::vector<Vector>> embed(std::span<const std::string> texts) = 0;
};

/// n×d row-major matrix of embeddings with aligned record ids.
struct EmbeddingMatrix {
  std::size_t rows = 0;
  std::size_t dims = 0;
  std::vector<double> values;
  std::vector<std::string> row_ids;

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dims, dims};
  }
  std::span<double> row(std::size_t i) { return {values.data() + i * dims, dims}; }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;
};

/// Checks shape, finiteness and id uniqueness.
void validate(const EmbeddingMatrix& m);

struct TextItem {
  std::string id;
  std::string text;
};

struct ItemError {
  std::string id;
  ProviderError error;
};

struct EmbedResult {
  EmbeddingMatrix matrix;  // successful rows only, in input order
  std::vector<ItemError> errors;
};

struct GatewayStats {
  std::uint64_t provider_calls = 0;
  std::uint64_t cache_hits = 0;
};

/// Cached, retrying, concurrency-bounded access to a Provider. Safe to call
/// from multiple threads.
class Gateway {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  Gateway(std::shared_ptr<Provider> provider, ProviderConfig cfg,
          std::shared_ptr<ResponseCache> cache = nullptr, Sleeper sleeper = {});

  Result<std::string> chat_complete(const PromptPair& prompt);
  EmbedResult embed_batch(std::span<const TextItem> items);

  /// Runs fn(i) for i in [0, n) on up to max_in_flight workers. The first
  /// exception thrown by fn stops further dispatch and is rethrown.
  void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn);

  const ProviderConfig& config() const { return cfg_; }
  std::string identity() const { return provider_->identity(); }
  GatewayStats stats() const { return {calls_.load(), hits_.load()}; }

 private:
  template <class T, class Call>
  Result<T> with_retries(Call&& call);

  std::shared_ptr<Provider> provider_;
  ProviderConfig cfg_;
  std::shared_ptr<ResponseCache> cache_;
  Sleeper sleeper_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
  std::atomic<std::uint64_t> calls_{0};
  std::atomic<std::uint64_t> hits_{0};
};

}  // namespace lift
