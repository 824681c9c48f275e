#pragma once

#include <memory>
#include <string>

#include "lift/gateway.hpp"

namespace lift {

/// Chat-completions / embeddings client for OpenAI-compatible HTTP APIs.
///
/// `cfg.endpoint` is the API base (e.g. "https://api.openai.com/v1"); requests
/// go to `<base>/chat/completions` and `<base>/embeddings`. The bearer
/// credential is read from the environment variable `cfg.credential_env` at
/// construction.
///
/// Status mapping: 408, 409, 429, 5xx, timeouts and connection failures are
/// transient; any other non-2xx status is permanent.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(ProviderConfig cfg);
  ~HttpProvider() override;

  std::string identity() const override { return cfg_.model_name; }
  Result<std::string> complete(const PromptPair& prompt) override;
  Result<std::vector<Vector>> embed(std::span<const std::string> texts) override;

 private:
  struct Endpoint;
  Result<std::string> post(const std::string& path, const std::string& body);

  ProviderConfig cfg_;
  std::string credential_;
  std::unique_ptr<Endpoint> endpoint_;
};

}  // namespace lift
