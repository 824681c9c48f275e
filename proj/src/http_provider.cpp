#include "lift/http_provider.hpp"

#include <cstdlib>
#include <regex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lift/error.hpp"

namespace lift {

using nlohmann::json;

struct HttpProvider::Endpoint {
  std::string scheme_host_port;
  std::string base_path;
};

namespace {

bool is_transient_status(int status) {
  return status == 408 || status == 409 || status == 429 || status >= 500;
}

ProviderError transient(std::string msg) { return {ErrorKind::kTransient, std::move(msg), 0}; }
ProviderError permanent(std::string msg) { return {ErrorKind::kPermanent, std::move(msg), 0}; }

}  // namespace

HttpProvider::HttpProvider(ProviderConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  if (cfg_.model_name.empty()) throw Error("config.provider", "provider model_name is empty");
  const char* cred = std::getenv(cfg_.credential_env.c_str());
  if (cred == nullptr || *cred == '\0')
    throw Error("provider.credential",
                "credential environment variable " + cfg_.credential_env + " is not set");
  credential_ = cred;

  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg_.endpoint, m, kUrl))
    throw Error("config.provider", "endpoint is not an http(s) URL: " + cfg_.endpoint);
  endpoint_ = std::make_unique<Endpoint>();
  endpoint_->scheme_host_port = m[1].str();
  endpoint_->base_path = m[2].matched ? m[2].str() : "";
  while (!endpoint_->base_path.empty() && endpoint_->base_path.back() == '/')
    endpoint_->base_path.pop_back();
}

HttpProvider::~HttpProvider() = default;

Result<std::string> HttpProvider::post(const std::string& path, const std::string& body) {
  httplib::Client client(endpoint_->scheme_host_port);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.request_timeout);
  const auto secs = static_cast<time_t>(timeout.count() / 1000000);
  const auto usecs = static_cast<time_t>(timeout.count() % 1000000);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  client.set_bearer_token_auth(credential_);

  auto res = client.Post(endpoint_->base_path + path, body, "application/json");
  if (!res) return transient("request to " + path + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    std::string msg = "HTTP " + std::to_string(res->status) + " from " + path;
    if (!res->body.empty()) msg += ": " + res->body.substr(0, 300);
    return is_transient_status(res->status) ? transient(msg) : permanent(msg);
  }
  return res->body;
}

Result<std::string> HttpProvider::complete(const PromptPair& prompt) {
  json req;
  req["model"] = cfg_.model_name;
  req["messages"] = json::array();
  if (!prompt.system.empty())
    req["messages"].push_back({{"role", "system"}, {"content", prompt.system}});
  req["messages"].push_back({{"role", "user"}, {"content", prompt.user}});
  if (cfg_.temperature) req["temperature"] = *cfg_.temperature;

  auto body = post("/chat/completions", req.dump());
  if (!body.ok()) return body.error();
  try {
    const auto j = json::parse(body.value());
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) return transient("completion has no text content");
    return content.get<std::string>();
  } catch (const std::exception& e) {
    return transient(std::string("malformed completion response: ") + e.what());
  }
}

Result<std::vector<Vector>> HttpProvider::embed(std::span<const std::string> texts) {
  json req;
  req["model"] = cfg_.model_name;
  req["input"] = json::array();
  for (const auto& t : texts) req["input"].push_back(t);

  auto body = post("/embeddings", req.dump());
  if (!body.ok()) return body.error();
  try {
    const auto j = json::parse(body.value());
    const auto& data = j.at("data");
    if (data.size() != texts.size())
      return transient("embedding response has " + std::to_string(data.size()) + " rows for " +
                       std::to_string(texts.size()) + " inputs");
    std::vector<Vector> out(texts.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto idx = data[i].contains("index") ? data[i].at("index").get<std::size_t>() : i;
      if (idx >= out.size()) return transient("embedding index out of range");
      out[idx] = data[i].at("embedding").get<Vector>();
    }
    return out;
  } catch (const std::exception& e) {
    return transient(std::string("malformed embedding response: ") + e.what());
  }
}

}  // namespace lift
