#include "lift/cache.hpp"

#include <chrono>

#include <nlohmann/json.hpp>

#include "lift/dataset.hpp"

namespace lift {

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(*dir_);
}

std::filesystem::path ResponseCache::entry_path(const Digest& key) const {
  const std::string hex = key.hex();
  return *dir_ / hex.substr(0, 2) / (hex + ".json");
}

std::optional<std::string> ResponseCache::get(const Digest& key) const {
  if (!dir_) {
    std::lock_guard lock(mu_);
    const auto it = memory_.find(key);
    if (it == memory_.end()) return std::nullopt;
    return it->second;
  }
  const auto path = entry_path(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    return j.at("response").get<std::string>();
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable entry behaves as a miss
  }
}

void ResponseCache::put(const Digest& key, std::string_view response, std::string_view model) {
  if (!dir_) {
    std::lock_guard lock(mu_);
    memory_.insert_or_assign(key, std::string(response));
    return;
  }
  nlohmann::json j;
  j["model"] = model;
  j["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  j["response"] = response;
  std::string bytes;
  try {
    bytes = j.dump();
  } catch (const nlohmann::json::type_error&) {
    return;  // not valid UTF-8; leave uncached
  }
  write_file_atomic(entry_path(key), bytes);
}

}  // namespace lift
