#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "lift/digest.hpp"

namespace lift {

/// Content-addressed response store. With a directory, entries live at
/// `<dir>/<hh>/<digest>.json` and are written atomically; without one the
/// cache is process-local.
class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const Digest& key) const;
  void put(const Digest& key, std::string_view response, std::string_view model);

  const std::optional<std::filesystem::path>& directory() const { return dir_; }

 private:
  std::filesystem::path entry_path(const Digest& key) const;

  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mu_;
  std::map<Digest, std::string> memory_;
};

}  // namespace lift
