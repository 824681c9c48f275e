#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>

#include "lift/dataset.hpp"

namespace lift::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("lift_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline InstructionRecord make_record(std::string id, std::string instruction, std::string input = "",
                                     std::string output = "out", TaskProfile p = TaskProfile::kNlu) {
  InstructionRecord r;
  r.id = std::move(id);
  r.instruction = std::move(instruction);
  r.input = std::move(input);
  r.output = std::move(output);
  r.task_profile = p;
  return r;
}

/// n distinct seed records.
inline Dataset seed_dataset(std::size_t n, TaskProfile p = TaskProfile::kNlu) {
  Dataset d;
  d.task_profile = p;
  for (std::size_t i = 0; i < n; ++i) {
    d.records.push_back(make_record(std::to_string(i), "Seed instruction number " + std::to_string(i),
                                    i % 3 == 0 ? "context " + std::to_string(i) : "",
                                    "Seed answer " + std::to_string(i * 7), p));
  }
  return d;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

}  // namespace lift::testing
