#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hdpower {

inline constexpr const char* kVersion = "0.1.0";

struct ManifestOutput {
  std::string file;
  std::size_t rows = 0;
};

/// Record written next to every experiment output so the run can be
/// regenerated: the resolved configuration, the master seed and what was written.
struct RunManifest {
  std::string tool_version = kVersion;
  std::string experiment;
  std::string kind;
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
  std::chrono::system_clock::time_point started;
  std::chrono::system_clock::time_point finished;
  std::vector<ManifestOutput> outputs;
  std::int64_t failed_trials = 0;

  /// Pretty-printed JSON with a trailing newline.
  std::string to_json() const;
};

/// UTC timestamp such as 2024-05-01T12:00:00Z.
std::string iso8601_utc(std::chrono::system_clock::time_point t);

}  // namespace hdpower
