#include "hdpower/manifest.hpp"

#include <json.hpp>

#include <ctime>

namespace hdpower {

std::string iso8601_utc(std::chrono::system_clock::time_point t) {
  const std::time_t seconds = std::chrono::system_clock::to_time_t(t);
  std::tm utc{};
  gmtime_r(&seconds, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

std::string RunManifest::to_json() const {
  // ordered_json keeps the fields in the order a reader expects.
  nlohmann::ordered_json j;
  j["tool"] = "hdpower";
  j["version"] = tool_version;
  j["experiment"] = experiment;
  j["kind"] = kind;
  j["config_file"] = config_file;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [key, value] : config) cfg[key] = value;
  j["config"] = cfg;
  // As a string: JSON readers commonly lose precision above 2^53.
  j["master_seed"] = std::to_string(master_seed);
  j["threads"] = threads;
  j["started"] = iso8601_utc(started);
  j["finished"] = iso8601_utc(finished);
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& o : outputs) files.push_back({{"file", o.file}, {"rows", o.rows}});
  j["outputs"] = files;
  j["failed_trials"] = failed_trials;
  return j.dump(2) + "\n";
}

}  // namespace hdpower
