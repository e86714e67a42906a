#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "isolab/error.hpp"
#include "isolab/random.hpp"
#include "isolab/version.hpp"

namespace isolab {

/// What was run, with which inputs, so an output can be reproduced.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> arguments;
  std::uint64_t seed = 0;
  /// input path -> content hash
  std::vector<std::pair<std::string, std::string>> fingerprints;
  std::string tool_version = kToolVersion;
  std::string timestamp;
  nlohmann::json metadata = nlohmann::json::object();

  nlohmann::json to_json() const {
    nlohmann::json args = nlohmann::json::array();
    for (const auto& [k, v] : arguments) args.push_back({{"name", k}, {"value", v}});
    nlohmann::json prints = nlohmann::json::object();
    for (const auto& [k, v] : fingerprints) prints[k] = v;
    return {{"command", command},     {"arguments", args},       {"seed", seed},
            {"fingerprints", prints}, {"tool_version", tool_version}, {"timestamp", timestamp},
            {"prng", kPrngName},      {"metadata", metadata}};
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << to_json().dump(2) << '\n';
    if (!out) throw Error("cannot write manifest " + path.string());
  }
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// FNV-1a 64 over the three corpus files, as 16 hex digits.
inline std::string corpus_fingerprint(const std::filesystem::path& dir) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char* name : {"meta.json", "tokens.tsv", "vectors.bin"}) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) throw Error("cannot fingerprint " + (dir / name).string());
    std::ostringstream ss;
    ss << in.rdbuf();
    hash = fnv1a64(ss.str(), hash);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace isolab
