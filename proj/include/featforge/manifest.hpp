#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace featforge {

inline constexpr const char* kToolVersion = "0.1.0";

struct InputDigest {
  std::string path;
  std::string sha256;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

/// Provenance record written next to every CLI output.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json seeds = nlohmann::json::object();
  std::vector<InputDigest> inputs;
  std::vector<std::string> outputs;
  std::vector<StageTiming> timings;
  std::string tool_version = kToolVersion;
};

/// Hex SHA-256 of a file's bytes. For a directory, the digest of the sorted
/// "name sha256" lines of its regular files.
std::string digest_path(const std::filesystem::path& path);

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

/// Recomputes every input digest; returns the paths whose content changed or
/// vanished.
std::vector<std::string> stale_inputs(const RunManifest& m);

}  // namespace featforge
