// Run manifests: enough information to re-run a command and check that it
// reproduces its outputs byte for byte.
#ifndef SMF_CLI_MANIFEST_HPP
#define SMF_CLI_MANIFEST_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace smf::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_bytes(const std::string& bytes);

struct FileRecord {
  std::string path;  // absolute for inputs, relative to the output directory for outputs
  std::string sha256;
};

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;  // fully resolved, re-runnable arguments
  nlohmann::ordered_json config;
  std::vector<FileRecord> inputs;
  std::vector<FileRecord> outputs;
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  double duration_seconds = 0.0;
};

nlohmann::ordered_json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::ordered_json& j);

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace smf::cli

#endif  // SMF_CLI_MANIFEST_HPP
