#include "smf/cli/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include "smf/errors.hpp"

namespace smf::cli {

namespace {

std::string to_hex(const unsigned char* data, unsigned int len) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kDigits[data[i] >> 4]);
    out.push_back(kDigits[data[i] & 0xF]);
  }
  return out;
}

}  // namespace

std::string sha256_bytes(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw NumericalError("SHA-256 computation failed");
  }
  return to_hex(digest.data(), len);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_bytes(ss.str());
}

nlohmann::ordered_json to_json(const RunManifest& m) {
  auto files = [](const std::vector<FileRecord>& records) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : records) arr.push_back({{"path", r.path}, {"sha256", r.sha256}});
    return arr;
  };
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["config"] = m.config;
  j["inputs"] = files(m.inputs);
  j["outputs"] = files(m.outputs);
  j["seed"] = m.seed;
  j["tool_version"] = m.tool_version;
  j["duration_seconds"] = m.duration_seconds;
  return j;
}

RunManifest manifest_from_json(const nlohmann::ordered_json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.config = j.value("config", nlohmann::ordered_json::object());
    for (const auto& f : j.at("inputs")) {
      m.inputs.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
    }
    for (const auto& f : j.at("outputs")) {
      m.outputs.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
    }
    m.seed = j.value("seed", std::uint64_t{0});
    m.tool_version = j.value("tool_version", std::string{});
    m.duration_seconds = j.value("duration_seconds", 0.0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << to_json(m).dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("manifest is not valid JSON: ") + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace smf::cli
