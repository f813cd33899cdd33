#include "featforge/manifest.hpp"

#include "featforge/graph.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

namespace featforge {
namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: init failed");
  }
  void update(const void* data, std::size_t size) {
    if (EVP_DigestUpdate(ctx_.get(), data, size) != 1) throw Error("sha256: update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw Error("sha256: final failed");
    std::string out;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
      std::snprintf(buf, sizeof buf, "%02x", md[i]);
      out += buf;
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string digest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  Sha256 sha;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    sha.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return sha.hex();
}

}  // namespace

std::string digest_path(const std::filesystem::path& path) {
  if (!std::filesystem::is_directory(path)) return digest_file(path);
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(path))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  Sha256 sha;
  for (const auto& f : files) {
    std::string line = f.filename().string() + ' ' + digest_file(f) + '\n';
    sha.update(line.data(), line.size());
  }
  return sha.hex();
}

nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["config"] = m.config;
  j["seeds"] = m.seeds;
  j["tool_version"] = m.tool_version;
  j["inputs"] = nlohmann::json::array();
  for (const auto& in : m.inputs) j["inputs"].push_back({{"path", in.path}, {"sha256", in.sha256}});
  j["outputs"] = m.outputs;
  j["timings"] = nlohmann::json::array();
  for (const auto& t : m.timings) j["timings"].push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    m.seeds = j.at("seeds");
    m.tool_version = j.at("tool_version").get<std::string>();
    for (const auto& in : j.at("inputs")) m.inputs.push_back({in.at("path"), in.at("sha256")});
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    for (const auto& t : j.at("timings")) m.timings.push_back({t.at("stage"), t.at("seconds")});
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(m).dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return manifest_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<std::string> stale_inputs(const RunManifest& m) {
  std::vector<std::string> stale;
  for (const auto& in : m.inputs) {
    std::error_code ec;
    if (!std::filesystem::exists(in.path, ec) || digest_path(in.path) != in.sha256) stale.push_back(in.path);
  }
  return stale;
}

}  // namespace featforge
