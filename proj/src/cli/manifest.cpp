#include <fstream>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "chemostat/cli.hpp"
#include "chemostat/errors.hpp"

namespace chemostat::cli {

using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw InvariantViolation("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PreconditionError("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw PreconditionError("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

json RunManifest::to_json() const {
  json outs = json::array();
  for (const auto& f : outputs) {
    outs.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  }
  return {{"tool", kToolName},
          {"tool_version", tool_version},
          {"subcommand", subcommand},
          {"exit_code", exit_code},
          {"wall_clock_seconds", wall_clock_seconds},
          {"config", config},
          {"outputs", outs}};
}

RunManifest RunManifest::from_json(const json& j) {
  try {
    RunManifest m;
    m.subcommand = j.at("subcommand").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.exit_code = j.at("exit_code").get<int>();
    m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    m.config = j.at("config");
    for (const auto& f : j.at("outputs")) {
      m.outputs.push_back({f.at("name").get<std::string>(), f.at("sha256").get<std::string>(),
                           f.at("bytes").get<std::uintmax_t>()});
    }
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw PreconditionError("cannot create output directory " + dir_.string());
}

void OutputSet::write(const std::string& name, const std::string& content) {
  for (const auto& f : files_) {
    if (f.name == name) throw InvariantViolation("output written twice: " + name);
  }
  write_atomic(dir_ / name, content);
  files_.push_back({name, sha256_hex(content), content.size()});
}

void OutputSet::write_manifest(RunManifest manifest) {
  manifest.outputs = files_;
  write_atomic(dir_ / "manifest.json", manifest.to_json().dump(2) + "\n");
}

}  // namespace chemostat::cli
