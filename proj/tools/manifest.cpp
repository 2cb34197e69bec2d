#include "manifest.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace spsaoi::tools {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                  nullptr)) {
    throw std::runtime_error("sha256 failed");
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
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

OutputBundle::OutputBundle(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) {
    throw std::runtime_error("cannot create output dir " + dir_.string() +
                             ": " + ec.message());
  }
}

void OutputBundle::write_file(const std::string& name,
                              const std::string& content) {
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw std::runtime_error("write failed for " + path.string());
  names_.push_back(name);
}

void OutputBundle::record(const std::string& name) {
  if (!std::filesystem::exists(dir_ / name)) {
    throw std::runtime_error("recorded file missing: " + name);
  }
  names_.push_back(name);
}

void OutputBundle::write_manifest() {
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& name : names_) {
    files.push_back({{"file", name}, {"sha256", sha256_file(dir_ / name)}});
  }
  nlohmann::ordered_json j;
  j["files"] = files;
  const auto path = dir_ / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << "\n";
}

}  // namespace spsaoi::tools
