#ifndef SPSAOI_TOOLS_MANIFEST_HPP
#define SPSAOI_TOOLS_MANIFEST_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace spsaoi::tools {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Tracks files written into an output directory and finishes with a
/// manifest.json listing each one with its sha-256.
class OutputBundle {
 public:
  explicit OutputBundle(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  /// Writes content to dir/name and records it.
  void write_file(const std::string& name, const std::string& content);
  /// Records a file written externally (must exist under dir).
  void record(const std::string& name);

  void write_manifest();

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

}  // namespace spsaoi::tools

#endif  // SPSAOI_TOOLS_MANIFEST_HPP
