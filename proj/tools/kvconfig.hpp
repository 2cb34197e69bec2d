#ifndef SPSAOI_TOOLS_KVCONFIG_HPP
#define SPSAOI_TOOLS_KVCONFIG_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace spsaoi::tools {

/// Flat key=value store with dotted keys for nesting. Lines starting with
/// '#' (or anything after '#') are comments; blank lines are ignored.
class KvConfig {
 public:
  static KvConfig parse_file(const std::string& path);
  static KvConfig parse_text(const std::string& text);

  void set(const std::string& key, const std::string& value);
  /// "key=value" as passed to --set.
  void set_from_arg(const std::string& arg);

  bool has(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_real(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_real_list(const std::string& key) const;
  std::vector<std::int64_t> get_int_list(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace spsaoi::tools

#endif  // SPSAOI_TOOLS_KVCONFIG_HPP
