#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace peng {

/// Flat `key=value` document used for profiles, populations and engine
/// configs. Blank lines and lines starting with '#' are ignored.
class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile parse(std::string_view text, std::string_view source = "<string>");
  static KeyValueFile load(const std::filesystem::path& path);

  bool contains(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;
  std::string require(std::string_view key) const;

  double get_double(std::string_view key, double fallback) const;
  long long get_int(std::string_view key, long long fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;

  void set(std::string key, std::string value);
  const std::vector<std::string>& keys() const { return order_; }

  /// Emits keys in insertion order, one per line.
  std::string to_string() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
  std::vector<std::string> order_;
  std::string source_;
};

}  // namespace peng
