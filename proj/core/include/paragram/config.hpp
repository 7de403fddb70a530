#ifndef PARAGRAM_CONFIG_HPP_
#define PARAGRAM_CONFIG_HPP_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace paragram {

enum class OptionType { kString, kPath, kInteger, kReal, kFlag };

struct OptionSpec {
  std::string key;  // dash-separated, without the leading "--"
  OptionType type = OptionType::kString;
  std::optional<std::string> default_value;
  std::vector<std::string> choices;  // empty means unrestricted
  bool required = false;
  std::string help;
};

// Dash-separated key: strips leading dashes and maps '_' to '-'.
std::string normalize_key(std::string_view key);

// Flat key=value configuration validated against a schema.
class RunConfig {
 public:
  RunConfig() = default;
  explicit RunConfig(std::vector<OptionSpec> schema);

  const std::vector<OptionSpec>& schema() const noexcept { return schema_; }
  bool knows(std::string_view key) const;
  const OptionSpec& spec(std::string_view key) const;

  // Type-checks and stores a value; later calls override earlier ones.
  // Throws UsageError naming the key.
  void set(std::string_view key, std::string_view value);

  // Reads `key=value` lines; '#' starts a comment.
  void merge(std::istream& in, std::string_view origin);

  // Explicit value, else the default.
  std::optional<std::string> find(std::string_view key) const;
  bool has(std::string_view key) const { return find(key).has_value(); }
  bool explicitly_set(std::string_view key) const;
  std::string get(std::string_view key) const;  // UsageError when absent
  long long get_integer(std::string_view key) const;
  double get_real(std::string_view key) const;
  bool get_flag(std::string_view key) const;

  // Throws UsageError for the first required key without a value.
  void require_all() const;

  // Every key with a value, in schema order, as `key=value` lines.
  std::string resolved_text() const;

 private:
  std::vector<OptionSpec> schema_;
  std::map<std::string, std::string, std::less<>> values_;
};

RunConfig load_config(std::istream& in, std::vector<OptionSpec> schema, std::string_view origin = "config");
RunConfig load_config_file(const std::filesystem::path& path, std::vector<OptionSpec> schema);

}  // namespace paragram

#endif  // PARAGRAM_CONFIG_HPP_
