#include <algorithm>
#include <istream>
#include <sstream>

#include "paragram/config.hpp"
#include "paragram/error.hpp"
#include "paragram/text.hpp"

namespace paragram {

std::string normalize_key(std::string_view key) {
  while (!key.empty() && key.front() == '-') key.remove_prefix(1);
  std::string out(key);
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<bool> parse_flag(std::string_view v) {
  const std::string s = to_lower_ascii(v);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  return std::nullopt;
}

}  // namespace

RunConfig::RunConfig(std::vector<OptionSpec> schema) : schema_(std::move(schema)) {
  for (auto& s : schema_) s.key = normalize_key(s.key);
}

bool RunConfig::knows(std::string_view key) const {
  const std::string k = normalize_key(key);
  return std::any_of(schema_.begin(), schema_.end(), [&](const OptionSpec& s) { return s.key == k; });
}

const OptionSpec& RunConfig::spec(std::string_view key) const {
  const std::string k = normalize_key(key);
  for (const auto& s : schema_) {
    if (s.key == k) return s;
  }
  throw UsageError("unknown option '" + k + "'");
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const OptionSpec& s = spec(key);
  const std::string v = trim(value);
  auto fail = [&](const std::string& why) {
    throw UsageError("option '" + s.key + "': " + why + " (got '" + v + "')");
  };
  switch (s.type) {
    case OptionType::kInteger:
      if (!try_parse_integer(v)) fail("expected an integer");
      break;
    case OptionType::kReal:
      try {
        parse_real(v, s.key);
      } catch (const DataError&) {
        fail("expected a number");
      }
      break;
    case OptionType::kFlag:
      if (!parse_flag(v)) fail("expected true or false");
      break;
    case OptionType::kString:
    case OptionType::kPath:
      if (s.type == OptionType::kPath && v.empty()) fail("expected a path");
      break;
  }
  if (!s.choices.empty() &&
      std::find(s.choices.begin(), s.choices.end(), to_lower_ascii(v)) == s.choices.end()) {
    std::string options;
    for (const auto& c : s.choices) options += (options.empty() ? "" : "|") + c;
    fail("expected one of " + options);
  }
  values_[s.key] = v;
}

void RunConfig::merge(std::istream& in, std::string_view origin) {
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw UsageError(std::string(origin) + " line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    try {
      set(key, std::string_view(body).substr(eq + 1));
    } catch (const UsageError& e) {
      throw UsageError(std::string(origin) + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::optional<std::string> RunConfig::find(std::string_view key) const {
  const OptionSpec& s = spec(key);
  if (auto it = values_.find(s.key); it != values_.end()) return it->second;
  return s.default_value;
}

bool RunConfig::explicitly_set(std::string_view key) const {
  return values_.contains(spec(key).key);
}

std::string RunConfig::get(std::string_view key) const {
  auto v = find(key);
  if (!v) throw UsageError("missing required option --" + normalize_key(key));
  return *v;
}

long long RunConfig::get_integer(std::string_view key) const {
  const std::string v = get(key);
  auto parsed = try_parse_integer(v);
  if (!parsed) throw UsageError("option '" + normalize_key(key) + "': expected an integer");
  return *parsed;
}

double RunConfig::get_real(std::string_view key) const {
  const std::string v = get(key);
  try {
    return parse_real(v, normalize_key(key));
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
}

bool RunConfig::get_flag(std::string_view key) const {
  auto v = find(key);
  if (!v) return false;
  auto parsed = parse_flag(*v);
  if (!parsed) throw UsageError("option '" + normalize_key(key) + "': expected true or false");
  return *parsed;
}

void RunConfig::require_all() const {
  for (const auto& s : schema_) {
    if (s.required && !find(s.key)) throw UsageError("missing required option --" + s.key);
  }
}

std::string RunConfig::resolved_text() const {
  std::ostringstream out;
  for (const auto& s : schema_) {
    if (auto v = find(s.key)) out << s.key << '=' << *v << '\n';
  }
  return out.str();
}

RunConfig load_config(std::istream& in, std::vector<OptionSpec> schema, std::string_view origin) {
  RunConfig cfg(std::move(schema));
  cfg.merge(in, origin);
  return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path, std::vector<OptionSpec> schema) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  return load_config(in, std::move(schema), path.string());
}

}  // namespace paragram
