#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Flat `key = value` run configuration. A subcommand declares its keys with
// defaults; the config file and then the command-line flags override them.
namespace dbclock::cli {

/// Bad key, bad value or unreadable config file. Maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeySpec {
  std::string name;
  std::string default_value;
  std::string help;
};

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; values may be wrapped in double quotes. Duplicate keys are an error.
[[nodiscard]] std::map<std::string, std::string> parse_flat_config(std::string_view text,
                                                                   std::string_view origin);
[[nodiscard]] std::map<std::string, std::string> load_flat_config(const std::string& path);

class RunConfig {
 public:
  explicit RunConfig(std::vector<KeySpec> keys);

  [[nodiscard]] const std::vector<KeySpec>& keys() const { return keys_; }

  /// Sets a declared key. Unknown keys throw ConfigError naming `origin`.
  void set(const std::string& key, std::string value, std::string_view origin);
  void merge(const std::map<std::string, std::string>& values, std::string_view origin);

  [[nodiscard]] const std::string& str(const std::string& key) const;
  [[nodiscard]] double real(const std::string& key) const;
  [[nodiscard]] std::size_t count(const std::string& key) const;
  [[nodiscard]] std::uint64_t u64(const std::string& key) const;
  [[nodiscard]] bool flag(const std::string& key) const;
  /// True when the value is `auto` (derived from other keys).
  [[nodiscard]] bool is_auto(const std::string& key) const;

 private:
  std::vector<KeySpec> keys_;
  std::map<std::string, std::string> values_;
};

/// Strict full-string number parsing; throw ConfigError with `what` on failure.
[[nodiscard]] double parse_real(std::string_view text, std::string_view what);
[[nodiscard]] std::uint64_t parse_u64(std::string_view text, std::string_view what);
[[nodiscard]] std::vector<std::string> split_list(std::string_view text, char sep = ',');

/// `--p-spread` for `p_spread`.
[[nodiscard]] std::string flag_name(std::string_view key);

}  // namespace dbclock::cli
