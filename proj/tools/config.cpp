#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace dbclock::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::map<std::string, std::string> parse_flat_config(std::string_view text,
                                                     std::string_view origin) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected `key = value`", origin, line_no));
    }
    const auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", origin, line_no));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (!out.emplace(std::string(key), std::string(value)).second) {
      throw ConfigError(fmt::format("{}:{}: duplicate key `{}`", origin, line_no, key));
    }
  }
  return out;
}

std::map<std::string, std::string> load_flat_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read config file `{}`", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_flat_config(buf.str(), path);
}

RunConfig::RunConfig(std::vector<KeySpec> keys) : keys_(std::move(keys)) {
  for (const auto& k : keys_) values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string& key, std::string value, std::string_view origin) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(fmt::format("{}: unknown key `{}`", origin, key));
  it->second = std::move(value);
}

void RunConfig::merge(const std::map<std::string, std::string>& values, std::string_view origin) {
  for (const auto& [k, v] : values) set(k, v, origin);
}

const std::string& RunConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::logic_error("undeclared key " + key);
  return it->second;
}

double RunConfig::real(const std::string& key) const { return parse_real(str(key), key); }

std::size_t RunConfig::count(const std::string& key) const {
  return static_cast<std::size_t>(parse_u64(str(key), key));
}

std::uint64_t RunConfig::u64(const std::string& key) const { return parse_u64(str(key), key); }

bool RunConfig::flag(const std::string& key) const {
  const auto& v = str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(fmt::format("`{}`: expected true or false, got `{}`", key, v));
}

bool RunConfig::is_auto(const std::string& key) const { return str(key) == "auto"; }

double parse_real(std::string_view text, std::string_view what) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v)) {
    throw ConfigError(fmt::format("`{}`: expected a number, got `{}`", what, text));
  }
  return v;
}

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(fmt::format("`{}`: expected a non-negative integer, got `{}`", what, text));
  }
  return v;
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  while (true) {
    const auto pos = text.find(sep);
    out.emplace_back(trim(text.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    text = text.substr(pos + 1);
  }
  return out;
}

std::string flag_name(std::string_view key) {
  std::string out = "--";
  out += key;
  std::replace(out.begin() + 2, out.end(), '_', '-');
  return out;
}

}  // namespace dbclock::cli
