#include "ssq/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ssq/csv.hpp"

namespace ssq {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw std::invalid_argument("config key '" + key + "' has unusable value '" + value + "'");
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file '" + path + "'");
  }
  KeyValueConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    const std::string stripped = trim(line);
    if (stripped.empty()) {
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line is not key=value", line_no);
    }
    const std::string key = trim(stripped.substr(0, eq));
    if (key.empty()) {
      throw ParseError("config line has empty key", line_no);
    }
    cfg.set(key, trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueConfig::get_str(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    return fallback;
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(it->second, &used);
  } catch (const std::exception&) {
    bad_value(key, it->second);
  }
  if (used != it->second.size()) {
    bad_value(key, it->second);
  }
  return value;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    return fallback;
  }
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(it->second, &used);
  } catch (const std::exception&) {
    bad_value(key, it->second);
  }
  if (used != it->second.size()) {
    bad_value(key, it->second);
  }
  return value;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    return fallback;
  }
  std::size_t used = 0;
  std::uint64_t value = 0;
  try {
    value = std::stoull(it->second, &used);
  } catch (const std::exception&) {
    bad_value(key, it->second);
  }
  if (used != it->second.size()) {
    bad_value(key, it->second);
  }
  return value;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    return fallback;
  }
  if (it->second == "true" || it->second == "1") {
    return true;
  }
  if (it->second == "false" || it->second == "0") {
    return false;
  }
  bad_value(key, it->second);
}

std::vector<double> KeyValueConfig::get_double_list(
    const std::string& key, const std::vector<double>& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    return fallback;
  }
  std::vector<double> values;
  std::stringstream ss(it->second);
  std::string token;
  while (std::getline(ss, token, ',')) {
    token = trim(token);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      bad_value(key, it->second);
    }
    if (used != token.size()) {
      bad_value(key, it->second);
    }
    values.push_back(value);
  }
  if (values.empty()) {
    bad_value(key, it->second);
  }
  return values;
}

std::vector<std::string> KeyValueConfig::get_str_list(
    const std::string& key, const std::vector<std::string>& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    return fallback;
  }
  std::vector<std::string> values;
  std::stringstream ss(it->second);
  std::string token;
  while (std::getline(ss, token, ',')) {
    values.push_back(trim(token));
  }
  if (values.empty()) {
    bad_value(key, it->second);
  }
  return values;
}

std::string KeyValueConfig::serialize() const {
  std::string out;
  for (const auto& [key, value] : entries_) {
    out += key + "=" + value + "\n";
  }
  return out;
}

}  // namespace ssq
