#include "mslam/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mslam/errors.hpp"

namespace mslam {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("config: cannot open " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str());
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  KeyValueConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config: missing '=' at line " +
                       std::to_string(line_no));
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ParseError("config: empty key at line " + std::to_string(line_no));
    }
    config.values_[key] = value;
  }
  return config;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  read_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
  read_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t consumed = 0;
    const double v = std::stod(it->second, &consumed);
    if (consumed != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ParseError("config: key '" + key + "' is not a number: " +
                     it->second);
  }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  read_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t consumed = 0;
    const int v = std::stoi(it->second, &consumed);
    if (consumed != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ParseError("config: key '" + key + "' is not an integer: " +
                     it->second);
  }
}

std::uint64_t KeyValueConfig::get_uint64(const std::string& key,
                                         std::uint64_t fallback) const {
  read_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t consumed = 0;
    const std::uint64_t v = std::stoull(it->second, &consumed);
    if (consumed != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ParseError("config: key '" + key + "' is not an unsigned integer: " +
                     it->second);
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  read_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ParseError("config: key '" + key + "' is not a boolean: " +
                   it->second);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::vector<std::string> KeyValueConfig::unread_keys() const {
  std::vector<std::string> unread;
  for (const auto& [key, value] : values_) {
    if (!read_.count(key)) unread.push_back(key);
  }
  return unread;
}

void KeyValueConfig::throw_on_unread() const {
  const auto unread = unread_keys();
  if (unread.empty()) return;
  std::string message = "config: unknown key(s):";
  for (const auto& key : unread) message += " " + key;
  throw InvalidArgumentError(message);
}

}  // namespace mslam
