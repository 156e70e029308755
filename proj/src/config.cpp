#include "magscatter/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace magscatter {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    cfg.set(key, value);
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
  return out.str();
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  auto it = index_.find(key);
  if (it != index_.end()) {
    entries_[it->second].second = value;
    return;
  }
  index_[key] = entries_.size();
  entries_.emplace_back(key, value);
}

bool ExperimentConfig::has(const std::string& key) const {
  return index_.count(key) > 0;
}

const std::string& ExperimentConfig::raw(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end())
    throw ConfigError("missing required key '" + key + "'");
  return entries_[it->second].second;
}

std::string ExperimentConfig::get_string(const std::string& key) const {
  return raw(key);
}

std::string ExperimentConfig::get_string_or(const std::string& key,
                                            const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

double ExperimentConfig::get_double(const std::string& key) const {
  const std::string& v = raw(key);
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse '" + v + "' as number");
  }
}

double ExperimentConfig::get_double_or(const std::string& key,
                                       double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int ExperimentConfig::get_int(const std::string& key) const {
  const double d = get_double(key);
  if (d != std::floor(d))
    throw ConfigError("key '" + key + "': expected an integer");
  return static_cast<int>(d);
}

int ExperimentConfig::get_int_or(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool ExperimentConfig::get_bool_or(const std::string& key,
                                   bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = raw(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key '" + key + "': expected true/false");
}

std::vector<std::string> ExperimentConfig::get_strings(
    const std::string& key) const {
  const std::string& v = raw(key);
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  if (out.empty())
    throw ConfigError("key '" + key + "': expected a comma-separated list");
  return out;
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_strings(key)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': cannot parse '" + item +
                        "' as number");
    }
  }
  return out;
}

std::vector<double> times_from_config(const ExperimentConfig& cfg,
                                      const std::string& prefix) {
  const double start = cfg.get_double(prefix + ".start");
  const double stop = cfg.get_double(prefix + ".stop");
  const int count = cfg.get_int(prefix + ".count");
  const std::string spacing = cfg.get_string_or(prefix + ".spacing", "log");
  if (count < 2)
    throw ConfigError("key '" + prefix + ".count': need at least 2 samples");
  if (!(stop > start))
    throw ConfigError("key '" + prefix + ".stop': must exceed " + prefix +
                      ".start");
  std::vector<double> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / (count - 1);
    if (spacing == "log") {
      if (!(start > 0.0))
        throw ConfigError("key '" + prefix +
                          ".spacing': log spacing needs positive start");
      out.push_back(start * std::pow(stop / start, f));
    } else if (spacing == "linear") {
      out.push_back(start + (stop - start) * f);
    } else {
      throw ConfigError("key '" + prefix + ".spacing': expected log|linear");
    }
  }
  out.back() = stop;
  return out;
}

}  // namespace magscatter
