#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "magscatter/errors.hpp"

namespace magscatter {

// Flat key-value experiment document with dotted sections:
//   experiment = wave-decay
//   grid.n = 48
//   decay.norms = inf, 2, 4
// '#' starts a comment; keys keep file order for round-tripping.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);

  std::string serialize() const;

  bool has(const std::string& key) const;
  const std::string& raw(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key,
                            const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int_or(const std::string& key, int fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  void set(const std::string& key, const std::string& value);

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  bool operator==(const ExperimentConfig& other) const {
    return entries_ == other.entries_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t> index_;
};

// Times from the `prefix.{start,stop,count,spacing}` keys
// (spacing = linear | log).
std::vector<double> times_from_config(const ExperimentConfig& cfg,
                                      const std::string& prefix);

}  // namespace magscatter
