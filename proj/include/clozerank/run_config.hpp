#pragma once

#include <map>
#include <string>
#include <vector>

namespace clozerank {

/// Flat key=value run configuration. Precedence when assembling:
/// command-line flag > CLOZERANK_* environment variable > config file >
/// built-in default. The effective mapping is echoed into every output's
/// header.
class RunConfig {
 public:
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string str(const std::string& key, const std::string& def = "") const;
  long integer(const std::string& key, long def) const;
  double real(const std::string& key, double def) const;
  bool flag(const std::string& key, bool def) const;  // on/off, true/false, 1/0

  /// param.<name> entries as a numeric hyperparameter map.
  std::map<std::string, double> hyperparams() const;

  /// "# key = value" lines, sorted by key.
  std::string echo_header() const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

  /// key = value lines; '#' comments and blank lines ignored.
  static std::map<std::string, std::string> parse_file(const std::string& path);

  /// CLOZERANK_<KEY> with '.', '-' mapped to '_', upper-cased.
  static std::string env_name(const std::string& key);

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace clozerank
