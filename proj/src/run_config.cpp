#include "clozerank/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "clozerank/error.hpp"
#include "clozerank/text_util.hpp"

namespace clozerank {

void RunConfig::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

bool RunConfig::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string RunConfig::str(const std::string& key, const std::string& def) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

long RunConfig::integer(const std::string& key, long def) const {
  auto it = kv_.find(key);
  if (it == kv_.end() || it->second.empty()) return def;
  try {
    return std::stol(it->second);
  } catch (...) {
    raise(Errc::config_error, key + " must be an integer, got '" + it->second + "'");
  }
}

double RunConfig::real(const std::string& key, double def) const {
  auto it = kv_.find(key);
  if (it == kv_.end() || it->second.empty()) return def;
  try {
    return std::stod(it->second);
  } catch (...) {
    raise(Errc::config_error, key + " must be a number, got '" + it->second + "'");
  }
}

bool RunConfig::flag(const std::string& key, bool def) const {
  auto it = kv_.find(key);
  if (it == kv_.end() || it->second.empty()) return def;
  const std::string v = lowercase(it->second);
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  raise(Errc::config_error, key + " must be on/off, got '" + it->second + "'");
}

std::map<std::string, double> RunConfig::hyperparams() const {
  std::map<std::string, double> out;
  for (const auto& [k, v] : kv_) {
    if (k.rfind("param.", 0) != 0) continue;
    try {
      out[k.substr(6)] = std::stod(v);
    } catch (...) {
      raise(Errc::config_error, k + " must be numeric, got '" + v + "'");
    }
  }
  return out;
}

std::string RunConfig::echo_header() const {
  std::ostringstream out;
  for (const auto& [k, v] : kv_)
    if (!v.empty()) out << "# " << k << " = " << v << "\n";
  return out.str();
}

std::map<std::string, std::string> RunConfig::parse_file(const std::string& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(read_file(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      raise(Errc::config_error,
            path + ":" + std::to_string(lineno) + ": expected key = value");
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

std::string RunConfig::env_name(const std::string& key) {
  std::string out = "CLOZERANK_";
  for (char c : key) {
    if (c == '.' || c == '-')
      out.push_back('_');
    else
      out.push_back((char)std::toupper((unsigned char)c));
  }
  return out;
}

}  // namespace clozerank
