#pragma once

#include <string>
#include <vector>

namespace clozerank {

std::vector<std::string> split_whitespace(const std::string& line);
std::vector<std::string> split_char(const std::string& s, char sep);
std::string join(const std::vector<std::string>& parts, const std::string& sep);
std::string trim(const std::string& s);
bool is_blank(const std::string& s);
std::string lowercase(const std::string& s);

/// Whole file as a string; throws Errc::io_error if unreadable.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// printf-style "%.6g" (the on-disk feature value format).
std::string format_g6(double v);
/// Round-trippable double formatting ("%.17g") for model files.
std::string format_exact(double v);

}  // namespace clozerank
