#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qcrsim {

// One `key = value` line. Keys under a `[section]` header are returned as
// `section.key`.
struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

// Parses `key = value` lines with `#` comments and optional `[section]`
// headers. Throws ParseError on malformed lines.
std::vector<KeyValue> parse_key_values(std::string_view text, const std::string& source = "<input>");

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

double parse_double(const std::string& text);
long long parse_integer(const std::string& text);
bool parse_bool(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);
std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

// Shortest decimal that parses back to the same double.
std::string format_exact(double value);

std::string read_file(const std::string& path);

}  // namespace qcrsim
