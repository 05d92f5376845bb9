#pragma once

#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coan/model.hpp"

namespace coan {

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines) into views.
/// Views stay valid until the next call to split() or until the line dies.
class CsvSplitter {
 public:
  const std::vector<std::string_view>& split(std::string_view line);
  const std::vector<std::string_view>& fields() const { return fields_; }

 private:
  std::vector<std::string_view> fields_;
  std::deque<std::string> unquoted_;
};

std::string csv_escape(std::string_view field);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);
void append_double(std::string& out, double v);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

std::string_view trim(std::string_view s);

/// Integer epoch seconds (fraction truncated) or ISO-8601
/// `YYYY-MM-DD[T ]HH:MM:SS[.fff][Z|+HH:MM|-HH:MM]`.
std::optional<Timestamp> parse_timestamp(std::string_view s);
std::string format_iso8601(Timestamp t);

/// First second of the UTC calendar month containing t, and of the month after it.
Timestamp month_floor(Timestamp t);
Timestamp next_month(Timestamp month_start);

/// Flat `key = value` file; `#` starts a comment, surrounding quotes on values are removed.
std::map<std::string, std::string> read_flat_config(std::istream& in);
std::map<std::string, std::string> read_flat_config_file(const std::string& path);

/// Reads a whole line, stripping a trailing '\r'.
bool read_line(std::istream& in, std::string& line);

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::string& path);

}  // namespace coan
