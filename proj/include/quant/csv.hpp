#pragma once

#include <string>
#include <vector>

namespace quant::csv {

/// Parses one RFC-4180 record (handles quoted fields, doubled quotes and
/// embedded separators). The record must already be a full logical line.
std::vector<std::string> parse_line(const std::string& line);

/// Reads a whole file into records; quoted fields may span physical lines.
std::vector<std::vector<std::string>> read_file(const std::string& path);

/// Quotes a field if needed per RFC 4180.
std::string escape(const std::string& field);

std::string join(const std::vector<std::string>& fields);

} // namespace quant::csv
