#include "quant/csv.hpp"

#include <fstream>
#include <sstream>

#include "quant/common.hpp"

namespace quant::csv {

std::vector<std::string> parse_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else if (c == '\r') {
            // swallow CR of CRLF endings
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::vector<std::vector<std::string>> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<std::vector<std::string>> records;
    std::string line, pending;
    while (std::getline(in, line)) {
        if (!pending.empty()) pending += "\n";
        pending += line;
        // a record is complete when it contains an even number of quotes
        std::size_t quotes = 0;
        for (char c : pending)
            if (c == '"') ++quotes;
        if (quotes % 2 == 0) {
            records.push_back(parse_line(pending));
            pending.clear();
        }
    }
    if (!pending.empty()) records.push_back(parse_line(pending));
    return records;
}

std::string escape(const std::string& field) {
    const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join(const std::vector<std::string>& fields) {
    std::ostringstream os;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) os << ',';
        os << escape(fields[i]);
    }
    return os.str();
}

} // namespace quant::csv
