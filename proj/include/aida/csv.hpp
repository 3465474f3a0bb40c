#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "aida/errors.hpp"

namespace aida {

// Minimal CSV support: comma-separated, mandatory header, '.' decimal point,
// UTF-8 passed through verbatim, no quoting/escaping.
namespace csv {

inline std::vector<std::string> split_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.emplace_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

// Parse a whole file into rows of cells. Throws DataError on an empty file.
inline std::vector<std::vector<std::string>> read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
        rows.push_back(split_line(line));
    }
    if (rows.empty()) throw DataError("empty file: " + path);
    return rows;
}

// Shortest decimal form that re-parses to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view cell, std::size_t row, std::size_t col) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw DataError("unparsable numeric cell '" + std::string(cell) + "' at row " +
                        std::to_string(row) + ", column " + std::to_string(col));
    return v;
}

template <typename... Parts>
inline void write_row(std::ostream& os, const Parts&... parts) {
    bool first = true;
    ((os << (first ? "" : ",") << parts, first = false), ...);
    os << '\n';
}

}  // namespace csv

}  // namespace aida
