#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "trapsift/error.hpp"

namespace trapsift::csv {

using Row = std::vector<std::string>;

/// Shortest decimal form that parses back to the same double; "inf"/"-inf"/"nan" for non-finite.
inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_real(const std::string& s, const std::string& what) {
    if (s == "inf" || s == "+inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError(what + ": not a number: '" + s + "'");
    return v;
}

inline std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string format_row(const Row& row) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) line += ',';
        line += escape(row[i]);
    }
    line += '\n';
    return line;
}

/// RFC 4180 reader. Accepts LF or CRLF line ends; blank lines are skipped.
inline std::vector<Row> parse(std::string_view text) {
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t quote_line = 0;

    auto end_row = [&] {
        if (field_started || !row.empty()) {
            row.push_back(std::move(field));
            rows.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        field_started = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty()) throw ParseError("unexpected quote inside unquoted field", line, 0);
            in_quotes = true;
            quote_line = line;
            field_started = true;
            break;
        case ',':
            row.push_back(std::move(field));
            field.clear();
            field_started = true;
            break;
        case '\r':
            break;
        case '\n':
            end_row();
            ++line;
            break;
        default:
            field += c;
            field_started = true;
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted field", quote_line, 0);
    end_row();
    return rows;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<Row> read_file(const std::filesystem::path& path) { return parse(read_text(path)); }

inline void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
    if (!out) throw ConfigError("write failed: " + path.string());
}

/// Checks that the first row matches `header` exactly and returns the data rows.
inline std::vector<Row> expect_header(std::vector<Row> rows, const Row& header, const std::string& what) {
    if (rows.empty() || rows.front() != header) {
        std::string expected;
        for (auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        throw ParseError(what + ": expected header '" + expected + "'", 1, 1);
    }
    rows.erase(rows.begin());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != header.size())
            throw ParseError(what + ": expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(rows[i].size()),
                             i + 2, 1);
    }
    return rows;
}

} // namespace trapsift::csv
