#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "trapsift/csv.hpp"
#include "trapsift/error.hpp"

namespace trapsift {

using Json = nlohmann::ordered_json;

namespace detail {

struct TextPosition {
    std::size_t line = 1;
    std::size_t column = 1;
};

inline TextPosition position_of(std::string_view text, std::size_t byte_offset) {
    TextPosition pos;
    const std::size_t end = std::min(byte_offset, text.size());
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++pos.line;
            pos.column = 1;
        } else {
            ++pos.column;
        }
    }
    return pos;
}

} // namespace detail

/// Parses JSON, converting library errors into ParseError with a line/column.
/// `line_offset` shifts reported lines when `text` is one line of a larger file.
inline Json parse_json(std::string_view text, const std::string& what, std::size_t line_offset = 0) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // nlohmann reports the 1-based byte index of the offending character.
        const auto pos = detail::position_of(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(what + ": malformed JSON", pos.line + line_offset, pos.column);
    }
}

inline Json read_json_file(const std::filesystem::path& path) {
    return parse_json(csv::read_text(path), path.string());
}

/// Writes `j` with two-space indent and a trailing newline. Output is byte-stable for equal input.
inline void write_json_file(const std::filesystem::path& path, const Json& j) {
    csv::write_text(path, j.dump(2) + "\n");
}

} // namespace trapsift
