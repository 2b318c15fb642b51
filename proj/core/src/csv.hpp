#pragma once

// Minimal CSV reader/writer shared by the manifest and feature formats.
// Supports double-quoted fields with "" escapes; no embedded newlines.

#include <string>
#include <string_view>
#include <vector>

namespace vra::csv {

struct Line {
  std::size_t number;  // 1-based
  std::vector<std::string> fields;
};

/// Splits text into non-blank lines of fields. Handles CRLF and a UTF-8 BOM.
/// Throws ParseError on an unterminated quote.
std::vector<Line> parse(std::string_view text, const std::string& source);

/// Quotes a field only when it contains a comma, quote, or surrounding space.
std::string escape(std::string_view field);

void append_row(std::string& out, const std::vector<std::string>& fields);

/// Parses a full-field double; std::from_chars semantics (no locale).
bool to_double(std::string_view text, double& out) noexcept;
bool to_int(std::string_view text, int& out) noexcept;

}  // namespace vra::csv
