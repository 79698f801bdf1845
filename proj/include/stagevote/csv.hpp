#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "stagevote/errors.hpp"

namespace stagevote::csv {

// Splits one CSV record. Supports RFC 4180 quoting ("" escapes a quote inside a
// quoted field); unquoted cells are trimmed of surrounding blanks.
inline std::vector<std::string> split_record(std::string_view line, std::size_t line_no) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  bool was_quoted = false;
  std::size_t i = 0;

  auto finish = [&] {
    if (!was_quoted) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      cell = b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1);
    }
    cells.push_back(std::move(cell));
    cell.clear();
    was_quoted = false;
  };

  while (i < line.size()) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      if (cell.find_first_not_of(" \t") != std::string::npos || was_quoted)
        throw ParseError(line_no, "stray quote inside unquoted cell");
      cell.clear();
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      finish();
    } else {
      if (was_quoted && c != ' ' && c != '\t')
        throw ParseError(line_no, "text after closing quote");
      if (!was_quoted) cell.push_back(c);
    }
    ++i;
  }
  if (quoted) throw ParseError(line_no, "unterminated quoted cell");
  finish();
  return cells;
}

// Quotes a cell only when it needs it.
inline std::string escape(std::string_view cell) {
  if (cell.find_first_of(",\"\r\n") == std::string_view::npos &&
      (cell.empty() || (cell.front() != ' ' && cell.back() != ' ')))
    return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace stagevote::csv
