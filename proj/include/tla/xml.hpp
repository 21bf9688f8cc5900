#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tla::xml {

/// Malformed input. Carries the 1-based line and column of the offending byte.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  // concatenated character data, entities decoded
  std::vector<Element> children;
  int line = 0;
};

/// Parses a single-rooted document: elements, attributes, character data,
/// the five predefined entities plus numeric references, comments, CDATA and
/// processing instructions. DOCTYPE declarations are rejected.
Element parse(std::string_view document);

std::string escape(std::string_view text);

}  // namespace tla::xml
