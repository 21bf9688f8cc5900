#include "tla/xml.hpp"

#include <cstdint>

namespace tla::xml {

ParseError::ParseError(const std::string& message, int line, int column)
    : std::runtime_error("line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

constexpr int kMaxDepth = 128;

bool is_name_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == ':' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Parser {
 public:
  explicit Parser(std::string_view doc) : doc_(doc) {}

  Element document() {
    if (doc_.substr(0, 3) == "\xEF\xBB\xBF") advance(3);
    misc();
    if (eof() || peek() != '<') fail("expected root element");
    Element root = element(0);
    misc();
    if (!eof()) fail("content after root element");
    return root;
  }

 private:
  std::string_view doc_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

  bool eof() const { return pos_ >= doc_.size(); }
  char peek() const { return doc_[pos_]; }
  bool starts_with(std::string_view s) const { return doc_.substr(pos_, s.size()) == s; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < doc_.size(); ++i) {
      if (doc_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void expect(std::string_view s) {
    if (!starts_with(s)) fail("expected '" + std::string(s) + "'");
    advance(s.size());
  }

  void skip_space() {
    while (!eof() && is_space(peek())) advance();
  }

  // Skips until `terminator` and consumes it.
  void skip_until(std::string_view terminator, const char* what) {
    while (!eof() && !starts_with(terminator)) advance();
    if (eof()) fail(std::string("unterminated ") + what);
    advance(terminator.size());
  }

  std::string_view take_until(std::string_view terminator, const char* what) {
    const std::size_t start = pos_;
    while (!eof() && !starts_with(terminator)) advance();
    if (eof()) fail(std::string("unterminated ") + what);
    const std::string_view out = doc_.substr(start, pos_ - start);
    advance(terminator.size());
    return out;
  }

  // Whitespace, comments and processing instructions outside the root.
  void misc() {
    for (;;) {
      skip_space();
      if (starts_with("<!--")) {
        comment();
      } else if (starts_with("<?")) {
        advance(2);
        skip_until("?>", "processing instruction");
      } else if (starts_with("<!DOCTYPE")) {
        fail("DOCTYPE is not supported");
      } else {
        return;
      }
    }
  }

  void comment() {
    advance(4);
    skip_until("-->", "comment");
  }

  std::string name() {
    if (eof() || !is_name_start(peek())) fail("expected a name");
    const std::size_t start = pos_;
    while (!eof() && is_name_char(peek())) advance();
    return std::string(doc_.substr(start, pos_ - start));
  }

  void entity(std::string& out) {
    advance();  // '&'
    const std::size_t start = pos_;
    while (!eof() && peek() != ';' && pos_ - start < 12) advance();
    if (eof() || peek() != ';') fail("unterminated entity reference");
    const std::string_view ref = doc_.substr(start, pos_ - start);
    advance();
    if (ref == "lt") out += '<';
    else if (ref == "gt") out += '>';
    else if (ref == "amp") out += '&';
    else if (ref == "quot") out += '"';
    else if (ref == "apos") out += '\'';
    else if (ref.size() > 1 && ref[0] == '#') {
      std::uint32_t cp = 0;
      const bool hex = ref[1] == 'x';
      const std::string_view digits = ref.substr(hex ? 2 : 1);
      if (digits.empty()) fail("empty character reference");
      for (char c : digits) {
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (hex && c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else fail("invalid character reference");
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
        if (cp > 0x10FFFF) fail("character reference out of range");
      }
      if (cp == 0) fail("character reference out of range");
      append_utf8(out, cp);
    } else {
      fail("unknown entity '&" + std::string(ref) + ";'");
    }
  }

  std::string attribute_value() {
    if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
    const char quote = peek();
    advance();
    std::string out;
    while (!eof() && peek() != quote) {
      if (peek() == '<') fail("'<' in attribute value");
      if (peek() == '&') entity(out);
      else {
        out += peek();
        advance();
      }
    }
    if (eof()) fail("unterminated attribute value");
    advance();
    return out;
  }

  Element element(int depth) {
    if (depth >= kMaxDepth) fail("elements nested too deeply");
    Element el;
    el.line = line_;
    expect("<");
    el.name = name();
    for (;;) {
      const bool had_space = !eof() && is_space(peek());
      skip_space();
      if (eof()) fail("unterminated start tag");
      if (starts_with("/>")) {
        advance(2);
        return el;
      }
      if (peek() == '>') {
        advance();
        break;
      }
      if (!had_space) fail("expected whitespace before attribute");
      std::string key = name();
      skip_space();
      expect("=");
      skip_space();
      for (const auto& [k, _] : el.attributes) {
        if (k == key) fail("duplicate attribute '" + key + "'");
      }
      el.attributes.emplace_back(std::move(key), attribute_value());
    }

    for (;;) {
      if (eof()) fail("unterminated element <" + el.name + ">");
      if (starts_with("</")) {
        advance(2);
        const std::string closing = name();
        if (closing != el.name) {
          fail("mismatched closing tag </" + closing + ">, expected </" + el.name + ">");
        }
        skip_space();
        expect(">");
        return el;
      }
      if (starts_with("<!--")) {
        comment();
      } else if (starts_with("<![CDATA[")) {
        advance(9);
        el.text += take_until("]]>", "CDATA section");
      } else if (starts_with("<?")) {
        advance(2);
        skip_until("?>", "processing instruction");
      } else if (starts_with("<!")) {
        fail("unsupported markup declaration");
      } else if (peek() == '<') {
        el.children.push_back(element(depth + 1));
      } else if (peek() == '&') {
        entity(el.text);
      } else {
        el.text += peek();
        advance();
      }
    }
  }
};

}  // namespace

Element parse(std::string_view document) { return Parser(document).document(); }

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace tla::xml
