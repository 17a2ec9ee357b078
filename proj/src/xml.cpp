#include "xml.hpp"

#include <cstdint>

#include "stackrepair/error.hpp"

namespace stackrepair::xml {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '-' || c == '.' || c == ':' || static_cast<unsigned char>(c) >= 0x80;
}

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
  explicit Parser(std::string_view text) : text_(text) {}

  Element document() {
    // A UTF-8 byte order mark is tolerated.
    if (text_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
    skip_misc();
    if (at_end() || peek() != '<') fail("expected root element");
    Element root = element();
    skip_misc();
    if (!at_end()) fail("content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::malformed_xml, what + " at offset " + std::to_string(pos_));
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  bool starts_with(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }

  void skip_space() {
    while (!at_end() && is_space(peek())) ++pos_;
  }

  void skip_until(std::string_view terminator) {
    auto end = text_.find(terminator, pos_);
    if (end == std::string_view::npos) fail("unterminated construct");
    pos_ = end + terminator.size();
  }

  // Whitespace, comments, processing instructions and doctype outside elements.
  void skip_misc() {
    for (;;) {
      skip_space();
      if (starts_with("<?")) {
        skip_until("?>");
      } else if (starts_with("<!--")) {
        skip_until("-->");
      } else if (starts_with("<!DOCTYPE")) {
        skip_until(">");
      } else {
        return;
      }
    }
  }

  std::string name() {
    std::size_t start = pos_;
    while (!at_end() && is_name_char(peek())) ++pos_;
    if (start == pos_) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string decode_entities(std::string_view s) const {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '<') fail("'<' inside attribute value");
      if (s[i] != '&') {
        out += s[i];
        continue;
      }
      auto semi = s.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated entity");
      auto ent = s.substr(i + 1, semi - i - 1);
      if (ent == "amp") {
        out += '&';
      } else if (ent == "lt") {
        out += '<';
      } else if (ent == "gt") {
        out += '>';
      } else if (ent == "quot") {
        out += '"';
      } else if (ent == "apos") {
        out += '\'';
      } else if (ent.size() > 1 && ent[0] == '#') {
        std::uint32_t cp = 0;
        bool hex = ent[1] == 'x' || ent[1] == 'X';
        auto digits = ent.substr(hex ? 2 : 1);
        if (digits.empty()) fail("empty character reference");
        for (char c : digits) {
          int d;
          if (c >= '0' && c <= '9') {
            d = c - '0';
          } else if (hex && c >= 'a' && c <= 'f') {
            d = c - 'a' + 10;
          } else if (hex && c >= 'A' && c <= 'F') {
            d = c - 'A' + 10;
          } else {
            fail("bad character reference");
          }
          cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
          if (cp > 0x10FFFF) fail("character reference out of range");
        }
        append_utf8(out, cp);
      } else {
        fail("unknown entity &" + std::string(ent) + ";");
      }
      i = semi;
    }
    return out;
  }

  Element element() {
    std::size_t start = pos_;
    ++pos_;  // '<'
    Element el;
    el.name = name();
    for (;;) {
      skip_space();
      if (at_end()) fail("unterminated start tag");
      if (starts_with("/>")) {
        pos_ += 2;
        el.raw = std::string(text_.substr(start, pos_ - start));
        return el;
      }
      if (peek() == '>') {
        ++pos_;
        break;
      }
      std::string key = name();
      skip_space();
      if (at_end() || peek() != '=') fail("expected '=' after attribute " + key);
      ++pos_;
      skip_space();
      if (at_end() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
      char quote = peek();
      ++pos_;
      auto end = text_.find(quote, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      std::string value = decode_entities(text_.substr(pos_, end - pos_));
      pos_ = end + 1;
      for (const auto& [k, v] : el.attributes) {
        if (k == key) fail("duplicate attribute " + key);
      }
      el.attributes.emplace_back(std::move(key), std::move(value));
    }
    // Content.
    for (;;) {
      if (at_end()) fail("unterminated element <" + el.name + ">");
      if (starts_with("</")) {
        pos_ += 2;
        std::string closing = name();
        if (closing != el.name) fail("mismatched closing tag </" + closing + "> for <" + el.name + ">");
        skip_space();
        if (at_end() || peek() != '>') fail("malformed closing tag");
        ++pos_;
        el.raw = std::string(text_.substr(start, pos_ - start));
        return el;
      }
      if (starts_with("<!--")) {
        skip_until("-->");
      } else if (starts_with("<![CDATA[")) {
        skip_until("]]>");
      } else if (starts_with("<?")) {
        skip_until("?>");
      } else if (peek() == '<') {
        el.children.push_back(element());
      } else {
        // Character data is not interpreted by the level format.
        auto next = text_.find('<', pos_);
        pos_ = next == std::string_view::npos ? text_.size() : next;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

const std::string* Element::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return &v;
  }
  return nullptr;
}

Element parse_document(std::string_view text) { return Parser(text).document(); }

std::string escape_attribute(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (char c : value) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace stackrepair::xml
