#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stackrepair::xml {

// Minimal DOM for the level format. Each element remembers the exact source
// text it was parsed from so uninterpreted elements can be re-emitted as-is.
struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::string raw;

  [[nodiscard]] const std::string* attribute(std::string_view key) const;
};

/// Parses a document and returns its root element. Throws Error(malformed_xml).
Element parse_document(std::string_view text);

std::string escape_attribute(std::string_view value);

}  // namespace stackrepair::xml
