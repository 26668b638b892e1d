#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "virtree/error.hpp"

namespace virtree::xml {

/// Raised on malformed input; carries the 1-based source position.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line, int col);
    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

struct Attr {
    std::string name;
    std::string value;
    int line = 0;
    int col = 0;
};

/// Element tree for the restricted dialect used by model and definition
/// files: elements and attributes only. Comments and the XML declaration
/// are skipped; namespaces, DOCTYPE, CDATA and mixed text content are
/// rejected.
struct Element {
    std::string name;
    std::vector<Attr> attributes;
    std::vector<Element> children;
    int line = 0;
    int col = 0;

    const std::string* find_attr(std::string_view name) const;
};

/// Parses a whole document and returns its single root element.
Element parse_document(std::string_view text);

/// Escapes an attribute value for double-quoted emission. Control
/// characters that XML attribute parsing would normalize away (tab,
/// newline, carriage return) are emitted as numeric references so the
/// canonical form survives a reload byte-exactly.
std::string escape_attr(std::string_view value);

} // namespace virtree::xml
