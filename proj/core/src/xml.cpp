#include "virtree/xml.hpp"

#include <cctype>
#include <sstream>

namespace virtree::xml {

namespace {

std::string location_msg(const std::string& msg, int line, int col) {
    std::ostringstream out;
    out << "XML error at " << line << ":" << col << ": " << msg;
    return out.str();
}

struct Cursor {
    std::string_view text;
    size_t pos = 0;
    int line = 1;
    int col = 1;

    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }

    bool starts_with(std::string_view s) const {
        return text.compare(pos, s.size(), s) == 0;
    }

    char advance() {
        char c = text[pos++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }

    void skip(size_t n) {
        for (size_t i = 0; i < n && !eof(); ++i) advance();
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(location_msg(msg, line, col), line, col);
    }
};

bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

void skip_ws(Cursor& c) {
    while (!c.eof() && std::isspace(static_cast<unsigned char>(c.peek()))) c.advance();
}

// Skips whitespace, comments and the XML declaration between markup.
void skip_misc(Cursor& c) {
    for (;;) {
        skip_ws(c);
        if (c.starts_with("<!--")) {
            c.skip(4);
            while (!c.eof() && !c.starts_with("-->")) c.advance();
            if (c.eof()) c.fail("unterminated comment");
            c.skip(3);
        } else if (c.starts_with("<?")) {
            c.skip(2);
            while (!c.eof() && !c.starts_with("?>")) c.advance();
            if (c.eof()) c.fail("unterminated processing instruction");
            c.skip(2);
        } else {
            return;
        }
    }
}

std::string parse_name(Cursor& c) {
    if (c.eof() || !is_name_start(c.peek())) c.fail("expected a name");
    std::string name;
    while (!c.eof() && is_name_char(c.peek())) name.push_back(c.advance());
    if (!c.eof() && c.peek() == ':') c.fail("namespaces are not supported");
    return name;
}

void parse_entity(Cursor& c, std::string& out) {
    // cursor sits on '&'
    int line = c.line, col = c.col;
    c.advance();
    std::string ent;
    while (!c.eof() && c.peek() != ';' && ent.size() < 8) ent.push_back(c.advance());
    if (c.eof() || c.peek() != ';')
        throw ParseError(location_msg("unterminated entity reference", line, col), line, col);
    c.advance();
    if (ent == "amp") out.push_back('&');
    else if (ent == "lt") out.push_back('<');
    else if (ent == "gt") out.push_back('>');
    else if (ent == "quot") out.push_back('"');
    else if (ent == "apos") out.push_back('\'');
    else if (ent.size() > 1 && ent[0] == '#') {
        int code;
        try {
            code = (ent[1] == 'x' || ent[1] == 'X')
                       ? std::stoi(ent.substr(2), nullptr, 16)
                       : std::stoi(ent.substr(1), nullptr, 10);
        } catch (const std::exception&) {
            throw ParseError(location_msg("bad character reference '&" + ent + ";'", line, col), line, col);
        }
        if (code <= 0 || code > 0x10FFFF)
            throw ParseError(location_msg("character reference out of range", line, col), line, col);
        // encode as UTF-8
        unsigned cp = static_cast<unsigned>(code);
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    } else {
        throw ParseError(location_msg("unknown entity '&" + ent + ";'", line, col), line, col);
    }
}

std::string parse_attr_value(Cursor& c) {
    if (c.eof() || (c.peek() != '"' && c.peek() != '\'')) c.fail("expected quoted attribute value");
    char quote = c.advance();
    std::string value;
    for (;;) {
        if (c.eof()) c.fail("unterminated attribute value");
        char ch = c.peek();
        if (ch == quote) {
            c.advance();
            return value;
        }
        if (ch == '<') c.fail("'<' in attribute value");
        if (ch == '&') {
            parse_entity(c, value);
        } else {
            value.push_back(c.advance());
        }
    }
}

Element parse_element(Cursor& c) {
    if (c.eof() || c.peek() != '<') c.fail("expected '<'");
    Element elem;
    elem.line = c.line;
    elem.col = c.col;
    c.advance();
    if (!c.eof() && (c.peek() == '!' || c.peek() == '?'))
        c.fail("unsupported markup (DOCTYPE/CDATA/processing instruction)");
    elem.name = parse_name(c);

    // attributes
    for (;;) {
        bool had_ws = !c.eof() && std::isspace(static_cast<unsigned char>(c.peek()));
        skip_ws(c);
        if (c.eof()) c.fail("unterminated start tag");
        char ch = c.peek();
        if (ch == '/' || ch == '>') break;
        if (!had_ws) c.fail("expected whitespace before attribute");
        Attr attr;
        attr.line = c.line;
        attr.col = c.col;
        attr.name = parse_name(c);
        skip_ws(c);
        if (c.eof() || c.peek() != '=') c.fail("expected '=' after attribute name");
        c.advance();
        skip_ws(c);
        attr.value = parse_attr_value(c);
        for (const Attr& seen : elem.attributes)
            if (seen.name == attr.name)
                c.fail("duplicate attribute '" + attr.name + "'");
        elem.attributes.push_back(std::move(attr));
    }

    if (c.peek() == '/') {
        c.advance();
        if (c.eof() || c.peek() != '>') c.fail("expected '>' after '/'");
        c.advance();
        return elem;
    }
    c.advance(); // '>'

    // children until the matching end tag
    for (;;) {
        skip_misc(c);
        if (c.eof()) c.fail("missing end tag for <" + elem.name + ">");
        if (c.peek() != '<') c.fail("text content is not supported");
        if (c.starts_with("</")) {
            c.skip(2);
            std::string closing = parse_name(c);
            if (closing != elem.name)
                c.fail("end tag </" + closing + "> does not match <" + elem.name + ">");
            skip_ws(c);
            if (c.eof() || c.peek() != '>') c.fail("expected '>' in end tag");
            c.advance();
            return elem;
        }
        elem.children.push_back(parse_element(c));
    }
}

} // namespace

ParseError::ParseError(const std::string& msg, int line, int col)
    : Error(msg), line_(line), col_(col) {}

const std::string* Element::find_attr(std::string_view name) const {
    for (const Attr& a : attributes)
        if (a.name == name) return &a.value;
    return nullptr;
}

Element parse_document(std::string_view text) {
    Cursor c{text};
    if (c.starts_with("\xEF\xBB\xBF")) c.skip(3);  // UTF-8 BOM
    skip_misc(c);
    if (c.eof()) c.fail("document has no root element");
    Element root = parse_element(c);
    skip_misc(c);
    if (!c.eof()) c.fail("content after root element");
    return root;
}

std::string escape_attr(std::string_view value) {
    std::string out;
    out.reserve(value.size());
    for (char ch : value) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\n': out += "&#10;"; break;
            case '\t': out += "&#9;"; break;
            case '\r': out += "&#13;"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

} // namespace virtree::xml
