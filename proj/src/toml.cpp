#include "coda/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "coda/error.hpp"

namespace coda {

namespace {

using nlohmann::json;

struct Cursor {
    const std::string& s;
    size_t pos = 0;
    long line;

    bool eof() const { return pos >= s.size(); }
    char peek() const { return s[pos]; }
    void skip_ws() {
        while (!eof() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
};

[[noreturn]] void fail(const Cursor& c, const std::string& msg) {
    throw ParseError("TOML: " + msg, c.line);
}

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_key(Cursor& c) {
    c.skip_ws();
    std::string key;
    if (!c.eof() && c.peek() == '"') {
        ++c.pos;
        while (!c.eof() && c.peek() != '"') key += c.s[c.pos++];
        if (c.eof()) fail(c, "unterminated quoted key");
        ++c.pos;
    } else {
        while (!c.eof() && is_bare_key_char(c.peek())) key += c.s[c.pos++];
    }
    if (key.empty()) fail(c, "expected key");
    return key;
}

std::string parse_basic_string(Cursor& c) {
    ++c.pos;  // opening quote
    std::string out;
    while (!c.eof() && c.peek() != '"') {
        char ch = c.s[c.pos++];
        if (ch == '\\') {
            if (c.eof()) fail(c, "dangling escape");
            char esc = c.s[c.pos++];
            switch (esc) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(c, std::string("unsupported escape \\") + esc);
            }
        } else {
            out += ch;
        }
    }
    if (c.eof()) fail(c, "unterminated string");
    ++c.pos;
    return out;
}

json parse_value(Cursor& c);

json parse_array(Cursor& c) {
    ++c.pos;  // '['
    json arr = json::array();
    c.skip_ws();
    while (true) {
        c.skip_ws();
        if (c.eof()) fail(c, "unterminated array");
        if (c.peek() == ']') {
            ++c.pos;
            break;
        }
        arr.push_back(parse_value(c));
        c.skip_ws();
        if (!c.eof() && c.peek() == ',') {
            ++c.pos;
            continue;
        }
        c.skip_ws();
        if (c.eof() || c.peek() != ']') fail(c, "expected ',' or ']' in array");
        ++c.pos;
        break;
    }
    return arr;
}

json parse_number_or_literal(Cursor& c) {
    std::string tok;
    while (!c.eof()) {
        char ch = c.peek();
        if (ch == ',' || ch == ']' || ch == '#' || ch == ' ' || ch == '\t') break;
        tok += ch;
        ++c.pos;
    }
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok.empty()) fail(c, "expected value");

    std::string digits;
    for (char ch : tok)
        if (ch != '_') digits += ch;
    const bool looks_float = digits.find_first_of(".eE") != std::string::npos;
    try {
        size_t used = 0;
        if (looks_float) {
            double v = std::stod(digits, &used);
            if (used != digits.size()) fail(c, "bad number '" + tok + "'");
            return v;
        }
        long long v = std::stoll(digits, &used);
        if (used != digits.size()) fail(c, "bad number '" + tok + "'");
        return v;
    } catch (const std::exception&) {
        fail(c, "bad value '" + tok + "'");
    }
}

json parse_value(Cursor& c) {
    c.skip_ws();
    if (c.eof()) fail(c, "expected value");
    char ch = c.peek();
    if (ch == '"') return parse_basic_string(c);
    if (ch == '[') return parse_array(c);
    return parse_number_or_literal(c);
}

std::vector<std::string> split_path(const std::string& path, const Cursor& c) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : path) {
        if (ch == '.') {
            if (cur.empty()) fail(c, "empty path segment");
            parts.push_back(cur);
            cur.clear();
        } else if (is_bare_key_char(ch)) {
            cur += ch;
        } else if (ch == ' ' || ch == '\t') {
            continue;
        } else {
            fail(c, std::string("bad character in table name: ") + ch);
        }
    }
    if (cur.empty()) fail(c, "empty table name");
    parts.push_back(cur);
    return parts;
}

json* descend(json& root, const std::vector<std::string>& path, const Cursor& c) {
    json* node = &root;
    for (const auto& part : path) {
        if (node->is_array()) node = &node->back();
        if (!node->is_object()) fail(c, "path collides with a value: " + part);
        node = &(*node)[part];
    }
    if (node->is_array()) node = &node->back();
    return node;
}

}  // namespace

json parse_toml(std::istream& in) {
    json root = json::object();
    json* current = &root;
    std::string raw;
    long line_number = 0;
    while (std::getline(in, raw)) {
        ++line_number;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        Cursor c{raw, 0, line_number};
        c.skip_ws();
        if (c.eof() || c.peek() == '#') continue;

        if (c.peek() == '[') {
            const bool is_array = c.pos + 1 < raw.size() && raw[c.pos + 1] == '[';
            c.pos += is_array ? 2 : 1;
            const std::string close = is_array ? "]]" : "]";
            size_t end = raw.find(close, c.pos);
            if (end == std::string::npos) fail(c, "unterminated table header");
            auto path = split_path(raw.substr(c.pos, end - c.pos), c);
            c.pos = end + close.size();
            c.skip_ws();
            if (!c.eof() && c.peek() != '#') fail(c, "trailing characters after table header");

            if (is_array) {
                json* parent = &root;
                for (size_t i = 0; i + 1 < path.size(); ++i) {
                    if (parent->is_array()) parent = &parent->back();
                    parent = &(*parent)[path[i]];
                }
                if (parent->is_array()) parent = &parent->back();
                json& slot = (*parent)[path.back()];
                if (slot.is_null()) slot = json::array();
                if (!slot.is_array()) fail(c, "redefinition of key as array of tables");
                slot.push_back(json::object());
                current = &slot.back();
            } else {
                current = descend(root, path, c);
                if (!current->is_object()) {
                    if (current->is_null()) *current = json::object();
                    else fail(c, "table redefines a value");
                }
            }
            continue;
        }

        std::string key = parse_key(c);
        c.skip_ws();
        if (c.eof() || c.peek() != '=') fail(c, "expected '=' after key");
        ++c.pos;
        json value = parse_value(c);
        c.skip_ws();
        if (!c.eof() && c.peek() != '#') fail(c, "trailing characters after value");
        if (current->contains(key)) fail(c, "duplicate key '" + key + "'");
        (*current)[key] = std::move(value);
    }
    return root;
}

json parse_toml_string(const std::string& text) {
    std::istringstream in(text);
    return parse_toml(in);
}

json parse_toml_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read file: " + path);
    return parse_toml(in);
}

}  // namespace coda
