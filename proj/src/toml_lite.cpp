#include "flift/toml_lite.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace flift {

using nlohmann::json;

namespace {

struct TomlError : std::invalid_argument {
    TomlError(int line, const std::string& msg)
        : std::invalid_argument("TOML parse error, line " + std::to_string(line) + ": " + msg) {}
};

class ValueParser {
public:
    ValueParser(const std::string& s, int line) : s_(s), line_(line) {}

    json parse() {
        json v = parse_value();
        skip_ws();
        if (pos_ != s_.size()) throw TomlError(line_, "trailing characters after value");
        return v;
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }

    json parse_value() {
        skip_ws();
        if (pos_ >= s_.size()) throw TomlError(line_, "missing value");
        const char c = s_[pos_];
        if (c == '"') return parse_string();
        if (c == '[') return parse_array();
        if (c == '{') throw TomlError(line_, "inline tables are not supported");
        return parse_scalar();
    }

    json parse_string() {
        ++pos_; // opening quote
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            if (s_[pos_] == '\\') {
                ++pos_;
                if (pos_ >= s_.size()) throw TomlError(line_, "dangling escape");
                switch (s_[pos_]) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: throw TomlError(line_, "unsupported escape");
                }
            } else {
                out += s_[pos_];
            }
            ++pos_;
        }
        if (pos_ >= s_.size()) throw TomlError(line_, "unterminated string");
        ++pos_;
        return json(out);
    }

    json parse_array() {
        ++pos_; // '['
        json arr = json::array();
        while (true) {
            skip_ws();
            if (pos_ < s_.size() && s_[pos_] == ']') { ++pos_; return arr; }
            arr.push_back(parse_value());
            skip_ws();
            if (pos_ < s_.size() && s_[pos_] == ',') { ++pos_; continue; }
            if (pos_ < s_.size() && s_[pos_] == ']') { ++pos_; return arr; }
            throw TomlError(line_, "expected ',' or ']' in array");
        }
    }

    json parse_scalar() {
        std::size_t end = pos_;
        while (end < s_.size() && s_[end] != ',' && s_[end] != ']' && s_[end] != ' ' &&
               s_[end] != '\t' && s_[end] != '#')
            ++end;
        const std::string tok = s_.substr(pos_, end - pos_);
        pos_ = end;
        if (tok == "true") return json(true);
        if (tok == "false") return json(false);
        if (tok == "inf" || tok == "+inf") return json(std::numeric_limits<double>::infinity());
        if (tok == "-inf") return json(-std::numeric_limits<double>::infinity());
        if (tok == "nan" || tok == "+nan" || tok == "-nan")
            throw TomlError(line_, "nan is not accepted in configs");
        // integer when it parses exactly as one, float otherwise
        try {
            std::size_t used = 0;
            const long long i = std::stoll(tok, &used);
            if (used == tok.size()) return json(i);
        } catch (...) {
        }
        try {
            std::size_t used = 0;
            const double d = std::stod(tok, &used);
            if (used == tok.size()) return json(d);
        } catch (...) {
        }
        throw TomlError(line_, "cannot parse value '" + tok + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    int line_;
};

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

json* descend(json& root, const std::string& dotted, int line) {
    json* node = &root;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        const std::size_t dot = dotted.find('.', start);
        const std::string key = trim(dotted.substr(start, dot - start));
        if (key.empty()) throw TomlError(line, "empty table name component");
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        if (!node->is_object()) throw TomlError(line, "key '" + key + "' is not a table");
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return node;
}

} // namespace

json parse_toml_lite(const std::string& text) {
    json root = json::object();
    json* current = &root;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.size() >= 2 && line[1] == '[')
                throw TomlError(line_no, "arrays of tables are not supported");
            if (line.back() != ']') throw TomlError(line_no, "unterminated table header");
            current = descend(root, line.substr(1, line.size() - 2), line_no);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw TomlError(line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw TomlError(line_no, "empty key");
        if (key.find('.') != std::string::npos)
            throw TomlError(line_no, "dotted keys are not supported; use [table] headers");
        if (current->contains(key)) throw TomlError(line_no, "duplicate key '" + key + "'");
        ValueParser vp(trim(line.substr(eq + 1)), line_no);
        (*current)[key] = vp.parse();
    }
    return root;
}

} // namespace flift
