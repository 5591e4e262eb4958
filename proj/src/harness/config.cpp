#include "hexapod/harness/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hexapod/errors.hpp"

namespace hexapod::harness {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Drops a '#' comment that is not inside a string.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (c == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
    }
    return k.front() != '.' && k.back() != '.' && k.find("..") == std::string::npos;
}

class ValueParser {
public:
    ValueParser(const std::string& text, int line, const std::string& source)
        : s_(text), line_(line), source_(source) {}

    ConfigValue parse_all() {
        ConfigValue v = parse_value();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing characters");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(source_ + ":" + std::to_string(line_) + ": " + msg, "", line_);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    ConfigValue parse_value() {
        skip_ws();
        if (pos_ >= s_.size()) fail("missing value");
        ConfigValue v;
        v.line = line_;
        const char c = s_[pos_];
        if (c == '[') {
            ++pos_;
            ConfigValue::Array arr;
            skip_ws();
            if (pos_ < s_.size() && s_[pos_] == ']') {
                ++pos_;
                v.value = arr;
                return v;
            }
            while (true) {
                arr.push_back(parse_value());
                skip_ws();
                if (pos_ >= s_.size()) fail("unterminated array");
                if (s_[pos_] == ',') {
                    ++pos_;
                    skip_ws();
                    if (pos_ < s_.size() && s_[pos_] == ']') {
                        ++pos_;
                        break;
                    }
                    continue;
                }
                if (s_[pos_] == ']') {
                    ++pos_;
                    break;
                }
                fail("expected ',' or ']' in array");
            }
            v.value = std::move(arr);
            return v;
        }
        if (c == '"') {
            ++pos_;
            std::string out;
            while (pos_ < s_.size() && s_[pos_] != '"') {
                char ch = s_[pos_++];
                if (ch == '\\' && pos_ < s_.size()) {
                    const char esc = s_[pos_++];
                    switch (esc) {
                        case 'n': ch = '\n'; break;
                        case 't': ch = '\t'; break;
                        case '"': ch = '"'; break;
                        case '\\': ch = '\\'; break;
                        default: fail(std::string("unsupported escape \\") + esc);
                    }
                }
                out.push_back(ch);
            }
            if (pos_ >= s_.size()) fail("unterminated string");
            ++pos_;
            v.value = out;
            return v;
        }
        std::size_t end = pos_;
        while (end < s_.size() && s_[end] != ',' && s_[end] != ']' && !std::isspace(static_cast<unsigned char>(s_[end]))) {
            ++end;
        }
        const std::string tok = s_.substr(pos_, end - pos_);
        pos_ = end;
        if (tok == "true" || tok == "false") {
            v.value = tok == "true";
            return v;
        }
        std::string cleaned;
        for (char ch : tok) {
            if (ch != '_') cleaned.push_back(ch);
        }
        std::size_t used = 0;
        double d = 0.0;
        try {
            d = std::stod(cleaned, &used);
        } catch (const std::exception&) {
            fail("cannot parse value '" + tok + "'");
        }
        if (used != cleaned.size() || !std::isfinite(d)) fail("cannot parse value '" + tok + "'");
        v.value = d;
        return v;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    int line_;
    const std::string& source_;
};

int bracket_balance(const std::string& s) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
        if (in_string) continue;
        if (c == '[') ++depth;
        if (c == ']') --depth;
    }
    return depth;
}

}  // namespace

ConfigDocument ConfigDocument::parse(const std::string& text, const std::string& source_name) {
    ConfigDocument doc;
    doc.source_ = source_name;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    auto fail = [&](int line, const std::string& msg) {
        throw ConfigError(source_name + ":" + std::to_string(line) + ": " + msg, "", line);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) fail(line_no, "malformed section header");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (!valid_key(name)) fail(line_no, "invalid section name '" + name + "'");
            section = name;
            if (!doc.sections_.insert(section).second) fail(line_no, "duplicate section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (!valid_key(key)) fail(line_no, "invalid key '" + key + "'");
        std::string value_text = trim(line.substr(eq + 1));
        const int start_line = line_no;
        while (bracket_balance(value_text) > 0) {
            if (!std::getline(in, raw)) fail(start_line, "unterminated array");
            ++line_no;
            value_text += " " + trim(strip_comment(raw));
        }
        if (bracket_balance(value_text) < 0) fail(start_line, "unbalanced ']'");
        const std::string path = section.empty() ? key : section + "." + key;
        if (doc.values_.count(path)) fail(start_line, "duplicate key '" + path + "'");
        doc.values_[path] = ValueParser(value_text, start_line, source_name).parse_all();
    }
    return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string(), "");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

const ConfigValue* ConfigDocument::find(const std::string& path) const {
    const auto it = values_.find(path);
    if (it == values_.end()) return nullptr;
    used_.insert(path);
    return &it->second;
}

bool ConfigDocument::has(const std::string& path) const { return values_.count(path) != 0; }

bool ConfigDocument::has_section(const std::string& section) const { return sections_.count(section) != 0; }

void ConfigDocument::type_error(const std::string& path, const char* expected) const {
    const ConfigValue* v = find(path);
    const int line = v ? v->line : 0;
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + path + " must be " + expected, path, line);
}

double ConfigDocument::number(const std::string& path, double fallback) const {
    const ConfigValue* v = find(path);
    if (!v) return fallback;
    if (!v->is_number()) type_error(path, "a number");
    return std::get<double>(v->value);
}

double ConfigDocument::require_number(const std::string& path) const {
    if (!has(path)) {
        throw ConfigError(source_ + ": missing required field " + path, path);
    }
    return number(path, 0.0);
}

int ConfigDocument::integer(const std::string& path, int fallback) const {
    const double d = number(path, fallback);
    if (d != std::floor(d) || std::abs(d) > 1e9) type_error(path, "an integer");
    return static_cast<int>(d);
}

bool ConfigDocument::boolean(const std::string& path, bool fallback) const {
    const ConfigValue* v = find(path);
    if (!v) return fallback;
    if (!v->is_bool()) type_error(path, "true or false");
    return std::get<bool>(v->value);
}

std::string ConfigDocument::string(const std::string& path, const std::string& fallback) const {
    const ConfigValue* v = find(path);
    if (!v) return fallback;
    if (!v->is_string()) type_error(path, "a string");
    return std::get<std::string>(v->value);
}

std::string ConfigDocument::require_string(const std::string& path) const {
    if (!has(path)) {
        throw ConfigError(source_ + ": missing required field " + path, path);
    }
    return string(path, "");
}

std::vector<double> ConfigDocument::numbers(const std::string& path) const {
    const ConfigValue* v = find(path);
    if (!v) return {};
    if (!v->is_array()) type_error(path, "an array of numbers");
    std::vector<double> out;
    for (const ConfigValue& e : std::get<ConfigValue::Array>(v->value)) {
        if (!e.is_number()) type_error(path, "an array of numbers");
        out.push_back(std::get<double>(e.value));
    }
    return out;
}

std::vector<std::vector<double>> ConfigDocument::rows(const std::string& path) const {
    const ConfigValue* v = find(path);
    if (!v) return {};
    if (!v->is_array()) type_error(path, "an array of number arrays");
    std::vector<std::vector<double>> out;
    for (const ConfigValue& row : std::get<ConfigValue::Array>(v->value)) {
        if (!row.is_array()) type_error(path, "an array of number arrays");
        std::vector<double> r;
        for (const ConfigValue& e : std::get<ConfigValue::Array>(row.value)) {
            if (!e.is_number()) type_error(path, "an array of number arrays");
            r.push_back(std::get<double>(e.value));
        }
        out.push_back(std::move(r));
    }
    return out;
}

void ConfigDocument::set_number(const std::string& path, double value) {
    ConfigValue& v = values_[path];
    v.value = value;
    const auto dot = path.rfind('.');
    if (dot != std::string::npos) sections_.insert(path.substr(0, dot));
}

std::vector<std::string> ConfigDocument::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
        if (!used_.count(k)) out.push_back(k);
    }
    return out;
}

}  // namespace hexapod::harness
