#pragma once

// Reader for the scenario config format: a TOML subset with [section.sub] headers,
// `key = value` pairs, '#' comments, numbers, booleans, double-quoted strings and
// (nested, possibly multi-line) arrays.

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace hexapod::harness {

struct ConfigValue {
    using Array = std::vector<ConfigValue>;
    std::variant<double, bool, std::string, Array> value;
    int line = 0;

    bool is_number() const { return std::holds_alternative<double>(value); }
    bool is_bool() const { return std::holds_alternative<bool>(value); }
    bool is_string() const { return std::holds_alternative<std::string>(value); }
    bool is_array() const { return std::holds_alternative<Array>(value); }
};

class ConfigDocument {
public:
    /// Throws ConfigError with the line number on malformed input.
    static ConfigDocument parse(const std::string& text, const std::string& source_name = "<config>");
    static ConfigDocument load(const std::filesystem::path& path);

    bool has(const std::string& path) const;
    bool has_section(const std::string& section) const;

    /// Typed accessors. Paths are "section.key". A present value of the wrong type throws
    /// ConfigError naming the path; `require_*` also throws when the key is missing.
    double number(const std::string& path, double fallback) const;
    double require_number(const std::string& path) const;
    int integer(const std::string& path, int fallback) const;
    bool boolean(const std::string& path, bool fallback) const;
    std::string string(const std::string& path, const std::string& fallback) const;
    std::string require_string(const std::string& path) const;
    std::vector<double> numbers(const std::string& path) const;
    std::vector<std::vector<double>> rows(const std::string& path) const;

    /// Replaces (or adds) a numeric value; used for parameter sweeps.
    void set_number(const std::string& path, double value);

    /// Keys never read through an accessor, for typo detection.
    std::vector<std::string> unused_keys() const;

    const std::map<std::string, ConfigValue>& values() const { return values_; }
    const std::string& source() const { return source_; }

private:
    const ConfigValue* find(const std::string& path) const;
    [[noreturn]] void type_error(const std::string& path, const char* expected) const;

    std::string source_;
    std::map<std::string, ConfigValue> values_;
    std::set<std::string> sections_;
    mutable std::set<std::string> used_;
};

}  // namespace hexapod::harness
