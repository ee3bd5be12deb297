#pragma once

#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hus {

/// Doubles rendered with 17 significant digits so that every report value
/// reparses to the identical bit pattern.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return {buf};
}

/// Minimal insertion-ordered JSON document builder. Key order is exactly
/// the order of set() calls, which keeps emitted reports byte-stable.
class Json {
public:
    static Json object() { Json j; j.value_ = Object{}; return j; }
    static Json array() { Json j; j.value_ = Array{}; return j; }
    static Json number(double v) { Json j; j.value_ = format_double(v); return j; }
    static Json integer(long long v) { Json j; j.value_ = std::to_string(v); return j; }
    static Json unsigned_integer(unsigned long long v) { Json j; j.value_ = std::to_string(v); return j; }
    static Json boolean(bool v) { Json j; j.value_ = Raw{v ? "true" : "false"}; return j; }
    static Json null() { Json j; j.value_ = Raw{"null"}; return j; }
    static Json string(std::string v) { Json j; j.value_ = Str{std::move(v)}; return j; }

    Json& set(const std::string& key, Json v) {
        std::get<Object>(value_).items.emplace_back(key, std::move(v));
        return *this;
    }

    Json& push(Json v) {
        std::get<Array>(value_).items.push_back(std::move(v));
        return *this;
    }

    std::string dump(int indent = 2) const {
        std::string out;
        write(out, indent, 0);
        out.push_back('\n');
        return out;
    }

private:
    struct Str { std::string s; };
    struct Raw { std::string s; };
    struct Object { std::vector<std::pair<std::string, Json>> items; };
    struct Array { std::vector<Json> items; };

    std::variant<std::string, Str, Raw, Object, Array> value_ = Raw{"null"};

    static void append_escaped(std::string& out, const std::string& s) {
        out.push_back('"');
        for (char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                case '\r': out += "\\r"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", c);
                        out += buf;
                    } else {
                        out.push_back(c);
                    }
            }
        }
        out.push_back('"');
    }

    void write(std::string& out, int indent, int depth) const {
        const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
        const std::string close_pad(static_cast<std::size_t>(indent) * depth, ' ');
        if (const auto* num = std::get_if<std::string>(&value_)) {
            out += *num;
        } else if (const auto* str = std::get_if<Str>(&value_)) {
            append_escaped(out, str->s);
        } else if (const auto* raw = std::get_if<Raw>(&value_)) {
            out += raw->s;
        } else if (const auto* obj = std::get_if<Object>(&value_)) {
            if (obj->items.empty()) { out += "{}"; return; }
            out += "{\n";
            for (std::size_t i = 0; i < obj->items.size(); ++i) {
                out += pad;
                append_escaped(out, obj->items[i].first);
                out += ": ";
                obj->items[i].second.write(out, indent, depth + 1);
                if (i + 1 < obj->items.size()) out += ",";
                out += "\n";
            }
            out += close_pad + "}";
        } else if (const auto* arr = std::get_if<Array>(&value_)) {
            if (arr->items.empty()) { out += "[]"; return; }
            out += "[\n";
            for (std::size_t i = 0; i < arr->items.size(); ++i) {
                out += pad;
                arr->items[i].write(out, indent, depth + 1);
                if (i + 1 < arr->items.size()) out += ",";
                out += "\n";
            }
            out += close_pad + "]";
        }
    }
};

/// One CSV cell, quoting only when needed.
inline std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace hus
