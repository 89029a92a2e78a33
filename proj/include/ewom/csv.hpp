#pragma once

// Minimal RFC 4180 reader/writer shared by every on-disk table.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ewom/error.hpp"

namespace ewom::csv {

struct Row {
    std::size_t line = 0;  // 1-based line where the record starts
    std::vector<std::string> fields;
};

inline std::vector<Row> parse(std::string_view text, const std::string& source = "<input>") {
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    row.line = 1;

    auto end_field = [&] {
        row.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        // A blank line is not a record.
        if (!(row.fields.size() == 1 && row.fields[0].empty())) rows.push_back(std::move(row));
        row = Row{};
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started)
                    throw ContractError(source + ":" + std::to_string(line) + ": stray quote in field");
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                break;
            case '\n':
                end_row();
                ++line;
                row.line = line;
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (in_quotes) throw ContractError(source + ":" + std::to_string(row.line) + ": unterminated quoted field");
    if (field_started || !field.empty() || !row.fields.empty()) end_row();
    return rows;
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ContractError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<Row> read(const std::filesystem::path& path) {
    return parse(slurp(path), path.string());
}

/// Reads a file whose first record must equal `header` and returns the data records.
inline std::vector<Row> read_with_header(const std::filesystem::path& path,
                                         const std::vector<std::string>& header) {
    auto rows = read(path);
    if (rows.empty()) throw ContractError(path.string() + ": missing header");
    if (rows.front().fields != header) {
        std::string want;
        for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
        throw ContractError(path.string() + ": expected header '" + want + "'");
    }
    rows.erase(rows.begin());
    for (const auto& r : rows) {
        if (r.fields.size() != header.size())
            throw ContractError(path.string() + ":" + std::to_string(r.line) + ": expected " +
                                std::to_string(header.size()) + " fields, got " +
                                std::to_string(r.fields.size()));
    }
    return rows;
}

inline std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += escape(fields[i]);
    }
    return out;
}

/// Shortest decimal that round-trips through strtod.
inline std::string format_double(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && *b == ' ') ++b;
    if (b < e && *b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || ptr != e || !std::isfinite(v))
        throw ContractError(where + ": not a finite number: '" + s + "'");
    return v;
}

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw ContractError("cannot write " + path.string());
    }

    void row(const std::vector<std::string>& fields) { out_ << join(fields) << '\n'; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

}  // namespace ewom::csv
