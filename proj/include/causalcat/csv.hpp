#pragma once

// Minimal RFC 4180 reader/writer: comma separated, double-quoted fields,
// doubled quotes as escapes, embedded newlines allowed inside quotes.

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "causalcat/error.hpp"

namespace causalcat::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;  // 1-based physical line where each row starts

    std::optional<std::size_t> column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    }
};

inline std::vector<std::vector<std::string>> parse_records(std::string_view data,
                                                           std::vector<std::size_t>* record_lines = nullptr) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    bool record_has_content = false;
    std::size_t line = 1;
    std::size_t record_line = 1;

    if (data.size() >= 3 && data.substr(0, 3) == "\xEF\xBB\xBF") data.remove_prefix(3);

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        if (record_lines) record_lines->push_back(record_line);
        record.clear();
        record_has_content = false;
    };

    for (std::size_t i = 0; i < data.size(); ++i) {
        const char c = data[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < data.size() && data[i + 1] == '"') {
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
        if (!record_has_content) record_line = line;
        switch (c) {
            case '"':
                if (field_started && !field.empty())
                    throw MalformedCsv("stray quote inside unquoted field at line " + std::to_string(line));
                in_quotes = true;
                field_started = true;
                record_has_content = true;
                break;
            case ',':
                end_field();
                record_has_content = true;
                break;
            case '\r':
                break;
            case '\n':
                if (record_has_content || field_started || !field.empty()) end_record();
                ++line;
                break;
            default:
                field.push_back(c);
                field_started = true;
                record_has_content = true;
        }
    }
    if (in_quotes) throw MalformedCsv("unterminated quoted field starting near line " + std::to_string(record_line));
    if (record_has_content || field_started || !field.empty()) end_record();
    return records;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Table read_table(const std::string& path) {
    Table table;
    std::vector<std::size_t> lines;
    auto records = parse_records(read_file(path), &lines);
    if (records.empty()) throw MissingColumn("no header row in " + path);
    table.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        table.rows.push_back(std::move(records[r]));
        table.row_lines.push_back(lines[r]);
    }
    return table;
}

inline std::string quote(std::string_view field) {
    const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
                       (!field.empty() && (field.front() == ' ' || field.back() == ' '));
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string format_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += quote(fields[i]);
    }
    out.push_back('\n');
    return out;
}

inline std::string format_table(const Table& table) {
    std::string out = format_row(table.header);
    for (const auto& row : table.rows) out += format_row(row);
    return out;
}

}  // namespace causalcat::csv
