#pragma once

// Minimal RFC 4180 reader/writer. Lines starting with '#' before the header
// or between records are comments (our own outputs carry a provenance line).

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sdist/error.hpp"

namespace sdist::csv {

struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

class Table {
public:
    Table(std::string source, std::vector<std::string> header, std::vector<Row> rows)
        : source_(std::move(source)), header_(std::move(header)), rows_(std::move(rows)) {
        for (std::size_t i = 0; i < header_.size(); ++i) index_.emplace(header_[i], i);
    }

    [[nodiscard]] const std::string& source() const noexcept { return source_; }
    [[nodiscard]] const std::vector<std::string>& header() const noexcept { return header_; }
    [[nodiscard]] const std::vector<Row>& rows() const noexcept { return rows_; }

    [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] std::size_t require(std::string_view name) const {
        auto c = column(name);
        if (!c) throw IngestionError(Errc::bad_csv, source_ + ": missing column '" + std::string(name) + "'");
        return *c;
    }

    /// "file:line: message" for errors about a record.
    [[nodiscard]] std::string where(const Row& row) const { return source_ + ":" + std::to_string(row.line); }

private:
    std::string source_;
    std::vector<std::string> header_;
    std::vector<Row> rows_;
    std::map<std::string, std::size_t> index_;
};

inline Table parse(std::string_view text, std::string source = "<memory>") {
    std::vector<Row> records;
    std::size_t line = 1;
    std::size_t pos = 0;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
    while (pos < text.size()) {
        const std::size_t start_line = line;
        if (text[pos] == '#') {
            while (pos < text.size() && text[pos] != '\n') ++pos;
            ++pos;
            ++line;
            continue;
        }
        Row row;
        row.line = start_line;
        std::string field;
        bool quoted = false;
        bool at_end = false;
        while (!at_end) {
            if (pos >= text.size()) {
                if (quoted) throw IngestionError(Errc::bad_csv, source + ":" + std::to_string(start_line) + ": unterminated quote");
                row.fields.push_back(std::move(field));
                break;
            }
            const char c = text[pos++];
            if (quoted) {
                if (c == '"') {
                    if (pos < text.size() && text[pos] == '"') {
                        field.push_back('"');
                        ++pos;
                    } else {
                        quoted = false;
                    }
                } else {
                    if (c == '\n') ++line;
                    field.push_back(c);
                }
            } else if (c == '"' && field.empty()) {
                quoted = true;
            } else if (c == ',') {
                row.fields.push_back(std::move(field));
                field.clear();
            } else if (c == '\n' || c == '\r') {
                if (c == '\r' && pos < text.size() && text[pos] == '\n') ++pos;
                ++line;
                row.fields.push_back(std::move(field));
                at_end = true;
            } else {
                field.push_back(c);
            }
        }
        if (row.fields.size() == 1 && row.fields[0].empty()) continue;  // blank line
        records.push_back(std::move(row));
    }
    if (records.empty()) throw IngestionError(Errc::bad_csv, source + ": missing header");
    std::vector<std::string> header = std::move(records.front().fields);
    records.erase(records.begin());
    for (const auto& r : records) {
        if (r.fields.size() != header.size()) {
            throw IngestionError(Errc::bad_csv, source + ":" + std::to_string(r.line) + ": expected " +
                                                    std::to_string(header.size()) + " fields, got " +
                                                    std::to_string(r.fields.size()));
        }
    }
    return Table(std::move(source), std::move(header), std::move(records));
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(Errc::missing_file, "cannot open input file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Table read(const std::string& path) { return parse(read_file(path), path); }

inline double to_double(const Table& t, const Row& row, std::size_t col) {
    const std::string& s = row.fields[col];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw IngestionError(Errc::bad_csv, t.where(row) + ": '" + s + "' in column " + t.header()[col] +
                                                " is not a number");
    }
    return v;
}

inline long long to_int(const Table& t, const Row& row, std::size_t col) {
    const std::string& s = row.fields[col];
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw IngestionError(Errc::bad_csv, t.where(row) + ": '" + s + "' in column " + t.header()[col] +
                                                " is not an integer");
    }
    return v;
}

inline std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

/// %.12g formatting.
inline std::string number(double v, int precision = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

inline std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

class Writer {
public:
    explicit Writer(std::string provenance = {}) {
        if (!provenance.empty()) out_ << "# " << provenance << '\n';
    }

    Writer& comment(std::string_view text) {
        out_ << "# " << text << '\n';
        return *this;
    }

    Writer& row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << quote(fields[i]);
        }
        out_ << '\n';
        return *this;
    }

    [[nodiscard]] std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

}  // namespace sdist::csv
