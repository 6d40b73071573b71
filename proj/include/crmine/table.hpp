#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "crmine/numeric.hpp"

namespace crmine {

// Column roles for ingestion: which columns carry the classifier score and
// the true label; everything else is an attribute.
struct TableSchema {
    std::string score_column;
    std::string label_column;
    char delimiter = ',';
};

struct RawTable {
    std::vector<std::string> attribute_names;
    // cells[row][attr], raw text; missing values already filtered out.
    std::vector<std::vector<std::string>> cells;
    std::vector<double> scores;
    std::vector<int> labels; // -1 or 1
    std::size_t rows_dropped = 0;

    std::size_t n_rows() const { return cells.size(); }
    std::size_t n_attributes() const { return attribute_names.size(); }
};

inline bool is_missing_value(const std::string& s) {
    return s.empty() || s == "?";
}

inline std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0')) return std::nullopt;
    return v;
}

// Splits one delimited line, honoring double quotes with "" escapes.
inline std::vector<std::string> split_delimited(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline int parse_label(const std::string& s, std::size_t row) {
    auto v = parse_double(s);
    if (!v)
        throw DataError("row " + std::to_string(row) + ": unparseable label '" + s + "'");
    if (*v == 1.0) return 1;
    if (*v == -1.0 || *v == 0.0) return -1; // {0,1} labels: 0 maps to -1
    throw DataError("row " + std::to_string(row) + ": label must be in {-1,0,1}, got '" + s + "'");
}

inline RawTable parse_table(std::istream& in, const TableSchema& schema) {
    std::string line;
    if (!std::getline(in, line))
        throw DataError("empty input: header row required");
    auto header = split_delimited(line, schema.delimiter);

    int score_idx = -1;
    int label_idx = -1;
    RawTable table;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == schema.score_column) {
            score_idx = static_cast<int>(i);
        } else if (header[i] == schema.label_column) {
            label_idx = static_cast<int>(i);
        } else {
            table.attribute_names.push_back(header[i]);
        }
    }
    if (score_idx < 0)
        throw DataError("score column '" + schema.score_column + "' not found in header");
    if (label_idx < 0)
        throw DataError("label column '" + schema.label_column + "' not found in header");

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto fields = split_delimited(line, schema.delimiter);
        if (fields.size() != header.size())
            throw DataError("row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));

        std::vector<std::string> attrs;
        attrs.reserve(table.attribute_names.size());
        bool missing = false;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (static_cast<int>(i) == score_idx || static_cast<int>(i) == label_idx) continue;
            if (is_missing_value(fields[i])) missing = true;
            attrs.push_back(fields[i]);
        }
        if (missing) {
            ++table.rows_dropped;
            continue;
        }

        auto score = parse_double(fields[static_cast<std::size_t>(score_idx)]);
        if (!score)
            throw DataError("row " + std::to_string(row) + ": unparseable score '" +
                            fields[static_cast<std::size_t>(score_idx)] + "'");
        table.scores.push_back(*score);
        table.labels.push_back(parse_label(fields[static_cast<std::size_t>(label_idx)], row));
        table.cells.push_back(std::move(attrs));
    }
    return table;
}

inline RawTable load_table(const std::string& path, const TableSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open table file: " + path);
    return parse_table(in, schema);
}

} // namespace crmine
