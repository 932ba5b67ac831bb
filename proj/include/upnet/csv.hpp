#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace upnet {

/// Raised on malformed data files; the CLI maps it to exit code 3.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace csv {

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline double parse_double(const std::string& cell, std::size_t row, std::size_t col) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        throw DataError("row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                        ": non-numeric cell '" + cell + "'");
    }
    while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
    if (pos != cell.size())
        throw DataError("row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                        ": non-numeric cell '" + cell + "'");
    return v;
}

/// Full-precision formatting; round-trips doubles exactly.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Table {
    std::vector<std::string> comments;  // leading '#' lines, stripped of '#'
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Reads a numeric CSV: optional leading comment lines, one header line, then
/// numeric rows with a column count matching the header.
inline Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    Table table;
    std::string line;
    std::size_t row = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (!have_header) table.comments.push_back(line.substr(1));
            continue;
        }
        if (!have_header) {
            table.header = split(line);
            have_header = true;
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != table.header.size())
            throw DataError("row " + std::to_string(row) + ": expected " +
                            std::to_string(table.header.size()) + " columns, got " +
                            std::to_string(cells.size()));
        std::vector<double> values(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            values[c] = parse_double(cells[c], row, c);
        table.rows.push_back(std::move(values));
    }
    if (!have_header) throw DataError("'" + path + "': empty file (no header)");
    return table;
}

inline void write_table(const std::string& path, const Table& table) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    for (const auto& comment : table.comments) out << '#' << comment << '\n';
    for (std::size_t c = 0; c < table.header.size(); ++c)
        out << (c ? "," : "") << table.header[c];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << format_double(row[c]);
        out << '\n';
    }
    if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace csv
}  // namespace upnet
