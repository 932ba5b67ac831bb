#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "upnet/csv.hpp"
#include "upnet/metrics.hpp"
#include "upnet/types.hpp"

namespace upnet {

/// Parses a reflectance CSV with header `r_1..r_n`. Columns beyond r_n (e.g.
/// mean/sd from a prediction file) are ignored, so prediction output round-trips.
inline std::vector<Reflectance> ingest_reflectance_csv(const std::string& path,
                                                       std::size_t expected_bands) {
    const csv::Table table = csv::read_table(path);
    if (table.header.size() < expected_bands)
        throw DataError("'" + path + "': header has " + std::to_string(table.header.size()) +
                        " columns, expected at least " + std::to_string(expected_bands) +
                        " reflectance bands");
    for (std::size_t b = 0; b < expected_bands; ++b) {
        const std::string expected = "r_" + std::to_string(b + 1);
        if (table.header[b] != expected)
            throw DataError("'" + path + "': expected column '" + expected + "', got '" +
                            table.header[b] + "' (need " + std::to_string(expected_bands) +
                            " bands)");
    }
    std::vector<Reflectance> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows)
        out.emplace_back(std::vector<double>(row.begin(), row.begin() + expected_bands));
    return out;
}

/// Prediction CSV: `r_1..r_n,mean,sd[,extra...]`, schema version in a leading
/// comment line.
inline void write_summaries_csv(const std::string& path,
                                const std::vector<Reflectance>& records,
                                const std::vector<PosteriorSummary>& summaries,
                                const std::vector<std::string>& extra_columns = {},
                                const std::vector<std::vector<double>>& extra_values = {}) {
    if (records.size() != summaries.size())
        throw std::invalid_argument("write_summaries_csv: misaligned records/summaries");
    csv::Table table;
    table.comments.push_back(" upnet-predictions v1");
    const std::size_t n = records.empty() ? 0 : records.front().size();
    for (std::size_t b = 0; b < n; ++b) table.header.push_back("r_" + std::to_string(b + 1));
    table.header.push_back("mean");
    table.header.push_back("sd");
    for (const auto& name : extra_columns) table.header.push_back(name);
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::vector<double> row = records[i].values;
        row.push_back(summaries[i].mean);
        row.push_back(summaries[i].sd);
        for (const auto& column : extra_values) row.push_back(column[i]);
        table.rows.push_back(std::move(row));
    }
    csv::write_table(path, table);
}

/// FNV-1a 64-bit digest of a file, for run manifests.
inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "' for digest");
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
    return out;
}

/// Every CLI run writes `<output>.manifest.json` beside its outputs: the
/// command, arguments, seed and input digests, enough to reproduce the run.
inline void write_manifest(const std::string& output_path, const std::string& command,
                           const nlohmann::json& args, std::uint64_t seed,
                           const std::map<std::string, std::string>& input_digests) {
    nlohmann::json manifest;
    manifest["format"] = "upnet-manifest";
    manifest["version"] = 1;
    manifest["command"] = command;
    manifest["args"] = args;
    manifest["seed"] = seed;
    manifest["inputs"] = input_digests;
    std::ofstream out(output_path + ".manifest.json");
    if (!out) throw DataError("cannot write manifest beside '" + output_path + "'");
    out << manifest.dump(1) << '\n';
}

}  // namespace upnet
