#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "upnet/csv.hpp"
#include "upnet/forward_model.hpp"
#include "upnet/prior.hpp"
#include "upnet/rng.hpp"
#include "upnet/types.hpp"

namespace upnet {

/// Heteroscedastic Gaussian observation noise: per band,
/// sigma_b = multiplicative_level * clean_b + additive_sd.
struct NoiseModel {
    double multiplicative_level = 0.04;
    double additive_sd = 0.01;

    NoiseModel() = default;
    NoiseModel(double mult, double add) : multiplicative_level(mult), additive_sd(add) {
        if (mult < 0 || add < 0)
            throw std::invalid_argument("NoiseModel: levels must be >= 0");
    }

    double sigma(double clean) const {
        return multiplicative_level * clean + additive_sd;
    }
};

/// Adds per-band Gaussian noise. The result is not clipped to [0,1]; the
/// Gaussian likelihood used by the posterior oracles is unclipped too.
inline Reflectance apply_noise(const Reflectance& clean, const NoiseModel& noise, Rng& rng) {
    std::vector<double> out(clean.size());
    for (std::size_t b = 0; b < clean.size(); ++b) {
        const double sigma = noise.sigma(clean[b]);
        out[b] = sigma > 0 ? clean[b] + draw_normal(rng, 0.0, sigma) : clean[b];
    }
    return Reflectance(std::move(out));
}

/// Paired (theta, reflectance) samples; D1 of the training pipeline.
struct Dataset {
    std::vector<std::string> param_names;
    std::vector<ParamVector> thetas;
    std::vector<Reflectance> reflectances;
    std::size_t target_index = 0;  // which parameter is retrieved
    std::uint64_t seed = 0;

    std::size_t size() const { return thetas.size(); }
    std::size_t num_params() const { return param_names.size(); }
    std::size_t num_bands() const { return reflectances.empty() ? 0 : reflectances.front().size(); }
};

/// sample_prior -> forward eval -> apply_noise, `count` times. Each record
/// uses a substream derived from (seed, record index), so the dataset is
/// identical no matter how the loop is scheduled.
inline Dataset simulate_dataset(const ForwardFn& model, const PriorSpec& spec,
                                const NoiseModel& noise, std::size_t count,
                                std::size_t target_index, std::uint64_t seed) {
    if (target_index >= spec.size())
        throw std::invalid_argument("simulate_dataset: target_index out of range");
    Dataset ds;
    ds.param_names = spec.names;
    ds.target_index = target_index;
    ds.seed = seed;
    ds.thetas.reserve(count);
    ds.reflectances.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = make_stream(seed, i);
        ParamVector theta = sample_prior(spec, rng);
        Reflectance clean;
        try {
            clean = model(theta);
        } catch (const std::exception& e) {
            std::string msg = "simulate_dataset: forward model failed at record " +
                              std::to_string(i) + " (theta =";
            for (double v : theta.values) msg += " " + std::to_string(v);
            throw std::runtime_error(msg + "): " + e.what());
        }
        ds.reflectances.push_back(apply_noise(clean, noise, rng));
        ds.thetas.push_back(std::move(theta));
    }
    return ds;
}

// Dataset CSV schema: a leading comment line with version, target and seed,
// then `theta_<name>,...,r_1,...,r_n`.

inline void write_dataset(const Dataset& ds, const std::string& path) {
    csv::Table table;
    table.comments.push_back(" upnet-dataset v1 target=" +
                             ds.param_names.at(ds.target_index) +
                             " seed=" + std::to_string(ds.seed));
    for (const auto& name : ds.param_names) table.header.push_back("theta_" + name);
    for (std::size_t b = 0; b < ds.num_bands(); ++b)
        table.header.push_back("r_" + std::to_string(b + 1));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::vector<double> row;
        row.reserve(table.header.size());
        row.insert(row.end(), ds.thetas[i].values.begin(), ds.thetas[i].values.end());
        row.insert(row.end(), ds.reflectances[i].values.begin(), ds.reflectances[i].values.end());
        if (row.size() != table.header.size())
            throw std::invalid_argument("write_dataset: inconsistent record at row " +
                                        std::to_string(i));
        table.rows.push_back(std::move(row));
    }
    csv::write_table(path, table);
}

inline Dataset read_dataset(const std::string& path) {
    const csv::Table table = csv::read_table(path);
    Dataset ds;
    std::size_t m = 0;
    while (m < table.header.size() && table.header[m].rfind("theta_", 0) == 0) ++m;
    if (m == 0) throw DataError("'" + path + "': no theta_* columns in header");
    for (std::size_t j = 0; j < m; ++j) ds.param_names.push_back(table.header[j].substr(6));
    for (std::size_t b = m; b < table.header.size(); ++b) {
        const std::string expected = "r_" + std::to_string(b - m + 1);
        if (table.header[b] != expected)
            throw DataError("'" + path + "': expected column '" + expected + "', got '" +
                            table.header[b] + "'");
    }
    const std::size_t n = table.header.size() - m;
    if (n == 0) throw DataError("'" + path + "': no r_* columns in header");

    // Recover target/seed from the version comment when present.
    std::string target_name;
    for (const auto& comment : table.comments) {
        std::stringstream ss(comment);
        std::string token;
        while (ss >> token) {
            if (token.rfind("target=", 0) == 0) target_name = token.substr(7);
            if (token.rfind("seed=", 0) == 0) ds.seed = std::stoull(token.substr(5));
        }
    }
    if (!target_name.empty())
        for (std::size_t j = 0; j < m; ++j)
            if (ds.param_names[j] == target_name) ds.target_index = j;

    for (const auto& row : table.rows) {
        ds.thetas.emplace_back(std::vector<double>(row.begin(), row.begin() + m),
                               ds.param_names);
        ds.reflectances.emplace_back(std::vector<double>(row.begin() + m, row.end()));
    }
    return ds;
}

}  // namespace upnet
