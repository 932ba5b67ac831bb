#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "upnet/csv.hpp"
#include "upnet/forward_model.hpp"
#include "upnet/mcmc.hpp"
#include "upnet/mlp.hpp"
#include "upnet/oracle.hpp"
#include "upnet/prior.hpp"
#include "upnet/simulation.hpp"
#include "upnet/upnet.hpp"

namespace upnet {

/// Experiment configuration: priors, noise, forward model and the optional
/// train/mcmc/grid sections, all in one JSON file.
struct RunConfig {
    PriorSpec prior;
    NoiseModel noise;
    ForwardFn model;
    std::string model_kind;
    std::size_t num_bands = 0;
    UpNetTrainConfig train;
    McmcConfig mcmc;
    std::optional<GridSpec> grid;
    nlohmann::json raw;
};

namespace detail {

inline PriorEntry prior_entry_from_json(const nlohmann::json& j) {
    const std::string dist = j.at("dist").get<std::string>();
    if (dist == "uniform")
        return Uniform{j.at("low").get<double>(), j.at("high").get<double>()};
    if (dist == "truncnorm")
        return TruncatedGaussian{j.at("mu").get<double>(), j.at("sigma").get<double>(),
                                 j.at("low").get<double>(), j.at("high").get<double>()};
    if (dist == "fixed") return Fixed{j.at("value").get<double>()};
    throw DataError("prior entry: unknown dist '" + dist + "'");
}

inline PriorSpec prior_from_json(const nlohmann::json& j) {
    std::vector<std::string> names;
    std::vector<PriorEntry> entries;
    for (const auto& entry : j) {
        names.push_back(entry.at("name").get<std::string>());
        entries.push_back(prior_entry_from_json(entry));
    }
    return PriorSpec(std::move(names), std::move(entries));
}

}  // namespace detail

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError("config '" + path + "': " + e.what());
    }

    RunConfig config;
    config.raw = j;
    config.prior = detail::prior_from_json(j.at("priors"));
    if (j.contains("noise"))
        config.noise = NoiseModel(j["noise"].value("multiplicative", 0.04),
                                  j["noise"].value("additive", 0.01));

    const auto& jm = j.at("model");
    config.model_kind = jm.at("type").get<std::string>();
    if (config.model_kind == "toy-canopy") {
        ToyCanopyModel model = default_toy_canopy();
        if (jm.contains("sza")) model.sza_deg = jm["sza"].get<double>();
        config.num_bands = model.num_bands();
        config.model = make_forward(std::move(model));
    } else if (config.model_kind == "linear") {
        LinearGaussianModel model(jm.at("matrix_a").get<std::vector<std::vector<double>>>(),
                                  jm.at("offset_b").get<std::vector<double>>());
        config.num_bands = model.output_dim();
        config.model = make_forward(std::move(model));
    } else if (config.model_kind == "tabulated") {
        const Dataset grid_data = read_dataset(jm.at("path").get<std::string>());
        std::vector<std::pair<ParamVector, Reflectance>> grid;
        for (std::size_t i = 0; i < grid_data.size(); ++i)
            grid.emplace_back(grid_data.thetas[i], grid_data.reflectances[i]);
        const std::string mode = jm.value("mode", "nearest");
        TabulatedModel model(std::move(grid), mode == "multilinear" ? LookupMode::Multilinear
                                                                    : LookupMode::Nearest);
        config.num_bands = model.output_dim();
        config.model = make_forward(std::move(model));
    } else {
        throw DataError("config: unknown model type '" + config.model_kind + "'");
    }

    if (j.contains("train")) {
        const auto& jt = j["train"];
        config.train.hidden = jt.value("hidden", std::size_t{256});
        config.train.train.learning_rate = jt.value("learning_rate", 0.001);
        config.train.train.batch_size = jt.value("batch_size", std::size_t{30000});
        config.train.train.epochs = jt.value("epochs", std::size_t{3000});
        config.train.train.l2_coefficient = jt.value("l2", 0.001);
    }
    if (j.contains("mcmc")) {
        const auto& jc = j["mcmc"];
        config.mcmc.burn_in = jc.value("burn_in", std::size_t{100});
        config.mcmc.samples = jc.value("samples", std::size_t{500});
        if (jc.contains("proposal_sds"))
            config.mcmc.proposal_sds = jc["proposal_sds"].get<std::vector<double>>();
    }
    if (j.contains("grid")) {
        GridSpec grid;
        for (const auto& axis : j["grid"].at("axes"))
            grid.axes.push_back({axis.at("low").get<double>(), axis.at("high").get<double>(),
                                 axis.at("points").get<std::size_t>()});
        grid.node_budget = j["grid"].value("node_budget", std::size_t{10000000});
        config.grid = grid;
    }
    return config;
}

}  // namespace upnet
