// Command-line surface: simulate | train | predict | mcmc | oracle |
// evaluate | bench. Every run writes a manifest beside its outputs.
//
// Exit codes: 0 success, 2 usage, 3 data error, 4 numerical failure.

#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "upnet/config.hpp"
#include "upnet/io.hpp"
#include "upnet/metrics.hpp"
#include "upnet/oracle.hpp"
#include "upnet/simulation.hpp"
#include "upnet/upnet.hpp"

namespace {

using namespace upnet;

nlohmann::json args_json(const std::map<std::string, std::string>& kv) {
    nlohmann::json j;
    for (const auto& [k, v] : kv) j[k] = v;
    return j;
}

int cmd_simulate(const std::string& config_path, std::size_t count,
                 const std::string& target, std::uint64_t seed, const std::string& out) {
    const RunConfig config = load_config(config_path);
    std::size_t target_index = 0;
    for (std::size_t i = 0; i < config.prior.size(); ++i)
        if (config.prior.names[i] == target) target_index = i + 1;
    if (target_index == 0) {
        std::cerr << "error: target '" << target << "' not in prior\n";
        return 3;
    }
    --target_index;
    const Dataset ds =
        simulate_dataset(config.model, config.prior, config.noise, count, target_index, seed);
    write_dataset(ds, out);
    write_manifest(out, "simulate",
                   args_json({{"config", config_path},
                              {"count", std::to_string(count)},
                              {"target", target},
                              {"out", out}}),
                   seed, {{config_path, file_digest(config_path)}});
    std::cout << "wrote " << ds.size() << " records to " << out << "\n";
    return 0;
}

int cmd_train(const std::string& dataset_path, const std::string& target,
              std::uint64_t seed, const std::string& out, std::size_t hidden,
              std::size_t epochs, std::size_t batch, double lr, double l2) {
    Dataset ds = read_dataset(dataset_path);
    if (!target.empty()) {
        bool found = false;
        for (std::size_t i = 0; i < ds.param_names.size(); ++i)
            if (ds.param_names[i] == target) {
                ds.target_index = i;
                found = true;
            }
        if (!found) {
            std::cerr << "error: target '" << target << "' not in dataset\n";
            return 3;
        }
    }
    UpNetTrainConfig config;
    config.hidden = hidden;
    config.train.epochs = epochs;
    config.train.batch_size = batch;
    config.train.learning_rate = lr;
    config.train.l2_coefficient = l2;
    config.train.seed = seed;
    const UpNetModel model = train_upnet(ds, config);
    save_upnet(model, out);
    write_manifest(out, "train",
                   args_json({{"dataset", dataset_path},
                              {"target", model.target_name},
                              {"hidden", std::to_string(hidden)},
                              {"epochs", std::to_string(epochs)},
                              {"batch", std::to_string(batch)},
                              {"out", out}}),
                   seed, {{dataset_path, file_digest(dataset_path)}});
    std::cout << "trained UpNet for " << model.target_name << " on " << ds.size()
              << " records; final losses g=" << model.mean_net.loss_history.back()
              << " u=" << model.variance_net.loss_history.back() << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& in_path,
                const std::string& out) {
    const UpNetModel model = load_upnet(model_path);
    const auto records = ingest_reflectance_csv(in_path, model.input_dim());
    const auto summaries = predict_batch(model, records);
    write_summaries_csv(out, records, summaries);
    write_manifest(out, "predict",
                   args_json({{"model", model_path}, {"in", in_path}, {"out", out}}), 0,
                   {{model_path, file_digest(model_path)}, {in_path, file_digest(in_path)}});
    std::cout << "predicted " << summaries.size() << " records ("
              << model.clamp_count->load() << " variance clamps)\n";
    return 0;
}

int cmd_mcmc(const std::string& config_path, const std::string& in_path,
             std::uint64_t seed, const std::string& out, const std::string& target) {
    const RunConfig config = load_config(config_path);
    const std::size_t target_index = config.prior.means().index_of(target);
    const auto records = ingest_reflectance_csv(in_path, config.num_bands);
    std::vector<PosteriorSummary> summaries(records.size());
    std::vector<double> acceptance(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        McmcConfig mcmc = config.mcmc;
        mcmc.seed = splitmix64(seed) ^ i;  // per-pixel substream
        const Chain chain = run_chain(records[i], config.model, config.prior, config.noise, mcmc);
        summaries[i] = summarize(chain, target_index);
        acceptance[i] = chain.acceptance_rate;
    }
    write_summaries_csv(out, records, summaries, {"acceptance_rate"}, {acceptance});
    write_manifest(out, "mcmc",
                   args_json({{"config", config_path},
                              {"in", in_path},
                              {"target", target},
                              {"out", out}}),
                   seed,
                   {{config_path, file_digest(config_path)}, {in_path, file_digest(in_path)}});
    std::cout << "sampled " << records.size() << " pixels\n";
    return 0;
}

int cmd_oracle(const std::string& config_path, const std::string& in_path,
               const std::string& out, const std::string& target) {
    const RunConfig config = load_config(config_path);
    const std::size_t target_index = config.prior.means().index_of(target);
    const GridSpec grid = config.grid ? *config.grid : default_grid(config.prior);
    const auto records = ingest_reflectance_csv(in_path, config.num_bands);
    std::vector<PosteriorSummary> summaries(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        summaries[i] = grid_posterior(records[i], config.model, config.prior, config.noise,
                                      grid, target_index);
    write_summaries_csv(out, records, summaries);
    write_manifest(out, "oracle",
                   args_json({{"config", config_path},
                              {"in", in_path},
                              {"target", target},
                              {"out", out}}),
                   0,
                   {{config_path, file_digest(config_path)}, {in_path, file_digest(in_path)}});
    std::cout << "integrated " << records.size() << " pixels on a " << grid.total_nodes()
              << "-node grid\n";
    return 0;
}

// Reads mean/sd columns back out of a prediction CSV.
std::vector<PosteriorSummary> read_summaries(const std::string& path) {
    const csv::Table table = csv::read_table(path);
    std::size_t mean_col = table.header.size(), sd_col = table.header.size();
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (table.header[c] == "mean") mean_col = c;
        if (table.header[c] == "sd") sd_col = c;
    }
    if (mean_col == table.header.size() || sd_col == table.header.size())
        throw DataError("'" + path + "': missing mean/sd columns");
    std::vector<PosteriorSummary> out;
    for (const auto& row : table.rows) out.push_back({row[mean_col], row[sd_col]});
    return out;
}

int cmd_evaluate(const std::string& a_path, const std::string& b_path, const std::string& out) {
    const auto a = read_summaries(a_path);
    const auto b = read_summaries(b_path);
    const ConsistencyReport report = consistency_report(a_path, b_path, a, b);
    csv::Table table;
    table.comments.push_back(" upnet-report v1");
    table.header = {"quantity", "r2", "rmse", "n", "slope", "intercept", "constant_truth"};
    auto row = [](const MetricReport& m) {
        return std::vector<double>{0, m.r2, m.rmse, static_cast<double>(m.n), m.slope,
                                   m.intercept, m.constant_truth ? 1.0 : 0.0};
    };
    auto mean_row = row(report.means);
    mean_row[0] = 0;  // 0 = means, 1 = sds
    auto sd_row = row(report.sds);
    sd_row[0] = 1;
    table.rows = {mean_row, sd_row};
    csv::write_table(out, table);
    write_manifest(out, "evaluate", args_json({{"a", a_path}, {"b", b_path}, {"out", out}}), 0,
                   {{a_path, file_digest(a_path)}, {b_path, file_digest(b_path)}});
    std::cout << "means: R2=" << report.means.r2 << " RMSE=" << report.means.rmse
              << " slope=" << report.means.slope << " intercept=" << report.means.intercept
              << "\n";
    if (report.sds.constant_truth)
        std::cout << "sds:   RMSE=" << report.sds.rmse << " (constant truth, R2 undefined)\n";
    else
        std::cout << "sds:   R2=" << report.sds.r2 << " RMSE=" << report.sds.rmse
                  << " slope=" << report.sds.slope << " intercept=" << report.sds.intercept
                  << "\n";
    return 0;
}

int cmd_bench(const std::string& model_path, const std::string& config_path,
              std::size_t count, std::size_t mcmc_pixels, std::uint64_t seed,
              const std::string& out) {
    const UpNetModel model = load_upnet(model_path);
    const RunConfig config = load_config(config_path);
    const std::size_t target_index = config.prior.means().index_of(model.target_name);
    const Dataset ds =
        simulate_dataset(config.model, config.prior, config.noise, count, target_index, seed);
    const auto [up, mc] =
        bench(model, ds.reflectances,
              [&](const Reflectance& r) {
                  McmcConfig mcmc = config.mcmc;
                  mcmc.seed = seed;
                  return summarize(run_chain(r, config.model, config.prior, config.noise, mcmc),
                                   target_index);
              },
              mcmc_pixels);
    const double ratio = mc.per_pixel_time_s / up.per_pixel_time_s;
    csv::Table table;
    table.comments.push_back(" upnet-bench v1");
    table.header = {"upnet_records", "upnet_per_pixel_s", "mcmc_pixels", "mcmc_per_pixel_s",
                    "ratio"};
    table.rows = {{static_cast<double>(up.total_records), up.per_pixel_time_s,
                   static_cast<double>(mc.total_records), mc.per_pixel_time_s, ratio}};
    csv::write_table(out, table);
    write_manifest(out, "bench",
                   args_json({{"model", model_path},
                              {"config", config_path},
                              {"count", std::to_string(count)},
                              {"out", out}}),
                   seed,
                   {{model_path, file_digest(model_path)},
                    {config_path, file_digest(config_path)}});
    std::cout << "upnet " << up.per_pixel_time_s << " s/pixel over " << up.total_records
              << " records; mcmc " << mc.per_pixel_time_s << " s/pixel over "
              << mc.total_records << " pixels; ratio " << ratio << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UpNet: paired neural estimators of posterior mean and variance "
                 "for forward-model inversion, with MCMC and grid-oracle references"};
    app.require_subcommand(1);

    std::string config_path, dataset_path, model_path, in_path, out_path, target;
    std::string a_path, b_path;
    std::uint64_t seed = 0;
    std::size_t count = 300000, hidden = 256, epochs = 3000, batch = 30000, mcmc_pixels = 20;
    double lr = 0.001, l2 = 0.001;

    auto* simulate = app.add_subcommand("simulate", "simulate a (theta, reflectance) dataset");
    simulate->add_option("--config", config_path, "JSON config")->required();
    simulate->add_option("--count", count, "number of records")->required();
    simulate->add_option("--target", target, "retrieved parameter name")->required();
    simulate->add_option("--seed", seed, "RNG seed")->required();
    simulate->add_option("--out", out_path, "output dataset CSV")->required();

    auto* train = app.add_subcommand("train", "train UpNet (mean + variance nets)");
    train->add_option("--dataset", dataset_path, "dataset CSV")->required();
    train->add_option("--target", target, "retrieved parameter name (default from dataset)");
    train->add_option("--seed", seed, "RNG seed")->required();
    train->add_option("--out", out_path, "output model file")->required();
    train->add_option("--hidden", hidden, "hidden units");
    train->add_option("--epochs", epochs, "training epochs");
    train->add_option("--batch", batch, "batch size");
    train->add_option("--lr", lr, "learning rate");
    train->add_option("--l2", l2, "L2 coefficient");

    auto* predict = app.add_subcommand("predict", "predict posterior mean/sd with UpNet");
    predict->add_option("--model", model_path, "model file")->required();
    predict->add_option("--in", in_path, "reflectance CSV")->required();
    predict->add_option("--out", out_path, "output prediction CSV")->required();

    auto* mcmc = app.add_subcommand("mcmc", "Metropolis-Hastings posterior summaries");
    mcmc->add_option("--config", config_path, "JSON config")->required();
    mcmc->add_option("--in", in_path, "reflectance CSV")->required();
    mcmc->add_option("--target", target, "retrieved parameter name")->required();
    mcmc->add_option("--seed", seed, "RNG seed")->required();
    mcmc->add_option("--out", out_path, "output CSV")->required();

    auto* oracle = app.add_subcommand("oracle", "dense-grid posterior summaries");
    oracle->add_option("--config", config_path, "JSON config")->required();
    oracle->add_option("--in", in_path, "reflectance CSV")->required();
    oracle->add_option("--target", target, "retrieved parameter name")->required();
    oracle->add_option("--out", out_path, "output CSV")->required();

    auto* evaluate = app.add_subcommand("evaluate", "consistency report between two runs");
    evaluate->add_option("--a", a_path, "prediction CSV A")->required();
    evaluate->add_option("--b", b_path, "prediction CSV B")->required();
    evaluate->add_option("--out", out_path, "output report CSV")->required();

    auto* bench_cmd = app.add_subcommand("bench", "UpNet vs MCMC speed benchmark");
    bench_cmd->add_option("--model", model_path, "model file")->required();
    bench_cmd->add_option("--config", config_path, "JSON config")->required();
    bench_cmd->add_option("--count", count, "UpNet batch size");
    bench_cmd->add_option("--mcmc-pixels", mcmc_pixels, "pixels timed under MCMC");
    bench_cmd->add_option("--seed", seed, "RNG seed")->required();
    bench_cmd->add_option("--out", out_path, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed())
            return cmd_simulate(config_path, count, target, seed, out_path);
        if (train->parsed())
            return cmd_train(dataset_path, target, seed, out_path, hidden, epochs, batch, lr, l2);
        if (predict->parsed()) return cmd_predict(model_path, in_path, out_path);
        if (mcmc->parsed()) return cmd_mcmc(config_path, in_path, seed, out_path, target);
        if (oracle->parsed()) return cmd_oracle(config_path, in_path, out_path, target);
        if (evaluate->parsed()) return cmd_evaluate(a_path, b_path, out_path);
        if (bench_cmd->parsed())
            return cmd_bench(model_path, config_path, count, mcmc_pixels, seed, out_path);
    } catch (const upnet::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    }
    return 2;
}
