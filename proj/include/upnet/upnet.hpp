#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "upnet/mlp.hpp"
#include "upnet/simulation.hpp"
#include "upnet/types.hpp"

namespace upnet {

struct UpNetTrainConfig {
    std::size_t hidden = 256;
    TrainConfig train;
};

/// g(r): posterior-mean net with its input/target scalers.
struct MeanNet {
    MlpModel net;
    Scaler x_scaler;
    Scaler y_scaler;  // single feature: the retrieved parameter
    std::vector<double> loss_history;
};

/// u(r): posterior-variance net. Targets are squared standardized residuals
/// divided by `d2_scale` (a positive constant, not an affine standardization,
/// so target non-negativity is preserved).
struct VarianceNet {
    MlpModel net;
    Scaler x_scaler;
    double d2_scale = 1.0;
    std::vector<double> loss_history;
};

/// n(r): posterior-covariance net for a parameter pair (k, j); targets are
/// products of standardized residuals divided by `scale`.
struct CovarianceNet {
    MlpModel net;
    Scaler x_scaler;
    double scale = 1.0;
    std::size_t index_k = 0, index_j = 0;
    double sd_k = 1.0, sd_j = 1.0;  // target scaler sds, for unit conversion
};

struct UpNetModel {
    MeanNet mean_net;
    VarianceNet variance_net;
    std::size_t target_index = 0;
    std::string target_name;
    std::vector<CovarianceNet> covariance_nets;

    // Number of negative raw variance outputs floored to zero at prediction
    // time; shared across copies so batch prediction can report it.
    std::shared_ptr<std::atomic<std::uint64_t>> clamp_count =
        std::make_shared<std::atomic<std::uint64_t>>(0);

    std::size_t input_dim() const { return mean_net.net.input; }
};

namespace detail {

inline void flatten_reflectances(const std::vector<Reflectance>& records,
                                 std::vector<double>& out, std::size_t& dim) {
    if (records.empty()) throw std::invalid_argument("upnet: empty dataset");
    dim = records.front().size();
    out.clear();
    out.reserve(records.size() * dim);
    for (const auto& r : records) {
        if (r.size() != dim) throw std::invalid_argument("upnet: ragged reflectance records");
        out.insert(out.end(), r.values.begin(), r.values.end());
    }
}

}  // namespace detail

/// Trains g on (r_i, theta_i^k) with squared loss over standardized data.
inline MeanNet train_mean_net(const Dataset& d1, const UpNetTrainConfig& config) {
    MeanNet g;
    std::vector<double> inputs;
    std::size_t dim = 0;
    detail::flatten_reflectances(d1.reflectances, inputs, dim);
    std::vector<double> targets(d1.size());
    for (std::size_t i = 0; i < d1.size(); ++i)
        targets[i] = d1.thetas[i].values[d1.target_index];
    g.x_scaler = fit_scaler(inputs, dim);
    g.y_scaler = fit_scaler(targets, 1);
    transform(g.x_scaler, inputs);
    transform(g.y_scaler, targets);
    g.net = init_mlp(dim, config.hidden, config.train.seed);
    g.loss_history = fit(g.net, inputs, targets, config.train);
    return g;
}

/// D2: squared residuals of g in standardized target units, aligned with D1.
/// Reuses D1's reflectances; no forward-model runs.
struct ResidualDataset {
    std::vector<Reflectance> reflectances;  // shared content with D1
    std::vector<double> targets;            // (theta_std^k - g(r))^2, >= 0

    std::size_t size() const { return targets.size(); }
};

inline ResidualDataset build_d2(const MeanNet& g, const Dataset& d1) {
    if (d1.num_bands() != g.net.input)
        throw std::invalid_argument("build_d2: dataset/net dimension mismatch");
    ResidualDataset d2;
    d2.reflectances = d1.reflectances;
    d2.targets.resize(d1.size());
    std::vector<double> x(g.net.input);
    for (std::size_t i = 0; i < d1.size(); ++i) {
        x = d1.reflectances[i].values;
        transform(g.x_scaler, x);
        const double pred = forward_mlp(g.net, x);
        const double target_std =
            (d1.thetas[i].values[d1.target_index] - g.y_scaler.means[0]) / g.y_scaler.sds[0];
        const double residual = target_std - pred;
        d2.targets[i] = residual * residual;
    }
    return d2;
}

/// Trains u on D2 with squared loss; targets divided by their mean (recorded
/// in the model) instead of standardized, keeping them non-negative.
inline VarianceNet train_variance_net(const ResidualDataset& d2, const UpNetTrainConfig& config) {
    VarianceNet u;
    std::vector<double> inputs;
    std::size_t dim = 0;
    detail::flatten_reflectances(d2.reflectances, inputs, dim);
    u.x_scaler = fit_scaler(inputs, dim);
    transform(u.x_scaler, inputs);
    double mean_target = 0.0;
    for (double t : d2.targets) mean_target += t;
    mean_target /= static_cast<double>(d2.size());
    u.d2_scale = mean_target > 0 ? mean_target : 1.0;
    std::vector<double> targets(d2.targets);
    for (double& t : targets) t /= u.d2_scale;
    u.net = init_mlp(dim, config.hidden, config.train.seed + 1);
    u.loss_history = fit(u.net, inputs, targets, config.train);
    return u;
}

/// Trains n(r) on products of standardized residuals of two mean nets.
inline CovarianceNet train_cov_net(const MeanNet& g_k, std::size_t k,
                                   const MeanNet& g_j, std::size_t j,
                                   const Dataset& d1, const UpNetTrainConfig& config) {
    if (k == j)
        throw std::invalid_argument("train_cov_net: k == j (use the variance net)");
    CovarianceNet cov;
    cov.index_k = k;
    cov.index_j = j;
    cov.sd_k = g_k.y_scaler.sds[0];
    cov.sd_j = g_j.y_scaler.sds[0];
    std::vector<double> inputs;
    std::size_t dim = 0;
    detail::flatten_reflectances(d1.reflectances, inputs, dim);
    cov.x_scaler = fit_scaler(inputs, dim);

    std::vector<double> targets(d1.size());
    std::vector<double> x(dim);
    double mean_abs = 0.0;
    for (std::size_t i = 0; i < d1.size(); ++i) {
        x = d1.reflectances[i].values;
        transform(g_k.x_scaler, x);
        const double res_k =
            (d1.thetas[i].values[k] - g_k.y_scaler.means[0]) / g_k.y_scaler.sds[0] -
            forward_mlp(g_k.net, x);
        x = d1.reflectances[i].values;
        transform(g_j.x_scaler, x);
        const double res_j =
            (d1.thetas[i].values[j] - g_j.y_scaler.means[0]) / g_j.y_scaler.sds[0] -
            forward_mlp(g_j.net, x);
        targets[i] = res_k * res_j;
        mean_abs += std::abs(targets[i]);
    }
    mean_abs /= static_cast<double>(d1.size());
    cov.scale = mean_abs > 0 ? mean_abs : 1.0;
    for (double& t : targets) t /= cov.scale;

    transform(cov.x_scaler, inputs);
    cov.net = init_mlp(dim, config.hidden, config.train.seed + 2);
    fit(cov.net, inputs, targets, config.train);
    return cov;
}

// ---------------------------------------------------------------------------
// Prediction. The scalers and output affine maps are folded into the weights
// once per batch, leaving a single fused pass per record. Single and batch
// prediction share this path, so they agree bit for bit.
// ---------------------------------------------------------------------------

namespace detail {

struct FusedNet {
    std::size_t input = 0, hidden = 0;
    std::vector<double> w1t;  // input-major: w1t[i*hidden + j]
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;

    // Folds the input scaler into layer 1 and an affine output map
    // y = out_scale * raw + out_offset into layer 2.
    static FusedNet fold(const MlpModel& net, const Scaler& x_scaler,
                         double out_scale, double out_offset) {
        FusedNet f;
        f.input = net.input;
        f.hidden = net.hidden;
        f.w1t.resize(net.input * net.hidden);
        f.b1 = net.b1;
        for (std::size_t j = 0; j < net.hidden; ++j)
            for (std::size_t i = 0; i < net.input; ++i) {
                const double w = net.w1[j * net.input + i] / x_scaler.sds[i];
                f.w1t[i * net.hidden + j] = w;
                f.b1[j] -= w * x_scaler.means[i];
            }
        f.w2.resize(net.hidden);
        for (std::size_t j = 0; j < net.hidden; ++j) f.w2[j] = out_scale * net.w2[j];
        f.b2 = out_offset + out_scale * net.b2;
        return f;
    }

    double eval(const double* __restrict x, double* __restrict scratch) const {
        const double* __restrict bias = b1.data();
        for (std::size_t j = 0; j < hidden; ++j) scratch[j] = bias[j];
        for (std::size_t i = 0; i < input; ++i) {
            const double xi = x[i];
            const double* __restrict col = w1t.data() + i * hidden;
            for (std::size_t j = 0; j < hidden; ++j) scratch[j] += col[j] * xi;
        }
        // Branchless ReLU dot product over 8 independent accumulators, combined
        // in a fixed order: fast on wide cores, still bit-deterministic.
        const double* __restrict w = w2.data();
        double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        std::size_t j = 0;
        for (; j + 8 <= hidden; j += 8)
            for (std::size_t l = 0; l < 8; ++l) {
                const double z = scratch[j + l];
                acc[l] += w[j + l] * (z > 0 ? z : 0.0);
            }
        for (std::size_t l = 0; j + l < hidden; ++l) {
            const double z = scratch[j + l];
            acc[l] += w[j + l] * (z > 0 ? z : 0.0);
        }
        return b2 + (((acc[0] + acc[1]) + (acc[2] + acc[3])) +
                     ((acc[4] + acc[5]) + (acc[6] + acc[7])));
    }

#if defined(__GNUC__) || defined(__clang__)
#define UPNET_HAVE_VEC8 1
#if defined(__GNUC__) && !defined(__clang__)
#define UPNET_UNROLL __attribute__((optimize("unroll-loops")))
#else
#define UPNET_UNROLL
#endif
    typedef double v8 __attribute__((vector_size(64)));

    // Evaluates 8 records at once from input-major staging xt[i*8 + lane].
    // Every lane runs the same fixed arithmetic order (bias, inputs in
    // ascending order, then a 4-phase ReLU dot), so results are bit-identical
    // regardless of batch composition. Requires hidden % 8 == 0.
    UPNET_UNROLL
    void eval8(const double* __restrict xt, double* __restrict out) const {
        const double* __restrict w1 = w1t.data();
        const double* __restrict bias = b1.data();
        const double* __restrict w = w2.data();
        v8 acc[4];
        for (std::size_t a = 0; a < 4; ++a) acc[a] = v8{};
        for (std::size_t t = 0; t < hidden; t += 8) {
            v8 z[8];
            for (std::size_t a = 0; a < 8; ++a) z[a] = bias[t + a] + v8{};
            for (std::size_t i = 0; i < input; ++i) {
                v8 x;
                __builtin_memcpy(&x, xt + i * 8, sizeof(v8));
                const double* __restrict col = w1 + i * hidden + t;
                for (std::size_t a = 0; a < 8; ++a) z[a] += col[a] * x;
            }
            for (std::size_t a = 0; a < 8; ++a)
                acc[a & 3] = z[a] > 0 ? acc[a & 3] + w[t + a] * z[a] : acc[a & 3];
        }
        const v8 r = b2 + ((acc[0] + acc[1]) + (acc[2] + acc[3]));
        for (std::size_t l = 0; l < 8; ++l) out[l] = r[l];
    }

    // As eval8 but for two 8-record blocks staged as xt[i*16 + lane]: each
    // layer-1 weight broadcast is reused across both blocks, roughly halving
    // load traffic. Per-lane arithmetic is identical to eval8.
    UPNET_UNROLL
    void eval16(const double* __restrict xt, double* __restrict out) const {
        const double* __restrict w1 = w1t.data();
        const double* __restrict bias = b1.data();
        const double* __restrict w = w2.data();
        v8 acc0[4], acc1[4];
        for (std::size_t a = 0; a < 4; ++a) acc0[a] = acc1[a] = v8{};
        for (std::size_t t = 0; t < hidden; t += 8) {
            v8 z0[8], z1[8];
            for (std::size_t a = 0; a < 8; ++a) z0[a] = z1[a] = bias[t + a] + v8{};
            for (std::size_t i = 0; i < input; ++i) {
                v8 x0, x1;
                __builtin_memcpy(&x0, xt + i * 16, sizeof(v8));
                __builtin_memcpy(&x1, xt + i * 16 + 8, sizeof(v8));
                const double* __restrict col = w1 + i * hidden + t;
                for (std::size_t a = 0; a < 8; ++a) {
                    const double wji = col[a];
                    z0[a] += wji * x0;
                    z1[a] += wji * x1;
                }
            }
            for (std::size_t a = 0; a < 8; ++a) {
                const double wj = w[t + a];
                acc0[a & 3] = z0[a] > 0 ? acc0[a & 3] + wj * z0[a] : acc0[a & 3];
                acc1[a & 3] = z1[a] > 0 ? acc1[a & 3] + wj * z1[a] : acc1[a & 3];
            }
        }
        const v8 r0 = b2 + ((acc0[0] + acc0[1]) + (acc0[2] + acc0[3]));
        const v8 r1 = b2 + ((acc1[0] + acc1[1]) + (acc1[2] + acc1[3]));
        for (std::size_t l = 0; l < 8; ++l) {
            out[l] = r0[l];
            out[8 + l] = r1[l];
        }
    }
#endif
};

[[noreturn]] inline void throw_bad_dim(std::size_t idx, std::size_t got, std::size_t want) {
    throw std::invalid_argument("predict_batch: record " + std::to_string(idx) +
                                " has dimension " + std::to_string(got) + ", expected " +
                                std::to_string(want));
}

[[noreturn]] inline void throw_non_finite(std::size_t idx) {
    throw std::runtime_error("predict_batch: non-finite network output at record " +
                             std::to_string(idx));
}

#ifdef UPNET_HAVE_VEC8
// Hot path shared by every vec-capable model shape: exception-free except via
// the cold [[noreturn]] helpers above, so the loop state stays in registers.
// Returns the number of negative raw variances clamped to zero.
inline std::uint64_t predict_blocks(const FusedNet& g, const FusedNet& u,
                                    const std::vector<Reflectance>& records, std::size_t n,
                                    double y_sd, PosteriorSummary* __restrict o) {
    alignas(64) double xt[16 * 16];
    double gm[16], uv[16], sd[16];
    std::uint64_t clamped = 0;
    double finite_probe = 0.0;
    std::size_t i = 0;
    for (; i + 16 <= records.size(); i += 16) {
        for (std::size_t l = 0; l < 16; ++l) {
            if (records[i + l].size() != n) throw_bad_dim(i + l, records[i + l].size(), n);
            const double* __restrict v = records[i + l].values.data();
            for (std::size_t k = 0; k < n; ++k) xt[k * 16 + l] = v[k];
        }
        g.eval16(xt, gm);
        u.eval16(xt, uv);
        for (std::size_t l = 0; l < 16; ++l) sd[l] = y_sd * std::sqrt(uv[l] > 0 ? uv[l] : 0.0);
        for (std::size_t l = 0; l < 16; ++l) {
            clamped += uv[l] < 0 ? 1 : 0;
            o[i + l].mean = gm[l];
            o[i + l].sd = sd[l];
            finite_probe += gm[l] + sd[l];
        }
    }
    for (; i < records.size(); i += 8) {
        const std::size_t lanes = std::min<std::size_t>(8, records.size() - i);
        for (std::size_t l = 0; l < lanes; ++l) {
            if (records[i + l].size() != n) throw_bad_dim(i + l, records[i + l].size(), n);
            const double* __restrict v = records[i + l].values.data();
            for (std::size_t k = 0; k < n; ++k) xt[k * 8 + l] = v[k];
        }
        for (std::size_t l = lanes; l < 8; ++l)
            for (std::size_t k = 0; k < n; ++k) xt[k * 8 + l] = 0.0;
        g.eval8(xt, gm);
        u.eval8(xt, uv);
        for (std::size_t l = 0; l < lanes; ++l) {
            clamped += uv[l] < 0 ? 1 : 0;
            o[i + l].mean = gm[l];
            o[i + l].sd = y_sd * std::sqrt(uv[l] > 0 ? uv[l] : 0.0);
            finite_probe += o[i + l].mean + o[i + l].sd;
        }
    }
    // One cold re-scan names the first offending record, if any.
    if (!std::isfinite(finite_probe))
        for (std::size_t r = 0; r < records.size(); ++r)
            if (!std::isfinite(o[r].mean) || !std::isfinite(o[r].sd)) throw_non_finite(r);
    return clamped;
}
#endif

}  // namespace detail

inline std::vector<PosteriorSummary> predict_batch(const UpNetModel& model,
                                                   const std::vector<Reflectance>& records) {
    const std::size_t n = model.input_dim();
    const double y_mu = model.mean_net.y_scaler.means[0];
    const double y_sd = model.mean_net.y_scaler.sds[0];
    const auto g = detail::FusedNet::fold(model.mean_net.net, model.mean_net.x_scaler,
                                          y_sd, y_mu);
    // u's fused output is the posterior variance in standardized units.
    const auto u = detail::FusedNet::fold(model.variance_net.net, model.variance_net.x_scaler,
                                          model.variance_net.d2_scale, 0.0);
    std::vector<PosteriorSummary> out(records.size());
    std::uint64_t clamped = 0;
    const auto finish = [&](std::size_t i, double mean, double var_std) {
        out[i].mean = mean;
        if (var_std < 0) {
            var_std = 0;
            ++clamped;
        }
        out[i].sd = y_sd * std::sqrt(var_std);
        if (!std::isfinite(out[i].mean) || !std::isfinite(out[i].sd))
            throw std::runtime_error("predict_batch: non-finite network output at record " +
                                     std::to_string(i));
    };
#ifdef UPNET_HAVE_VEC8
    if (g.hidden % 8 == 0 && u.hidden % 8 == 0 && n <= 16) {
        const std::uint64_t clamped_blocks =
            detail::predict_blocks(g, u, records, n, y_sd, out.data());
        if (clamped_blocks)
            model.clamp_count->fetch_add(clamped_blocks, std::memory_order_relaxed);
        return out;
    }
#endif
    std::vector<double> scratch(std::max(g.hidden, u.hidden));
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].size() != n)
            throw std::invalid_argument("predict_batch: record " + std::to_string(i) +
                                        " has dimension " + std::to_string(records[i].size()) +
                                        ", expected " + std::to_string(n));
        const double* x = records[i].values.data();
        finish(i, g.eval(x, scratch.data()), u.eval(x, scratch.data()));
    }
    if (clamped) model.clamp_count->fetch_add(clamped, std::memory_order_relaxed);
    return out;
}

inline PosteriorSummary predict(const UpNetModel& model, const Reflectance& r) {
    return predict_batch(model, {r}).front();
}

/// Posterior covariance of the net's parameter pair, in physical units.
inline double predict_cov(const CovarianceNet& cov, const Reflectance& r) {
    std::vector<double> x = r.values;
    transform(cov.x_scaler, x);
    return cov.scale * forward_mlp(cov.net, x) * cov.sd_k * cov.sd_j;
}

/// As predict_cov but in standardized target units.
inline double predict_cov_standardized(const CovarianceNet& cov, const Reflectance& r) {
    std::vector<double> x = r.values;
    transform(cov.x_scaler, x);
    return cov.scale * forward_mlp(cov.net, x);
}

// ---------------------------------------------------------------------------
// Persistence: one versioned JSON file bundling both nets, scalers, target
// metadata and clamp statistics.
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json to_json(const MlpModel& net) {
    return {{"input", net.input}, {"hidden", net.hidden}, {"w1", net.w1},
            {"b1", net.b1},       {"w2", net.w2},         {"b2", net.b2}};
}

inline MlpModel mlp_from_json(const nlohmann::json& j) {
    MlpModel net;
    net.input = j.at("input").get<std::size_t>();
    net.hidden = j.at("hidden").get<std::size_t>();
    net.w1 = j.at("w1").get<std::vector<double>>();
    net.b1 = j.at("b1").get<std::vector<double>>();
    net.w2 = j.at("w2").get<std::vector<double>>();
    net.b2 = j.at("b2").get<double>();
    if (net.w1.size() != net.input * net.hidden || net.b1.size() != net.hidden ||
        net.w2.size() != net.hidden)
        throw DataError("model file: inconsistent layer shapes");
    return net;
}

inline nlohmann::json to_json(const Scaler& s) {
    return {{"means", s.means}, {"sds", s.sds}};
}

inline Scaler scaler_from_json(const nlohmann::json& j) {
    Scaler s;
    s.means = j.at("means").get<std::vector<double>>();
    s.sds = j.at("sds").get<std::vector<double>>();
    if (s.means.size() != s.sds.size())
        throw DataError("model file: inconsistent scaler shapes");
    return s;
}

}  // namespace detail

inline void save_upnet(const UpNetModel& model, const std::string& path) {
    nlohmann::json j;
    j["format"] = "upnet-model";
    j["version"] = 1;
    j["target_index"] = model.target_index;
    j["target_name"] = model.target_name;
    j["clamp_count"] = model.clamp_count->load();
    j["mean_net"] = {{"net", detail::to_json(model.mean_net.net)},
                     {"x_scaler", detail::to_json(model.mean_net.x_scaler)},
                     {"y_scaler", detail::to_json(model.mean_net.y_scaler)},
                     {"loss_history", model.mean_net.loss_history}};
    j["variance_net"] = {{"net", detail::to_json(model.variance_net.net)},
                         {"x_scaler", detail::to_json(model.variance_net.x_scaler)},
                         {"d2_scale", model.variance_net.d2_scale},
                         {"loss_history", model.variance_net.loss_history}};
    j["covariance_nets"] = nlohmann::json::array();
    for (const auto& cov : model.covariance_nets)
        j["covariance_nets"].push_back({{"net", detail::to_json(cov.net)},
                                        {"x_scaler", detail::to_json(cov.x_scaler)},
                                        {"scale", cov.scale},
                                        {"index_k", cov.index_k},
                                        {"index_j", cov.index_j},
                                        {"sd_k", cov.sd_k},
                                        {"sd_j", cov.sd_j}});
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << j.dump(1) << '\n';
}

inline UpNetModel load_upnet(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError("'" + path + "': " + e.what());
    }
    if (j.value("format", "") != "upnet-model")
        throw DataError("'" + path + "': not an upnet model file");
    if (j.value("version", 0) != 1)
        throw DataError("'" + path + "': unsupported model version");
    UpNetModel model;
    model.target_index = j.at("target_index").get<std::size_t>();
    model.target_name = j.at("target_name").get<std::string>();
    model.clamp_count->store(j.value("clamp_count", std::uint64_t{0}));
    const auto& jm = j.at("mean_net");
    model.mean_net.net = detail::mlp_from_json(jm.at("net"));
    model.mean_net.x_scaler = detail::scaler_from_json(jm.at("x_scaler"));
    model.mean_net.y_scaler = detail::scaler_from_json(jm.at("y_scaler"));
    model.mean_net.loss_history = jm.value("loss_history", std::vector<double>{});
    const auto& jv = j.at("variance_net");
    model.variance_net.net = detail::mlp_from_json(jv.at("net"));
    model.variance_net.x_scaler = detail::scaler_from_json(jv.at("x_scaler"));
    model.variance_net.d2_scale = jv.at("d2_scale").get<double>();
    model.variance_net.loss_history = jv.value("loss_history", std::vector<double>{});
    for (const auto& jc : j.value("covariance_nets", nlohmann::json::array())) {
        CovarianceNet cov;
        cov.net = detail::mlp_from_json(jc.at("net"));
        cov.x_scaler = detail::scaler_from_json(jc.at("x_scaler"));
        cov.scale = jc.at("scale").get<double>();
        cov.index_k = jc.at("index_k").get<std::size_t>();
        cov.index_j = jc.at("index_j").get<std::size_t>();
        cov.sd_k = jc.at("sd_k").get<double>();
        cov.sd_j = jc.at("sd_j").get<double>();
        model.covariance_nets.push_back(std::move(cov));
    }
    return model;
}

/// Convenience wrapper running the full mean/variance pipeline on one dataset.
inline UpNetModel train_upnet(const Dataset& d1, const UpNetTrainConfig& config) {
    UpNetModel model;
    model.target_index = d1.target_index;
    model.target_name = d1.param_names.at(d1.target_index);
    model.mean_net = train_mean_net(d1, config);
    const ResidualDataset d2 = build_d2(model.mean_net, d1);
    model.variance_net = train_variance_net(d2, config);
    return model;
}

}  // namespace upnet
