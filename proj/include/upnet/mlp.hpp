#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "upnet/rng.hpp"

namespace upnet {

/// One-hidden-layer perceptron: out = w2 . relu(W1 x + b1) + b2.
struct MlpModel {
    std::size_t input = 0, hidden = 0;
    std::vector<double> w1;  // hidden x input, row-major
    std::vector<double> b1;  // hidden
    std::vector<double> w2;  // hidden
    double b2 = 0.0;

    std::size_t num_params() const { return w1.size() + b1.size() + w2.size() + 1; }
};

struct MlpGradient {
    std::vector<double> w1, b1, w2;
    double b2 = 0.0;
};

struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t batch_size = 30000;
    std::size_t epochs = 3000;
    double l2_coefficient = 0.001;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(learning_rate > 0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
        if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
        if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
        if (l2_coefficient < 0) throw std::invalid_argument("TrainConfig: l2_coefficient must be >= 0");
    }
};

/// He-style init for ReLU: weights uniform in +-sqrt(6/fan_in), biases zero.
inline MlpModel init_mlp(std::size_t input, std::size_t hidden, std::uint64_t seed) {
    if (input < 1 || hidden < 1)
        throw std::invalid_argument("init_mlp: layer sizes must be >= 1");
    MlpModel model;
    model.input = input;
    model.hidden = hidden;
    Rng rng = make_stream(seed, 0x171aULL);
    const double half1 = std::sqrt(6.0 / static_cast<double>(input));
    model.w1.resize(hidden * input);
    for (double& w : model.w1) w = draw_uniform(rng, -half1, half1);
    model.b1.assign(hidden, 0.0);
    const double half2 = std::sqrt(6.0 / static_cast<double>(hidden));
    model.w2.resize(hidden);
    for (double& w : model.w2) w = draw_uniform(rng, -half2, half2);
    return model;
}

inline double forward_mlp(const MlpModel& model, const double* x, std::size_t len) {
    if (len != model.input)
        throw std::invalid_argument("forward_mlp: input dimension mismatch");
    double out = model.b2;
    for (std::size_t j = 0; j < model.hidden; ++j) {
        double z = model.b1[j];
        const double* row = model.w1.data() + j * model.input;
        for (std::size_t i = 0; i < model.input; ++i) z += row[i] * x[i];
        if (z > 0) out += model.w2[j] * z;
    }
    return out;
}

inline double forward_mlp(const MlpModel& model, const std::vector<double>& x) {
    return forward_mlp(model, x.data(), x.size());
}

/// Mean squared loss over the batch plus l2 * sum(weights^2), with exact
/// reverse-mode gradients. Biases are excluded from the penalty.
inline std::pair<double, MlpGradient> loss_and_gradient(
    const MlpModel& model, const double* inputs, const double* targets,
    std::size_t count, double l2_coefficient) {
    if (count == 0) throw std::invalid_argument("loss_and_gradient: empty batch");
    MlpGradient grad;
    grad.w1.assign(model.w1.size(), 0.0);
    grad.b1.assign(model.b1.size(), 0.0);
    grad.w2.assign(model.w2.size(), 0.0);

    const std::size_t n = model.input;
    const std::size_t h = model.hidden;
    std::vector<double> act(h);
    double loss = 0.0;
    const double inv_count = 1.0 / static_cast<double>(count);
    for (std::size_t s = 0; s < count; ++s) {
        const double* x = inputs + s * n;
        double out = model.b2;
        for (std::size_t j = 0; j < h; ++j) {
            double z = model.b1[j];
            const double* row = model.w1.data() + j * n;
            for (std::size_t i = 0; i < n; ++i) z += row[i] * x[i];
            act[j] = z > 0 ? z : 0.0;
            out += model.w2[j] * act[j];
        }
        const double err = out - targets[s];
        loss += err * err * inv_count;
        const double dout = 2.0 * err * inv_count;
        grad.b2 += dout;
        for (std::size_t j = 0; j < h; ++j) {
            grad.w2[j] += dout * act[j];
            if (act[j] > 0) {
                const double dz = dout * model.w2[j];
                grad.b1[j] += dz;
                double* grow = grad.w1.data() + j * n;
                for (std::size_t i = 0; i < n; ++i) grow[i] += dz * x[i];
            }
        }
    }
    if (l2_coefficient > 0) {
        double penalty = 0.0;
        for (std::size_t i = 0; i < model.w1.size(); ++i) {
            penalty += model.w1[i] * model.w1[i];
            grad.w1[i] += 2.0 * l2_coefficient * model.w1[i];
        }
        for (std::size_t j = 0; j < h; ++j) {
            penalty += model.w2[j] * model.w2[j];
            grad.w2[j] += 2.0 * l2_coefficient * model.w2[j];
        }
        loss += l2_coefficient * penalty;
    }
    return {loss, std::move(grad)};
}

inline std::pair<double, MlpGradient> loss_and_gradient(
    const MlpModel& model, const std::vector<double>& inputs,
    const std::vector<double>& targets, double l2_coefficient) {
    return loss_and_gradient(model, inputs.data(), targets.data(), targets.size(),
                             l2_coefficient);
}

struct AdamState {
    std::vector<double> m_w1, v_w1, m_b1, v_b1, m_w2, v_w2;
    double m_b2 = 0.0, v_b2 = 0.0;
    std::size_t step = 0;

    static AdamState zeros(const MlpModel& model) {
        AdamState s;
        s.m_w1.assign(model.w1.size(), 0.0);
        s.v_w1.assign(model.w1.size(), 0.0);
        s.m_b1.assign(model.b1.size(), 0.0);
        s.v_b1.assign(model.b1.size(), 0.0);
        s.m_w2.assign(model.w2.size(), 0.0);
        s.v_w2.assign(model.w2.size(), 0.0);
        return s;
    }
};

namespace detail {
inline void adam_update(double* param, double* m, double* v, const double* g,
                        std::size_t len, double lr, double b1, double b2, double eps,
                        double bc1, double bc2) {
    for (std::size_t i = 0; i < len; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        param[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}
}  // namespace detail

/// Standard bias-corrected Adam update.
inline void adam_step(MlpModel& model, const MlpGradient& grad, AdamState& state,
                      const TrainConfig& config) {
    if (grad.w1.size() != model.w1.size() || grad.w2.size() != model.w2.size())
        throw std::invalid_argument("adam_step: gradient shape mismatch");
    ++state.step;
    const double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(state.step));
    detail::adam_update(model.w1.data(), state.m_w1.data(), state.v_w1.data(), grad.w1.data(),
                        model.w1.size(), config.learning_rate, config.adam_beta1,
                        config.adam_beta2, config.adam_epsilon, bc1, bc2);
    detail::adam_update(model.b1.data(), state.m_b1.data(), state.v_b1.data(), grad.b1.data(),
                        model.b1.size(), config.learning_rate, config.adam_beta1,
                        config.adam_beta2, config.adam_epsilon, bc1, bc2);
    detail::adam_update(model.w2.data(), state.m_w2.data(), state.v_w2.data(), grad.w2.data(),
                        model.w2.size(), config.learning_rate, config.adam_beta1,
                        config.adam_beta2, config.adam_epsilon, bc1, bc2);
    detail::adam_update(&model.b2, &state.m_b2, &state.v_b2, &grad.b2, 1,
                        config.learning_rate, config.adam_beta1, config.adam_beta2,
                        config.adam_epsilon, bc1, bc2);
}

/// Mini-batch training with per-epoch Fisher-Yates shuffling. Returns the
/// mean batch loss per epoch. Aborts on NaN loss with the offending epoch and
/// batch index.
inline std::vector<double> fit(MlpModel& model, const std::vector<double>& inputs,
                               const std::vector<double>& targets, const TrainConfig& config) {
    config.validate();
    const std::size_t count = targets.size();
    if (count == 0) throw std::invalid_argument("fit: no samples");
    if (inputs.size() != count * model.input)
        throw std::invalid_argument("fit: inputs/targets misaligned");

    AdamState state = AdamState::zeros(model);
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> batch_x(std::min(config.batch_size, count) * model.input);
    std::vector<double> batch_y(std::min(config.batch_size, count));
    std::vector<double> history;
    history.reserve(config.epochs);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng = make_stream(config.seed, 0x5A0FFULL + epoch);
        for (std::size_t i = count; i > 1; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(order[i - 1], order[pick(shuffle_rng)]);
        }
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < count; start += config.batch_size) {
            const std::size_t len = std::min(config.batch_size, count - start);
            for (std::size_t s = 0; s < len; ++s) {
                const std::size_t src = order[start + s];
                std::copy_n(inputs.data() + src * model.input, model.input,
                            batch_x.data() + s * model.input);
                batch_y[s] = targets[src];
            }
            auto [loss, grad] = loss_and_gradient(model, batch_x.data(), batch_y.data(),
                                                  len, config.l2_coefficient);
            if (!std::isfinite(loss))
                throw std::runtime_error("fit: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(batches));
            adam_step(model, grad, state, config);
            epoch_loss += loss;
            ++batches;
        }
        history.push_back(epoch_loss / static_cast<double>(batches));
    }
    return history;
}

// ---------------------------------------------------------------------------
// Feature standardization.
// ---------------------------------------------------------------------------

struct Scaler {
    std::vector<double> means;
    std::vector<double> sds;  // floored at 1e-12

    std::size_t dim() const { return means.size(); }
};

inline Scaler fit_scaler(const std::vector<double>& values, std::size_t dim) {
    if (dim == 0 || values.empty() || values.size() % dim != 0)
        throw std::invalid_argument("fit_scaler: bad shape");
    const std::size_t count = values.size() / dim;
    Scaler scaler;
    scaler.means.assign(dim, 0.0);
    scaler.sds.assign(dim, 0.0);
    for (std::size_t s = 0; s < count; ++s)
        for (std::size_t i = 0; i < dim; ++i) scaler.means[i] += values[s * dim + i];
    for (double& mu : scaler.means) mu /= static_cast<double>(count);
    for (std::size_t s = 0; s < count; ++s)
        for (std::size_t i = 0; i < dim; ++i) {
            const double d = values[s * dim + i] - scaler.means[i];
            scaler.sds[i] += d * d;
        }
    for (double& sd : scaler.sds)
        sd = std::max(std::sqrt(sd / static_cast<double>(count)), 1e-12);
    return scaler;
}

inline void transform(const Scaler& scaler, std::vector<double>& values) {
    const std::size_t dim = scaler.dim();
    for (std::size_t s = 0; s < values.size() / dim; ++s)
        for (std::size_t i = 0; i < dim; ++i) {
            double& v = values[s * dim + i];
            v = (v - scaler.means[i]) / scaler.sds[i];
        }
}

inline void inverse_transform(const Scaler& scaler, std::vector<double>& values) {
    const std::size_t dim = scaler.dim();
    for (std::size_t s = 0; s < values.size() / dim; ++s)
        for (std::size_t i = 0; i < dim; ++i) {
            double& v = values[s * dim + i];
            v = v * scaler.sds[i] + scaler.means[i];
        }
}

}  // namespace upnet
