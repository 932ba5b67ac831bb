#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "upnet/mcmc.hpp"
#include "upnet/prior.hpp"
#include "upnet/types.hpp"

namespace upnet {

/// Tensor grid over the free parameters, ordered as prior.free_indices().
struct GridAxis {
    double low, high;
    std::size_t points;  // >= 2
};

struct GridSpec {
    std::vector<GridAxis> axes;
    std::size_t node_budget = 10000000;

    std::size_t total_nodes() const {
        std::size_t total = 1;
        for (const auto& axis : axes) total *= axis.points;
        return total;
    }
};

/// Grid derived from the prior support at the default resolution:
/// 2001 points in 1-D, 401 per axis in 2-D, 101 per axis in 3-D.
inline GridSpec default_grid(const PriorSpec& prior) {
    const auto free = prior.free_indices();
    if (free.empty() || free.size() > 3)
        throw std::invalid_argument("default_grid: need 1-3 free parameters");
    const std::size_t points = free.size() == 1 ? 2001 : (free.size() == 2 ? 401 : 101);
    GridSpec grid;
    for (std::size_t i : free) {
        const auto [low, high] = prior.support(i);
        grid.axes.push_back({low, high, points});
    }
    return grid;
}

/// Pairwise (cascade) summation: fixed reduction order, lower error than a
/// running sum on large grids.
inline double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

struct GridPosteriorResult {
    PosteriorSummary summary;
    double weight_sum = 0.0;      // normalized weights summed (1 up to rounding)
    double max_log_posterior = -std::numeric_limits<double>::infinity();
};

namespace detail {

struct GridEval {
    std::vector<std::size_t> free;     // parameter indices per grid axis
    std::vector<double> weights;       // normalized posterior mass per node
    std::vector<double> node_values;   // scratch: per-node value of one coordinate
    GridPosteriorResult diag;
    const GridSpec* grid = nullptr;

    // Coordinate of axis a at node `flat`.
    double coord(std::size_t flat, std::size_t a) const {
        std::size_t rest = flat;
        for (std::size_t b = grid->axes.size(); b-- > a + 1;) rest /= grid->axes[b].points;
        const std::size_t idx = rest % grid->axes[a].points;
        const GridAxis& axis = grid->axes[a];
        return axis.low + (axis.high - axis.low) * static_cast<double>(idx) /
                              static_cast<double>(axis.points - 1);
    }
};

/// Evaluates the unnormalized posterior on the tensor grid and normalizes the
/// weights with log-sum-exp stabilization (uniform Riemann node weights).
inline GridEval evaluate_grid(const Reflectance& r, const ForwardFn& model,
                              const PriorSpec& prior, const NoiseModel& noise,
                              const GridSpec& grid) {
    GridEval ev;
    ev.grid = &grid;
    ev.free = prior.free_indices();
    if (ev.free.empty() || ev.free.size() > 3)
        throw std::invalid_argument("grid_posterior: need 1-3 free parameters");
    if (ev.free.size() != grid.axes.size())
        throw std::invalid_argument("grid_posterior: grid/free-parameter mismatch");
    for (const auto& axis : grid.axes) {
        if (!(axis.low < axis.high))
            throw std::invalid_argument("grid_posterior: axis requires low < high");
        if (axis.points < 2)
            throw std::invalid_argument("grid_posterior: axis requires >= 2 points");
    }
    const std::size_t total = grid.total_nodes();
    if (total > grid.node_budget)
        throw std::invalid_argument("grid_posterior: node budget exceeded (" +
                                    std::to_string(total) + " > " +
                                    std::to_string(grid.node_budget) + ")");

    ParamVector theta = prior.means();
    std::vector<double> logw(total);
    double max_logw = -std::numeric_limits<double>::infinity();
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (std::size_t a = 0; a < ev.free.size(); ++a)
            theta.values[ev.free[a]] = ev.coord(flat, a);
        logw[flat] = log_posterior(theta, r, model, prior, noise);
        if (logw[flat] > max_logw) max_logw = logw[flat];
    }
    ev.diag.max_log_posterior = max_logw;
    if (!std::isfinite(max_logw))
        throw std::runtime_error("grid_posterior: all grid weights are zero (max log "
                                 "posterior = -inf)");
    ev.weights.resize(total);
    for (std::size_t flat = 0; flat < total; ++flat)
        ev.weights[flat] = std::exp(logw[flat] - max_logw);
    const double norm = pairwise_sum(ev.weights);
    for (double& w : ev.weights) w /= norm;
    ev.diag.weight_sum = pairwise_sum(ev.weights);
    ev.node_values.resize(total);
    return ev;
}

inline double grid_moment(GridEval& ev, const std::function<double(std::size_t)>& value) {
    for (std::size_t flat = 0; flat < ev.weights.size(); ++flat)
        ev.node_values[flat] = ev.weights[flat] * value(flat);
    return pairwise_sum(ev.node_values);
}

/// Axis position of parameter index k within the free-parameter list.
inline std::size_t axis_of(const GridEval& ev, std::size_t k) {
    for (std::size_t a = 0; a < ev.free.size(); ++a)
        if (ev.free[a] == k) return a;
    throw std::invalid_argument("grid_posterior: target parameter is not free");
}

}  // namespace detail

inline GridPosteriorResult grid_posterior_full(const Reflectance& r, const ForwardFn& model,
                                               const PriorSpec& prior, const NoiseModel& noise,
                                               const GridSpec& grid, std::size_t target_index) {
    auto ev = detail::evaluate_grid(r, model, prior, noise, grid);
    const std::size_t a = detail::axis_of(ev, target_index);
    const double mean =
        detail::grid_moment(ev, [&](std::size_t flat) { return ev.coord(flat, a); });
    const double var = detail::grid_moment(ev, [&](std::size_t flat) {
        const double d = ev.coord(flat, a) - mean;
        return d * d;
    });
    ev.diag.summary.mean = mean;
    ev.diag.summary.sd = std::sqrt(std::max(var, 0.0));
    return ev.diag;
}

inline PosteriorSummary grid_posterior(const Reflectance& r, const ForwardFn& model,
                                       const PriorSpec& prior, const NoiseModel& noise,
                                       const GridSpec& grid, std::size_t target_index) {
    return grid_posterior_full(r, model, prior, noise, grid, target_index).summary;
}

inline double grid_posterior_cov(const Reflectance& r, const ForwardFn& model,
                                 const PriorSpec& prior, const NoiseModel& noise,
                                 const GridSpec& grid, std::size_t k, std::size_t j) {
    auto ev = detail::evaluate_grid(r, model, prior, noise, grid);
    const std::size_t ak = detail::axis_of(ev, k);
    const std::size_t aj = detail::axis_of(ev, j);
    const double mean_k =
        detail::grid_moment(ev, [&](std::size_t flat) { return ev.coord(flat, ak); });
    const double mean_j =
        detail::grid_moment(ev, [&](std::size_t flat) { return ev.coord(flat, aj); });
    return detail::grid_moment(ev, [&](std::size_t flat) {
        return (ev.coord(flat, ak) - mean_k) * (ev.coord(flat, aj) - mean_j);
    });
}

// ---------------------------------------------------------------------------
// Closed-form linear-Gaussian posterior: standard conjugate result for
// f(theta) = A theta + b, Gaussian prior and Gaussian noise.
// ---------------------------------------------------------------------------

struct GaussianPosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    PosteriorSummary summary(std::size_t k) const {
        return {mean(static_cast<Eigen::Index>(k)),
                std::sqrt(cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)))};
    }
};

inline GaussianPosterior analytic_posterior(const LinearGaussianModel& model,
                                            const Eigen::VectorXd& prior_mean,
                                            const Eigen::MatrixXd& prior_cov,
                                            const Eigen::MatrixXd& noise_cov,
                                            const Reflectance& r) {
    const auto m = static_cast<Eigen::Index>(model.input_dim());
    const auto n = static_cast<Eigen::Index>(model.output_dim());
    if (prior_mean.size() != m || prior_cov.rows() != m || prior_cov.cols() != m)
        throw std::invalid_argument("analytic_posterior: prior dimension mismatch");
    if (noise_cov.rows() != n || noise_cov.cols() != n || static_cast<Eigen::Index>(r.size()) != n)
        throw std::invalid_argument("analytic_posterior: observation dimension mismatch");

    Eigen::MatrixXd a(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) a(i, j) = model.matrix_a[i][j];
    Eigen::VectorXd resid(n);
    for (Eigen::Index i = 0; i < n; ++i) resid(i) = r[i] - model.offset_b[i];

    const Eigen::LLT<Eigen::MatrixXd> prior_llt(prior_cov);
    const Eigen::LLT<Eigen::MatrixXd> noise_llt(noise_cov);
    if (prior_llt.info() != Eigen::Success || noise_llt.info() != Eigen::Success)
        throw std::invalid_argument("analytic_posterior: covariance not positive definite");

    const Eigen::MatrixXd prior_prec = prior_llt.solve(Eigen::MatrixXd::Identity(m, m));
    const Eigen::MatrixXd info = prior_prec + a.transpose() * noise_llt.solve(a);
    const Eigen::LLT<Eigen::MatrixXd> info_llt(info);
    if (info_llt.info() != Eigen::Success)
        throw std::runtime_error("analytic_posterior: singular information matrix");

    GaussianPosterior post;
    post.cov = info_llt.solve(Eigen::MatrixXd::Identity(m, m));
    post.mean = info_llt.solve(prior_prec * prior_mean + a.transpose() * noise_llt.solve(resid));
    return post;
}

}  // namespace upnet
