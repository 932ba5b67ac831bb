#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "upnet/forward_model.hpp"
#include "upnet/prior.hpp"
#include "upnet/rng.hpp"
#include "upnet/simulation.hpp"
#include "upnet/types.hpp"

namespace upnet {

struct McmcConfig {
    std::size_t burn_in = 100;
    std::size_t samples = 500;
    std::vector<double> proposal_sds;  // one per free (non-Fixed) parameter
    std::uint64_t seed = 0;
};

/// Scale-aware default: per-parameter proposal sd = 0.1 x prior sd.
inline std::vector<double> default_proposal_sds(const PriorSpec& prior) {
    std::vector<double> sds;
    for (std::size_t i : prior.free_indices()) sds.push_back(0.1 * prior.sd(i));
    return sds;
}

struct Chain {
    std::vector<ParamVector> states;      // post burn-in
    std::vector<double> log_posterior;    // trace aligned with states
    double acceptance_rate = 0.0;
    std::size_t accepted = 0, proposed = 0;
};

/// Unnormalized log posterior: sum_b log N(r_b; f(theta)_b, sigma_b^2) + log p(theta),
/// sigma_b = multiplicative_level * f(theta)_b + additive_sd. Fixed parameters
/// are pinned and contribute no prior term.
inline double log_posterior(const ParamVector& theta, const Reflectance& r,
                            const ForwardFn& model, const PriorSpec& prior,
                            const NoiseModel& noise) {
    static const double neg_inf = -std::numeric_limits<double>::infinity();
    const double logp_prior = prior.log_density(theta);
    if (!std::isfinite(logp_prior)) return neg_inf;
    const Reflectance f = model(theta);
    if (f.size() != r.size())
        throw std::invalid_argument("log_posterior: observation dimension mismatch");
    double acc = logp_prior;
    for (std::size_t b = 0; b < r.size(); ++b) {
        const double sigma = noise.sigma(f[b]);
        if (!(sigma > 0)) return neg_inf;
        const double z = (r[b] - f[b]) / sigma;
        acc += -0.5 * z * z - std::log(sigma);
    }
    return acc;
}

using LogPosteriorFn = std::function<double(const ParamVector&)>;

struct McmcState {
    ParamVector theta;
    double log_posterior = 0.0;
};

/// One random-walk Metropolis-Hastings step over the free parameters.
inline bool mh_step(McmcState& state, Rng& rng, const std::vector<std::size_t>& free_indices,
                    const std::vector<double>& proposal_sds, const LogPosteriorFn& logpost) {
    ParamVector proposal = state.theta;
    for (std::size_t p = 0; p < free_indices.size(); ++p)
        proposal.values[free_indices[p]] += draw_normal(rng, 0.0, proposal_sds[p]);
    const double logp_new = logpost(proposal);
    const double log_u = std::log(draw_uniform(rng, 0.0, 1.0));
    if (log_u < logp_new - state.log_posterior) {
        state.theta = std::move(proposal);
        state.log_posterior = logp_new;
        return true;
    }
    return false;
}

/// Runs one chain started at the prior means, discarding `burn_in` states and
/// recording `samples` states. Deterministic under config.seed.
inline Chain run_chain(const Reflectance& r, const ForwardFn& model, const PriorSpec& prior,
                       const NoiseModel& noise, const McmcConfig& config) {
    if (config.samples < 1) throw std::invalid_argument("run_chain: samples must be >= 1");
    const auto free_indices = prior.free_indices();
    const std::vector<double> proposal_sds =
        config.proposal_sds.empty() ? default_proposal_sds(prior) : config.proposal_sds;
    if (proposal_sds.size() != free_indices.size())
        throw std::invalid_argument("run_chain: proposal_sds size mismatch");
    for (double sd : proposal_sds)
        if (!(sd > 0)) throw std::invalid_argument("run_chain: proposal sd must be > 0");

    const LogPosteriorFn logpost = [&](const ParamVector& theta) {
        return log_posterior(theta, r, model, prior, noise);
    };
    McmcState state{prior.means(), 0.0};
    state.log_posterior = logpost(state.theta);
    if (!std::isfinite(state.log_posterior))
        throw std::runtime_error("run_chain: initial state has -inf log posterior");

    Rng rng = make_stream(config.seed, 0xACCE55ULL);
    Chain chain;
    chain.states.reserve(config.samples);
    chain.log_posterior.reserve(config.samples);
    const std::size_t total = config.burn_in + config.samples;
    for (std::size_t step = 0; step < total; ++step) {
        chain.accepted += mh_step(state, rng, free_indices, proposal_sds, logpost) ? 1 : 0;
        ++chain.proposed;
        if (step >= config.burn_in) {
            chain.states.push_back(state.theta);
            chain.log_posterior.push_back(state.log_posterior);
        }
    }
    chain.acceptance_rate =
        static_cast<double>(chain.accepted) / static_cast<double>(chain.proposed);
    return chain;
}

/// Sample mean and sd (denominator N-1; sd = 0 for N = 1) of theta^k.
inline PosteriorSummary summarize(const Chain& chain, std::size_t target_index) {
    if (chain.states.empty()) throw std::invalid_argument("summarize: empty chain");
    const std::size_t n = chain.states.size();
    double mean = 0.0;
    for (const auto& state : chain.states) mean += state.values[target_index];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& state : chain.states) {
        const double d = state.values[target_index] - mean;
        ss += d * d;
    }
    PosteriorSummary out;
    out.mean = mean;
    out.sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    return out;
}

/// Effective sample size from the initial positive sequence of
/// autocovariances; used for standard-error bands in diagnostics and tests.
inline double effective_sample_size(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) return static_cast<double>(n);
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    if (var <= 0) return static_cast<double>(n);
    double sum_rho = 0.0;
    for (std::size_t lag = 1; lag < n; ++lag) {
        double cov = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i)
            cov += (values[i] - mean) * (values[i + lag] - mean);
        cov /= static_cast<double>(n);
        const double rho = cov / var;
        if (rho <= 0) break;
        sum_rho += rho;
    }
    return static_cast<double>(n) / (1.0 + 2.0 * sum_rho);
}

}  // namespace upnet
