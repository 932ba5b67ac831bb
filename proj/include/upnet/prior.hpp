#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "upnet/rng.hpp"
#include "upnet/types.hpp"

namespace upnet {

struct Uniform {
    double low, high;
};

struct TruncatedGaussian {
    double mu, sigma, low, high;
};

struct Fixed {
    double value;
};

using PriorEntry = std::variant<Uniform, TruncatedGaussian, Fixed>;

/// Independent per-parameter sampling distributions; doubles as the Bayesian
/// prior p(theta) when inverting.
struct PriorSpec {
    std::vector<std::string> names;
    std::vector<PriorEntry> entries;

    PriorSpec() = default;
    PriorSpec(std::vector<std::string> n, std::vector<PriorEntry> e)
        : names(std::move(n)), entries(std::move(e)) {
        if (names.size() != entries.size())
            throw std::invalid_argument("PriorSpec: names/entries length mismatch");
        for (const PriorEntry& entry : entries) validate(entry);
    }

    static void validate(const PriorEntry& entry) {
        if (const auto* u = std::get_if<Uniform>(&entry)) {
            if (!(u->low < u->high))
                throw std::invalid_argument("PriorSpec: uniform requires low < high");
        } else if (const auto* t = std::get_if<TruncatedGaussian>(&entry)) {
            if (!(t->sigma > 0))
                throw std::invalid_argument("PriorSpec: truncnorm requires sigma > 0");
            if (!(t->low < t->high))
                throw std::invalid_argument("PriorSpec: truncnorm requires low < high");
            const double za = (t->low - t->mu) / t->sigma;
            const double zb = (t->high - t->mu) / t->sigma;
            if (normal_cdf(zb) - normal_cdf(za) <= 0)
                throw std::invalid_argument("PriorSpec: truncation interval has no prior mass");
        }
    }

    std::size_t size() const { return names.size(); }

    bool is_fixed(std::size_t i) const {
        return std::holds_alternative<Fixed>(entries[i]);
    }

    std::vector<std::size_t> free_indices() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < size(); ++i)
            if (!is_fixed(i)) out.push_back(i);
        return out;
    }

    /// Support of parameter i; Fixed collapses to a point.
    std::pair<double, double> support(std::size_t i) const {
        if (const auto* u = std::get_if<Uniform>(&entries[i])) return {u->low, u->high};
        if (const auto* t = std::get_if<TruncatedGaussian>(&entries[i])) return {t->low, t->high};
        const double v = std::get<Fixed>(entries[i]).value;
        return {v, v};
    }

    double mean(std::size_t i) const {
        if (const auto* u = std::get_if<Uniform>(&entries[i]))
            return 0.5 * (u->low + u->high);
        if (const auto* t = std::get_if<TruncatedGaussian>(&entries[i])) {
            const double za = (t->low - t->mu) / t->sigma;
            const double zb = (t->high - t->mu) / t->sigma;
            const double mass = normal_cdf(zb) - normal_cdf(za);
            return t->mu + t->sigma * (normal_pdf(za) - normal_pdf(zb)) / mass;
        }
        return std::get<Fixed>(entries[i]).value;
    }

    double sd(std::size_t i) const {
        if (const auto* u = std::get_if<Uniform>(&entries[i]))
            return (u->high - u->low) / std::sqrt(12.0);
        if (const auto* t = std::get_if<TruncatedGaussian>(&entries[i])) {
            const double za = (t->low - t->mu) / t->sigma;
            const double zb = (t->high - t->mu) / t->sigma;
            const double mass = normal_cdf(zb) - normal_cdf(za);
            const double ratio = (normal_pdf(za) - normal_pdf(zb)) / mass;
            const double var = 1.0 + (za * normal_pdf(za) - zb * normal_pdf(zb)) / mass -
                               ratio * ratio;
            return t->sigma * std::sqrt(std::max(var, 0.0));
        }
        return 0.0;
    }

    /// Log prior density of parameter i at x; -inf outside the support. Fixed
    /// parameters contribute zero (they are pinned, not sampled).
    double log_density(std::size_t i, double x) const {
        static const double neg_inf = -std::numeric_limits<double>::infinity();
        if (const auto* u = std::get_if<Uniform>(&entries[i])) {
            if (x < u->low || x > u->high) return neg_inf;
            return -std::log(u->high - u->low);
        }
        if (const auto* t = std::get_if<TruncatedGaussian>(&entries[i])) {
            if (x < t->low || x > t->high) return neg_inf;
            const double z = (x - t->mu) / t->sigma;
            const double za = (t->low - t->mu) / t->sigma;
            const double zb = (t->high - t->mu) / t->sigma;
            const double mass = normal_cdf(zb) - normal_cdf(za);
            return -0.5 * z * z - std::log(t->sigma) - 0.5 * std::log(2.0 * M_PI) -
                   std::log(mass);
        }
        return 0.0;
    }

    /// Joint log prior density over free (non-Fixed) parameters.
    double log_density(const ParamVector& theta) const {
        if (theta.size() != size())
            throw std::invalid_argument("PriorSpec: theta dimension mismatch");
        double acc = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            acc += log_density(i, theta.values[i]);
            if (!std::isfinite(acc)) return -std::numeric_limits<double>::infinity();
        }
        return acc;
    }

    ParamVector means() const {
        std::vector<double> v(size());
        for (std::size_t i = 0; i < size(); ++i) v[i] = mean(i);
        return ParamVector(std::move(v), names);
    }
};

inline ParamVector sample_prior(const PriorSpec& spec, Rng& rng) {
    std::vector<double> values(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (const auto* u = std::get_if<Uniform>(&spec.entries[i]))
            values[i] = draw_uniform(rng, u->low, u->high);
        else if (const auto* t = std::get_if<TruncatedGaussian>(&spec.entries[i]))
            values[i] = draw_truncated_normal(rng, t->mu, t->sigma, t->low, t->high);
        else
            values[i] = std::get<Fixed>(spec.entries[i]).value;
    }
    return ParamVector(std::move(values), spec.names);
}

/// Default priors for the toy canopy model: LAI and Cab sampled,
/// geometry and soil brightness pinned.
inline PriorSpec default_toy_canopy_prior() {
    return PriorSpec({"LAI", "ALA", "Cab", "psoil", "rsoil"},
                     {TruncatedGaussian{3.0, 2.0, 0.0, 10.0},
                      Uniform{40.0, 70.0},
                      TruncatedGaussian{30.0, 20.0, 0.0, 100.0},
                      Uniform{0.0, 1.0},
                      Fixed{0.8}});
}

}  // namespace upnet
