#include <catch_amalgamated.hpp>

#include <cmath>

#include "upnet/mcmc.hpp"
#include "upnet/oracle.hpp"

using namespace upnet;

namespace {

// 1-D conjugate setup used throughout: r = a*theta + b + eps.
struct ConjugateCase {
    LinearGaussianModel model{{{2.0}}, {0.1}};
    PriorSpec prior{{"theta"}, {TruncatedGaussian{0.5, 0.2, -1e9, 1e9}}};
    NoiseModel noise{0.0, 0.05};
    Reflectance obs{{1.2}};

    PosteriorSummary exact() const {
        const double a = 2.0, b = 0.1, mu0 = 0.5, s0 = 0.2, s = 0.05;
        const double prec = 1.0 / (s0 * s0) + a * a / (s * s);
        PosteriorSummary out;
        out.sd = std::sqrt(1.0 / prec);
        out.mean = (mu0 / (s0 * s0) + a * (obs[0] - b) / (s * s)) / prec;
        return out;
    }
};

}  // namespace

TEST_CASE("log_posterior") {
    const ConjugateCase c;
    const ForwardFn fwd = make_forward(c.model);
    SECTION("matches the hand-expanded Gaussian expression") {
        const ParamVector theta({0.6}, {"theta"});
        const double f = 2.0 * 0.6 + 0.1;
        const double sigma = 0.05;
        const double z = (1.2 - f) / sigma;
        const double z0 = (0.6 - 0.5) / 0.2;
        const double expected = -0.5 * z * z - std::log(sigma) - 0.5 * z0 * z0 -
                                std::log(0.2) - 0.5 * std::log(2.0 * M_PI);
        CHECK_THAT(log_posterior(theta, c.obs, fwd, c.prior, c.noise),
                   Catch::Matchers::WithinAbs(expected, 1e-10));
    }
    SECTION("-inf outside the prior support") {
        const PriorSpec bounded({"theta"}, {Uniform{0.0, 1.0}});
        const ParamVector theta({1.5}, {"theta"});
        CHECK(log_posterior(theta, c.obs, fwd, bounded, c.noise) ==
              -std::numeric_limits<double>::infinity());
    }
    SECTION("heteroscedastic sigma enters both exponent and normalizer") {
        const NoiseModel het(0.04, 0.01);
        const ParamVector theta({0.5}, {"theta"});
        const double f = 2.0 * 0.5 + 0.1;
        const double sigma = 0.04 * f + 0.01;
        const double z = (1.2 - f) / sigma;
        const double prior_part = -std::log(0.2) - 0.5 * std::log(2.0 * M_PI);
        CHECK_THAT(log_posterior(theta, c.obs, fwd, c.prior, het),
                   Catch::Matchers::WithinAbs(-0.5 * z * z - std::log(sigma) + prior_part,
                                              1e-10));
    }
    SECTION("dimension mismatch throws") {
        const ParamVector theta({0.5}, {"theta"});
        CHECK_THROWS_AS(log_posterior(theta, Reflectance({1.0, 2.0}), fwd, c.prior, c.noise),
                        std::invalid_argument);
    }
}

TEST_CASE("default proposal sds are 0.1 x prior sd over free parameters") {
    const PriorSpec prior({"a", "b", "c"},
                          {Uniform{0.0, 12.0}, Fixed{3.0},
                           TruncatedGaussian{0.0, 1.0, -1e9, 1e9}});
    const auto sds = default_proposal_sds(prior);
    REQUIRE(sds.size() == 2);
    CHECK_THAT(sds[0], Catch::Matchers::WithinRel(0.1 * 12.0 / std::sqrt(12.0), 1e-12));
    CHECK_THAT(sds[1], Catch::Matchers::WithinRel(0.1, 1e-6));
}

TEST_CASE("chain mechanics") {
    const ConjugateCase c;
    const ForwardFn fwd = make_forward(c.model);
    McmcConfig config;
    config.burn_in = 50;
    config.samples = 200;
    config.seed = 5;
    SECTION("records exactly `samples` states and a consistent acceptance rate") {
        const Chain chain = run_chain(c.obs, fwd, c.prior, c.noise, config);
        CHECK(chain.states.size() == 200);
        CHECK(chain.log_posterior.size() == 200);
        CHECK(chain.proposed == 250);
        CHECK(chain.acceptance_rate ==
              static_cast<double>(chain.accepted) / static_cast<double>(chain.proposed));
        CHECK(chain.acceptance_rate > 0.05);
        CHECK(chain.acceptance_rate < 0.999);
    }
    SECTION("deterministic under the seed") {
        const Chain a = run_chain(c.obs, fwd, c.prior, c.noise, config);
        const Chain b = run_chain(c.obs, fwd, c.prior, c.noise, config);
        REQUIRE(a.states.size() == b.states.size());
        for (std::size_t i = 0; i < a.states.size(); ++i)
            CHECK(a.states[i].values == b.states[i].values);
    }
    SECTION("different seeds decorrelate") {
        const Chain a = run_chain(c.obs, fwd, c.prior, c.noise, config);
        McmcConfig other = config;
        other.seed = 6;
        const Chain b = run_chain(c.obs, fwd, c.prior, c.noise, other);
        CHECK(a.states.back().values != b.states.back().values);
    }
    SECTION("fixed parameters never move") {
        const PriorSpec prior({"theta", "pin"},
                              {TruncatedGaussian{0.5, 0.2, -1e9, 1e9}, Fixed{7.0}});
        const LinearGaussianModel lin({{2.0, 0.0}}, {0.1});
        const Chain chain = run_chain(c.obs, make_forward(lin), prior, c.noise, config);
        for (const auto& state : chain.states) CHECK(state.values[1] == 7.0);
    }
    SECTION("proposal sd size mismatch rejected") {
        McmcConfig bad = config;
        bad.proposal_sds = {0.1, 0.1};
        CHECK_THROWS_AS(run_chain(c.obs, fwd, c.prior, c.noise, bad), std::invalid_argument);
    }
    SECTION("log posterior trace matches recomputation at the recorded states") {
        const Chain chain = run_chain(c.obs, fwd, c.prior, c.noise, config);
        for (std::size_t i = 0; i < chain.states.size(); i += 37)
            CHECK(chain.log_posterior[i] ==
                  log_posterior(chain.states[i], c.obs, fwd, c.prior, c.noise));
    }
}

TEST_CASE("chain converges to the analytic conjugate posterior") {
    const ConjugateCase c;
    const PosteriorSummary exact = c.exact();
    McmcConfig config;
    config.burn_in = 2000;
    config.samples = 20000;
    config.seed = 1234;
    const Chain chain = run_chain(c.obs, make_forward(c.model), c.prior, c.noise, config);
    const PosteriorSummary est = summarize(chain, 0);
    std::vector<double> trace(chain.states.size());
    for (std::size_t i = 0; i < trace.size(); ++i) trace[i] = chain.states[i].values[0];
    const double ess = effective_sample_size(trace);
    CHECK(ess > 100.0);
    const double se = exact.sd / std::sqrt(ess);
    CHECK(std::abs(est.mean - exact.mean) < 4.0 * se);
    CHECK(std::abs(est.sd - exact.sd) / exact.sd < 0.1);
}

TEST_CASE("summarize") {
    Chain chain;
    const std::vector<std::string> names{"x"};
    for (double v : {1.0, 2.0, 3.0, 4.0}) chain.states.emplace_back(std::vector{v}, names);
    const PosteriorSummary s = summarize(chain, 0);
    CHECK(s.mean == 2.5);
    CHECK_THAT(s.sd, Catch::Matchers::WithinRel(std::sqrt(5.0 / 3.0), 1e-12));
    Chain single;
    single.states.emplace_back(std::vector{3.0}, names);
    CHECK(summarize(single, 0).sd == 0.0);
    CHECK_THROWS_AS(summarize(Chain{}, 0), std::invalid_argument);
}

TEST_CASE("effective_sample_size") {
    SECTION("iid draws give roughly n") {
        Rng rng = make_stream(8, 0);
        std::vector<double> values(5000);
        for (double& v : values) v = draw_normal(rng, 0.0, 1.0);
        const double ess = effective_sample_size(values);
        CHECK(ess > 3000.0);
        CHECK(ess <= 5000.0 * 1.3);
    }
    SECTION("a strongly autocorrelated AR(1) series gives much less than n") {
        Rng rng = make_stream(9, 0);
        std::vector<double> values(5000);
        values[0] = 0.0;
        const double phi = 0.95;
        for (std::size_t i = 1; i < values.size(); ++i)
            values[i] = phi * values[i - 1] + draw_normal(rng, 0.0, 1.0);
        // Theoretical ESS factor (1-phi)/(1+phi) ~ 0.0256.
        const double ess = effective_sample_size(values);
        CHECK(ess < 500.0);
        CHECK(ess > 20.0);
    }
    SECTION("constant series degrades gracefully") {
        CHECK(effective_sample_size({2.0, 2.0, 2.0, 2.0}) == 4.0);
        CHECK(effective_sample_size({1.0}) == 1.0);
    }
}

TEST_CASE("MCMC agrees with the dense-grid oracle on a bounded problem") {
    // Uniform prior keeps the grid domain finite; both estimates target the
    // same posterior, so they must agree within Monte Carlo error.
    const PriorSpec prior({"theta"}, {Uniform{0.0, 1.0}});
    const LinearGaussianModel lin({{1.0}, {0.8}}, {0.0, 0.05});
    const NoiseModel noise(0.0, 0.1);
    const Reflectance obs({0.55, 0.5});
    const ForwardFn fwd = make_forward(lin);

    GridSpec grid;
    grid.axes = {GridAxis{0.0, 1.0, 2001}};
    const PosteriorSummary dense = grid_posterior(obs, fwd, prior, noise, grid, 0);

    McmcConfig config;
    config.burn_in = 2000;
    config.samples = 30000;
    config.seed = 77;
    const PosteriorSummary mc = summarize(run_chain(obs, fwd, prior, noise, config), 0);
    CHECK(std::abs(mc.mean - dense.mean) < 0.01);
    CHECK(std::abs(mc.sd - dense.sd) / dense.sd < 0.1);
}
