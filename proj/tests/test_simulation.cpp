#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "upnet/prior.hpp"
#include "upnet/simulation.hpp"

using namespace upnet;

namespace {

// Independent quadrature oracle: moments of the truncated normal via Simpson
// integration of the renormalized density.
double truncnorm_mean_quadrature(double mu, double sigma, double low, double high) {
    const std::size_t n = 20000;  // even
    const double h = (high - low) / static_cast<double>(n);
    double mass = 0.0, first = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double x = low + h * static_cast<double>(i);
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        const double density = normal_pdf((x - mu) / sigma) / sigma;
        mass += w * density;
        first += w * density * x;
    }
    return first / mass;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/upnet_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("sample_prior per-entry behavior") {
    Rng rng = make_stream(7, 0);
    SECTION("fixed entry always returns its value") {
        PriorSpec spec({"Car"}, {Fixed{8.0}});
        for (int i = 0; i < 100; ++i) CHECK(sample_prior(spec, rng).values[0] == 8.0);
    }
    SECTION("uniform draws stay inside [low, high], mean near midpoint") {
        PriorSpec spec({"N"}, {Uniform{1.3, 2.5}});
        const std::size_t n = 100000;
        double sum = 0.0, mn = 1e300, mx = -1e300;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = sample_prior(spec, rng).values[0];
            REQUIRE(x >= 1.3);
            REQUIRE(x <= 2.5);
            sum += x;
            mn = std::min(mn, x);
            mx = std::max(mx, x);
        }
        const double se = (2.5 - 1.3) / std::sqrt(12.0) / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(sum / n - 1.9) < 3 * se);
    }
    SECTION("truncated normal mean matches quadrature oracle") {
        PriorSpec spec({"LAI"}, {TruncatedGaussian{3.0, 2.0, 0.0, 10.0}});
        const std::size_t n = 1000000;
        double sum = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = sample_prior(spec, rng).values[0];
            REQUIRE(x >= 0.0);  // hard support assertion on every sample
            REQUIRE(x <= 10.0);
            sum += x;
            ss += x * x;
        }
        const double mean = sum / n;
        const double sd = std::sqrt(ss / n - mean * mean);
        const double oracle = truncnorm_mean_quadrature(3.0, 2.0, 0.0, 10.0);
        CHECK(std::abs(mean - oracle) < 3 * sd / std::sqrt(static_cast<double>(n)));
        // closed-form mean/sd helpers agree with the quadrature oracle
        CHECK_THAT(spec.mean(0), Catch::Matchers::WithinAbs(oracle, 1e-8));
    }
}

TEST_CASE("prior spec validation") {
    CHECK_THROWS_AS(PriorSpec({"a"}, {Uniform{2.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(PriorSpec({"a"}, {TruncatedGaussian{0, -1, 0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(PriorSpec({"a"}, {TruncatedGaussian{0, 1, 1, 0}}), std::invalid_argument);
}

TEST_CASE("apply_noise") {
    SECTION("noise-free limit is the identity") {
        Rng rng = make_stream(1, 0);
        const Reflectance clean({0.1, 0.5, 0.9});
        const auto out = apply_noise(clean, NoiseModel(0, 0), rng);
        CHECK(out.values == clean.values);
    }
    SECTION("sigma formula: additive floor at zero reflectance") {
        const NoiseModel noise;
        CHECK(noise.sigma(0.0) == 0.01);
        CHECK_THAT(noise.sigma(0.2), Catch::Matchers::WithinAbs(0.018, 1e-15));
    }
    SECTION("empirical sd matches 0.04*0.2 + 0.01 = 0.018") {
        const NoiseModel noise;
        const Reflectance clean({0.2});
        const std::size_t n = 100000;
        double sum = 0.0, ss = 0.0;
        Rng rng = make_stream(2, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = apply_noise(clean, noise, rng)[0] - 0.2;
            sum += x;
            ss += x * x;
        }
        const double sd = std::sqrt(ss / n - (sum / n) * (sum / n));
        CHECK(std::abs(sd - 0.018) / 0.018 < 0.03);
    }
    SECTION("deterministic under fixed stream") {
        const Reflectance clean({0.2, 0.4});
        Rng a = make_stream(3, 5), b = make_stream(3, 5);
        CHECK(apply_noise(clean, NoiseModel(), a).values ==
              apply_noise(clean, NoiseModel(), b).values);
    }
}

TEST_CASE("simulate_dataset") {
    const PriorSpec prior = default_toy_canopy_prior();
    const ForwardFn model = make_forward(default_toy_canopy());
    SECTION("empty case") {
        CHECK(simulate_dataset(model, prior, NoiseModel(), 0, 0, 1).size() == 0);
    }
    SECTION("determinism contract") {
        const auto a = simulate_dataset(model, prior, NoiseModel(), 50, 0, 42);
        const auto b = simulate_dataset(model, prior, NoiseModel(), 50, 0, 42);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a.thetas[i].values == b.thetas[i].values);
            CHECK(a.reflectances[i].values == b.reflectances[i].values);
        }
    }
    SECTION("theta and noise are uncorrelated") {
        const std::size_t n = 100000;
        const auto ds = simulate_dataset(model, prior, NoiseModel(), n, 0, 9);
        // Noise realization on band 0 recovered by re-running the clean model.
        double mean_t = 0.0, mean_e = 0.0;
        std::vector<double> ts(n), es(n);
        for (std::size_t i = 0; i < n; ++i) {
            ts[i] = ds.thetas[i].values[0];
            es[i] = ds.reflectances[i][0] - model(ds.thetas[i])[0];
            mean_t += ts[i];
            mean_e += es[i];
        }
        mean_t /= n;
        mean_e /= n;
        double st = 0, se = 0, cross = 0;
        for (std::size_t i = 0; i < n; ++i) {
            st += (ts[i] - mean_t) * (ts[i] - mean_t);
            se += (es[i] - mean_e) * (es[i] - mean_e);
            cross += (ts[i] - mean_t) * (es[i] - mean_e);
        }
        const double corr = cross / std::sqrt(st * se);
        CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(n)));
    }
    SECTION("forward failure reports the offending record") {
        const ForwardFn broken = [](const ParamVector&) -> Reflectance {
            throw std::runtime_error("boom");
        };
        CHECK_THROWS_WITH(simulate_dataset(broken, prior, NoiseModel(), 3, 0, 1),
                          Catch::Matchers::ContainsSubstring("record 0"));
    }
}

TEST_CASE("dataset CSV round trip") {
    const PriorSpec prior = default_toy_canopy_prior();
    const ForwardFn model = make_forward(default_toy_canopy());
    const auto ds = simulate_dataset(model, prior, NoiseModel(), 3, 2, 77);
    TempFile file("dataset.csv");
    write_dataset(ds, file.path);
    const auto back = read_dataset(file.path);
    REQUIRE(back.size() == 3);
    CHECK(back.param_names == ds.param_names);
    CHECK(back.target_index == 2);
    CHECK(back.seed == 77);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.thetas[i].values == ds.thetas[i].values);
        CHECK(back.reflectances[i].values == ds.reflectances[i].values);
    }
}

TEST_CASE("dataset CSV error paths") {
    TempFile file("bad.csv");
    SECTION("missing column names the row") {
        std::ofstream out(file.path);
        out << "theta_LAI,r_1,r_2\n1.0,0.2,0.3\n2.0,0.4\n";
        out.close();
        CHECK_THROWS_WITH(read_dataset(file.path),
                          Catch::Matchers::ContainsSubstring("row 3"));
    }
    SECTION("non-numeric cell") {
        std::ofstream out(file.path);
        out << "theta_LAI,r_1\n1.0,oops\n";
        out.close();
        CHECK_THROWS_AS(read_dataset(file.path), DataError);
    }
    SECTION("header only gives an empty dataset") {
        std::ofstream out(file.path);
        out << "theta_LAI,r_1\n";
        out.close();
        CHECK(read_dataset(file.path).size() == 0);
    }
    SECTION("no theta columns") {
        std::ofstream out(file.path);
        out << "r_1,r_2\n0.1,0.2\n";
        out.close();
        CHECK_THROWS_AS(read_dataset(file.path), DataError);
    }
}
