#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "upnet/forward_model.hpp"
#include "upnet/prior.hpp"
#include "upnet/simulation.hpp"
#include "upnet/upnet.hpp"

using namespace upnet;

namespace {

// 1-D linear model r = a*theta + b with a known conjugate posterior; the
// posterior mean is an affine function of r, which a ReLU net fits quickly.
Dataset make_linear_dataset(std::size_t count, std::uint64_t seed) {
    const LinearGaussianModel model({{2.0}}, {0.1});
    const PriorSpec prior({"theta"}, {TruncatedGaussian{0.5, 0.2, -1e9, 1e9}});
    const NoiseModel noise(0.0, 0.05);
    return simulate_dataset(make_forward(model), prior, noise, count, 0, seed);
}

UpNetTrainConfig small_config(std::uint64_t seed) {
    UpNetTrainConfig config;
    config.hidden = 32;
    config.train.epochs = 300;
    config.train.batch_size = 512;
    config.train.learning_rate = 0.005;
    config.train.l2_coefficient = 0.0;
    config.train.seed = seed;
    return config;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / name).string()) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("mean net recovers the conjugate posterior mean on a linear model") {
    // r = 2*theta + 0.1 + eps, eps ~ N(0, 0.05^2), theta ~ N(0.5, 0.2^2).
    // Conjugate update: posterior mean is linear in r with
    // k = a*s0^2 / (a^2 s0^2 + s^2), mu*(r) = mu0 + k (r - a mu0 - b).
    const Dataset d1 = make_linear_dataset(4000, 42);
    const MeanNet g = train_mean_net(d1, small_config(7));
    CHECK(g.loss_history.size() == 300);
    CHECK(g.loss_history.back() < g.loss_history.front());

    const double a = 2.0, b = 0.1, mu0 = 0.5, s0 = 0.2, s = 0.05;
    const double k = a * s0 * s0 / (a * a * s0 * s0 + s * s);
    UpNetModel model;
    model.mean_net = g;
    // Dummy variance net so predict() runs; its output is ignored here.
    model.variance_net.net = init_mlp(1, 2, 0);
    model.variance_net.x_scaler = g.x_scaler;
    double worst = 0.0;
    for (double r = 0.6; r <= 1.6; r += 0.1) {
        const double truth = mu0 + k * (r - a * mu0 - b);
        const double pred = predict(model, Reflectance({r})).mean;
        worst = std::max(worst, std::abs(pred - truth));
    }
    CHECK(worst < 0.02);
}

TEST_CASE("build_d2") {
    const Dataset d1 = make_linear_dataset(500, 9);
    const MeanNet g = train_mean_net(d1, small_config(3));
    const ResidualDataset d2 = build_d2(g, d1);
    SECTION("aligned with D1 and non-negative") {
        REQUIRE(d2.size() == d1.size());
        REQUIRE(d2.reflectances.size() == d1.size());
        for (std::size_t i = 0; i < d2.size(); ++i) {
            CHECK(d2.targets[i] >= 0.0);
            CHECK(d2.reflectances[i].values == d1.reflectances[i].values);
        }
    }
    SECTION("targets are exactly the squared standardized residuals") {
        for (std::size_t i : {std::size_t{0}, std::size_t{17}, std::size_t{499}}) {
            std::vector<double> x = d1.reflectances[i].values;
            transform(g.x_scaler, x);
            const double res = (d1.thetas[i].values[0] - g.y_scaler.means[0]) /
                                   g.y_scaler.sds[0] -
                               forward_mlp(g.net, x);
            CHECK_THAT(d2.targets[i], Catch::Matchers::WithinRel(res * res, 1e-12));
        }
    }
    SECTION("dimension mismatch rejected") {
        Dataset bad = d1;
        for (auto& r : bad.reflectances) r = Reflectance({r.values[0], 0.0});
        CHECK_THROWS_AS(build_d2(g, bad), std::invalid_argument);
    }
}

TEST_CASE("variance net recovers the conjugate posterior sd on a linear model") {
    // Same setup as above; the exact posterior sd is constant in r:
    // s*^2 = s0^2 s^2 / (a^2 s0^2 + s^2).
    const Dataset d1 = make_linear_dataset(8000, 21);
    UpNetTrainConfig config = small_config(5);
    config.train.epochs = 400;
    const UpNetModel model = train_upnet(d1, config);
    const double a = 2.0, s0 = 0.2, s = 0.05;
    const double sd_true = std::sqrt(s0 * s0 * s * s / (a * a * s0 * s0 + s * s));
    for (double r = 0.7; r <= 1.5; r += 0.2) {
        const double sd = predict(model, Reflectance({r})).sd;
        CHECK(std::abs(sd - sd_true) / sd_true < 0.25);
    }
    CHECK(model.target_name == "theta");
    CHECK(model.variance_net.d2_scale > 0.0);
}

TEST_CASE("single and batch prediction agree bit for bit") {
    const Dataset d1 = make_linear_dataset(800, 4);
    const UpNetModel model = train_upnet(d1, small_config(11));
    std::vector<Reflectance> records;
    for (double r = 0.5; r <= 1.7; r += 0.05) records.push_back(Reflectance({r}));
    const auto batch = predict_batch(model, records);
    REQUIRE(batch.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto single = predict(model, records[i]);
        CHECK(single.mean == batch[i].mean);
        CHECK(single.sd == batch[i].sd);
    }
}

TEST_CASE("batch prediction is permutation invariant") {
    const Dataset d1 = make_linear_dataset(800, 4);
    const UpNetModel model = train_upnet(d1, small_config(11));
    std::vector<Reflectance> records, reversed;
    for (double r = 0.5; r <= 1.7; r += 0.1) records.push_back(Reflectance({r}));
    reversed.assign(records.rbegin(), records.rend());
    const auto fwd = predict_batch(model, records);
    const auto rev = predict_batch(model, reversed);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(fwd[i].mean == rev[records.size() - 1 - i].mean);
        CHECK(fwd[i].sd == rev[records.size() - 1 - i].sd);
    }
}

TEST_CASE("negative variance outputs are clamped and counted") {
    UpNetModel model;
    model.mean_net.net = init_mlp(1, 2, 1);
    model.mean_net.x_scaler = Scaler{{0.0}, {1.0}};
    model.mean_net.y_scaler = Scaler{{0.0}, {1.0}};
    // Variance net hard-wired to a negative constant output.
    model.variance_net.net = init_mlp(1, 2, 1);
    std::fill(model.variance_net.net.w1.begin(), model.variance_net.net.w1.end(), 0.0);
    std::fill(model.variance_net.net.w2.begin(), model.variance_net.net.w2.end(), 0.0);
    model.variance_net.net.b2 = -0.5;
    model.variance_net.x_scaler = Scaler{{0.0}, {1.0}};
    const auto out = predict_batch(model, {Reflectance({0.3}), Reflectance({0.4})});
    CHECK(out[0].sd == 0.0);
    CHECK(out[1].sd == 0.0);
    CHECK(model.clamp_count->load() == 2);
}

TEST_CASE("prediction rejects wrong-dimension records naming the index") {
    const Dataset d1 = make_linear_dataset(200, 8);
    UpNetTrainConfig config = small_config(2);
    config.train.epochs = 5;
    const UpNetModel model = train_upnet(d1, config);
    CHECK_THROWS_WITH(
        predict_batch(model, {Reflectance({0.5}), Reflectance({0.5, 0.5})}),
        Catch::Matchers::ContainsSubstring("record 1"));
}

TEST_CASE("training determinism: identical seeds give identical predictions") {
    const Dataset d1 = make_linear_dataset(500, 33);
    UpNetTrainConfig config = small_config(77);
    config.train.epochs = 50;
    const UpNetModel a = train_upnet(d1, config);
    const UpNetModel b = train_upnet(d1, config);
    const Reflectance r({1.1});
    CHECK(predict(a, r).mean == predict(b, r).mean);
    CHECK(predict(a, r).sd == predict(b, r).sd);
    CHECK(a.mean_net.net.w1 == b.mean_net.net.w1);
}

TEST_CASE("covariance net") {
    SECTION("k == j rejected") {
        const Dataset d1 = make_linear_dataset(100, 1);
        UpNetTrainConfig config = small_config(1);
        config.train.epochs = 2;
        const MeanNet g = train_mean_net(d1, config);
        CHECK_THROWS_AS(train_cov_net(g, 0, g, 0, d1, config), std::invalid_argument);
    }
    SECTION("recovers an analytic 2-D posterior covariance") {
        // theta ~ N(mu0, diag(s0^2)), r = A theta + eps (2 bands), so the
        // posterior covariance is constant: (Sigma0^-1 + A^T Sigma_r^-1 A)^-1.
        const LinearGaussianModel lin({{1.0, 0.6}, {0.4, 1.0}}, {0.0, 0.0});
        const PriorSpec prior({"t1", "t2"},
                              {TruncatedGaussian{0.0, 1.0, -1e9, 1e9},
                               TruncatedGaussian{0.0, 1.0, -1e9, 1e9}});
        const NoiseModel noise(0.0, 0.3);
        const Dataset d1 =
            simulate_dataset(make_forward(lin), prior, noise, 6000, 0, 19);
        UpNetTrainConfig config = small_config(13);
        config.train.epochs = 300;
        const MeanNet g1 = train_mean_net(d1, config);
        Dataset d1b = d1;
        d1b.target_index = 1;
        const MeanNet g2 = train_mean_net(d1b, config);
        const CovarianceNet cov = train_cov_net(g1, 0, g2, 1, d1, config);

        // Exact posterior covariance (2x2 solve by hand).
        const double inv_s2 = 1.0 / (0.3 * 0.3);
        // P = I + A^T A / s^2
        const double p00 = 1.0 + inv_s2 * (1.0 * 1.0 + 0.4 * 0.4);
        const double p01 = inv_s2 * (1.0 * 0.6 + 0.4 * 1.0);
        const double p11 = 1.0 + inv_s2 * (0.6 * 0.6 + 1.0 * 1.0);
        const double det = p00 * p11 - p01 * p01;
        const double cov_true = -p01 / det;

        double mean_pred = 0.0;
        const std::size_t probes = 50;
        for (std::size_t i = 0; i < probes; ++i)
            mean_pred += predict_cov(cov, d1.reflectances[i]);
        mean_pred /= probes;
        CHECK(std::abs(mean_pred - cov_true) / std::abs(cov_true) < 0.25);
        CHECK(cov.index_k == 0);
        CHECK(cov.index_j == 1);
    }
}

TEST_CASE("model persistence round trip") {
    const Dataset d1 = make_linear_dataset(400, 2);
    UpNetTrainConfig config = small_config(6);
    config.train.epochs = 30;
    const UpNetModel model = train_upnet(d1, config);
    TempFile file("upnet_model_roundtrip.json");
    save_upnet(model, file.path);
    const UpNetModel loaded = load_upnet(file.path);
    SECTION("predictions identical after reload") {
        for (double r = 0.6; r <= 1.5; r += 0.3) {
            const Reflectance x({r});
            CHECK(predict(model, x).mean == predict(loaded, x).mean);
            CHECK(predict(model, x).sd == predict(loaded, x).sd);
        }
        CHECK(loaded.target_name == model.target_name);
        CHECK(loaded.variance_net.d2_scale == model.variance_net.d2_scale);
    }
    SECTION("rejects foreign or corrupt files") {
        TempFile bad("upnet_model_bad.json");
        {
            std::ofstream out(bad.path);
            out << "{\"format\": \"something-else\", \"version\": 1}\n";
        }
        CHECK_THROWS_AS(load_upnet(bad.path), DataError);
        {
            std::ofstream out(bad.path);
            out << "not json at all\n";
        }
        CHECK_THROWS_AS(load_upnet(bad.path), DataError);
        CHECK_THROWS_AS(load_upnet("/nonexistent/upnet.json"), DataError);
    }
    SECTION("rejects unsupported versions") {
        TempFile bad("upnet_model_version.json");
        nlohmann::json j;
        {
            std::ifstream in(file.path);
            in >> j;
        }
        j["version"] = 99;
        {
            std::ofstream out(bad.path);
            out << j.dump();
        }
        CHECK_THROWS_AS(load_upnet(bad.path), DataError);
    }
}

TEST_CASE("empty dataset rejected") {
    Dataset empty;
    empty.param_names = {"theta"};
    CHECK_THROWS_AS(train_mean_net(empty, small_config(1)), std::invalid_argument);
}
