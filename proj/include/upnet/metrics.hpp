#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "upnet/types.hpp"
#include "upnet/upnet.hpp"

namespace upnet {

/// 1 - SS_res / SS_tot: coefficient of determination against the 1:1 line.
inline double r2(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size() || truth.size() < 2)
        throw std::invalid_argument("r2: need equal lengths >= 2");
    double mean = 0.0;
    for (double t : truth) mean += t;
    mean /= static_cast<double>(truth.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
        ss_tot += (truth[i] - mean) * (truth[i] - mean);
    }
    if (ss_tot <= 0) throw std::invalid_argument("r2: constant truth (undefined denominator)");
    return 1.0 - ss_res / ss_tot;
}

inline double rmse(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size() || truth.empty())
        throw std::invalid_argument("rmse: need equal non-zero lengths");
    double ss = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        ss += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    return std::sqrt(ss / static_cast<double>(truth.size()));
}

struct MetricReport {
    std::string method_a, method_b;
    double r2 = 0.0;
    double rmse = 0.0;
    std::size_t n = 0;
    double slope = 1.0, intercept = 0.0;  // least-squares fit of a on b
    bool constant_truth = false;          // r2/slope undefined, rmse only
};

inline MetricReport compare(const std::string& label_a, const std::string& label_b,
                            const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("compare: need aligned lists of length >= 2");
    MetricReport report;
    report.method_a = label_a;
    report.method_b = label_b;
    report.n = a.size();
    report.rmse = rmse(a, b);
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= static_cast<double>(a.size());
    mean_b /= static_cast<double>(b.size());
    double ss_b = 0.0, cross = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ss_b += (b[i] - mean_b) * (b[i] - mean_b);
        cross += (a[i] - mean_a) * (b[i] - mean_b);
    }
    if (ss_b <= 0) {
        report.constant_truth = true;
        return report;
    }
    report.r2 = r2(a, b);
    report.slope = cross / ss_b;
    report.intercept = mean_a - report.slope * mean_b;
    return report;
}

struct ConsistencyReport {
    MetricReport means;
    MetricReport sds;
};

/// Mean-vs-mean and sd-vs-sd comparison of two aligned summary lists.
inline ConsistencyReport consistency_report(const std::string& label_a,
                                            const std::string& label_b,
                                            const std::vector<PosteriorSummary>& a,
                                            const std::vector<PosteriorSummary>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("consistency_report: misaligned summary lists");
    std::vector<double> mean_a, mean_b, sd_a, sd_b;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a.push_back(a[i].mean);
        mean_b.push_back(b[i].mean);
        sd_a.push_back(a[i].sd);
        sd_b.push_back(b[i].sd);
    }
    return {compare(label_a, label_b, mean_a, mean_b),
            compare(label_a, label_b, sd_a, sd_b)};
}

struct BenchReport {
    std::string method;
    std::size_t total_records = 0;
    double wall_time_s = 0.0;
    double per_pixel_time_s = 0.0;
};

/// Times UpNet batch prediction over `records` and an MCMC runner over the
/// first `mcmc_pixels` records. Timing excludes model loading and file I/O;
/// the UpNet batch is repeated until the monotonic clock resolves it.
inline std::pair<BenchReport, BenchReport> bench(
    const UpNetModel& model, const std::vector<Reflectance>& records,
    const std::function<PosteriorSummary(const Reflectance&)>& mcmc_runner,
    std::size_t mcmc_pixels = 20) {
    if (records.empty()) throw std::invalid_argument("bench: empty dataset");
    using clock = std::chrono::steady_clock;

    BenchReport up;
    up.method = "upnet";
    up.total_records = records.size();
    volatile double sink = 0.0;
    std::size_t reps = 1;
    for (;;) {
        const auto start = clock::now();
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const auto out = predict_batch(model, records);
            sink = sink + out.back().mean;
        }
        up.wall_time_s = std::chrono::duration<double>(clock::now() - start).count() /
                         static_cast<double>(reps);
        if (up.wall_time_s > 0.05 || reps >= 1024) break;
        reps *= 4;
    }
    up.per_pixel_time_s = up.wall_time_s / static_cast<double>(up.total_records);

    BenchReport mc;
    mc.method = "mcmc";
    mc.total_records = std::min(mcmc_pixels, records.size());
    const auto start = clock::now();
    for (std::size_t i = 0; i < mc.total_records; ++i) sink = sink + mcmc_runner(records[i]).mean;
    mc.wall_time_s = std::chrono::duration<double>(clock::now() - start).count();
    mc.per_pixel_time_s = mc.wall_time_s / static_cast<double>(mc.total_records);
    return {up, mc};
}

}  // namespace upnet
