#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace upnet {

// splitmix64; used to derive independent substreams from (seed, stream index).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

using Rng = std::mt19937_64;

// Substream for record/epoch `stream` of a run seeded with `seed`. Streams are
// independent of execution order, so parallel loops stay reproducible.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

inline double draw_uniform(Rng& rng, double low, double high) {
    return std::uniform_real_distribution<double>(low, high)(rng);
}

inline double draw_normal(Rng& rng, double mu, double sigma) {
    return std::normal_distribution<double>(mu, sigma)(rng);
}

// Rejection from the untruncated Gaussian: resample until inside [low, high].
inline double draw_truncated_normal(Rng& rng, double mu, double sigma,
                                    double low, double high) {
    std::normal_distribution<double> dist(mu, sigma);
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        const double x = dist(rng);
        if (x >= low && x <= high) return x;
    }
    throw std::runtime_error("truncated normal rejection sampler exhausted: "
                             "truncation interval has negligible prior mass");
}

inline double normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * M_SQRT1_2);
}

}  // namespace upnet
