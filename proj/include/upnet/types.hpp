#pragma once

#include <cmath>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace upnet {

/// Parameter vector theta with per-dimension names. Index `k` of the retrieved
/// variable is carried by Dataset / UpNetModel, not here.
struct ParamVector {
    std::vector<double> values;
    std::vector<std::string> names;

    ParamVector() = default;
    ParamVector(std::vector<double> v, std::vector<std::string> n)
        : values(std::move(v)), names(std::move(n)) {
        if (values.size() != names.size())
            throw std::invalid_argument("ParamVector: values/names length mismatch");
        for (double x : values)
            if (!std::isfinite(x))
                throw std::invalid_argument("ParamVector: non-finite value");
    }

    std::size_t size() const { return values.size(); }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        throw std::invalid_argument("ParamVector: unknown parameter '" + name + "'");
    }
};

/// Per-band reflectance observation.
struct Reflectance {
    std::vector<double> values;

    Reflectance() = default;
    explicit Reflectance(std::vector<double> v) : values(std::move(v)) {
        for (double x : values)
            if (!std::isfinite(x))
                throw std::invalid_argument("Reflectance: non-finite value");
    }

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

struct Band {
    std::string name;
    double central_wavelength_nm;
    double bandwidth_nm;
};

struct SensorConfig {
    std::string sensor_name;
    std::vector<Band> bands;

    SensorConfig(std::string name, std::vector<Band> b)
        : sensor_name(std::move(name)), bands(std::move(b)) {
        if (bands.empty())
            throw std::invalid_argument("SensorConfig: band list empty");
        std::set<std::string> seen;
        for (const Band& band : bands) {
            if (band.central_wavelength_nm <= 0)
                throw std::invalid_argument("SensorConfig: non-positive wavelength");
            if (!seen.insert(band.name).second)
                throw std::invalid_argument("SensorConfig: duplicate band '" + band.name + "'");
        }
    }

    std::size_t num_bands() const { return bands.size(); }
};

inline SensorConfig landsat8_oli() {
    return SensorConfig("Landsat-8 OLI",
                        {{"Blue", 482, 60},
                         {"Green", 561, 57},
                         {"Red", 655, 37},
                         {"NIR", 865, 28},
                         {"SWIR 1", 1609, 85},
                         {"SWIR 2", 2201, 187}});
}

inline SensorConfig sentinel2_msi() {
    return SensorConfig("Sentinel-2 MSI",
                        {{"Blue", 490, 66},
                         {"Green", 560, 36},
                         {"Red", 665, 31},
                         {"Red Edge 1", 705, 15},
                         {"Red Edge 2", 740, 15},
                         {"Red Edge 3", 783, 20},
                         {"NIR1", 842, 106},
                         {"NIR2", 865, 21},
                         {"SWIR 1", 1610, 91},
                         {"SWIR 2", 2190, 175}});
}

/// Preset lookup by CLI name.
inline SensorConfig sensor_preset(const std::string& name) {
    if (name == "landsat8") return landsat8_oli();
    if (name == "sentinel2") return sentinel2_msi();
    throw std::invalid_argument("unknown sensor preset '" + name + "' (landsat8, sentinel2)");
}

/// Posterior mean and standard deviation of the retrieved variable, in
/// physical units. Common output of UpNet, MCMC and the grid oracle.
struct PosteriorSummary {
    double mean = 0.0;
    double sd = 0.0;
};

}  // namespace upnet
