#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "upnet/types.hpp"

namespace upnet {

/// Type-erased forward model f(theta) -> reflectance.
using ForwardFn = std::function<Reflectance(const ParamVector&)>;

// ---------------------------------------------------------------------------
// Linear-Gaussian model: f(theta) = A theta + b. Verification model with a
// closed-form posterior (see oracle.hpp).
// ---------------------------------------------------------------------------

struct LinearGaussianModel {
    std::vector<std::vector<double>> matrix_a;  // n rows of length m
    std::vector<double> offset_b;               // length n

    LinearGaussianModel(std::vector<std::vector<double>> a, std::vector<double> b)
        : matrix_a(std::move(a)), offset_b(std::move(b)) {
        if (matrix_a.empty() || matrix_a.size() != offset_b.size())
            throw std::invalid_argument("LinearGaussianModel: inconsistent dimensions");
        for (const auto& row : matrix_a)
            if (row.size() != matrix_a.front().size())
                throw std::invalid_argument("LinearGaussianModel: ragged matrix");
    }

    std::size_t input_dim() const { return matrix_a.front().size(); }
    std::size_t output_dim() const { return offset_b.size(); }
};

inline Reflectance eval_linear(const LinearGaussianModel& model, const ParamVector& theta) {
    if (theta.size() != model.input_dim())
        throw std::invalid_argument("eval_linear: theta dimension mismatch");
    std::vector<double> out(model.output_dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = model.offset_b[i];
        for (std::size_t j = 0; j < theta.size(); ++j)
            acc += model.matrix_a[i][j] * theta.values[j];
        out[i] = acc;
    }
    return Reflectance(std::move(out));
}

// ---------------------------------------------------------------------------
// Toy analytic canopy model. Per band:
//   tau   = exp(-k cos(ALA) LAI / cos(SZA))        (gap fraction)
//   rho_v = rho_max exp(-alpha Cab)                (vegetation term)
//   r     = rho_v (1 - tau) + soil tau
// with the soil term from the dry/wet mixture below.
// ---------------------------------------------------------------------------

/// r_s = rsoil * (psoil * r_wet + (1 - psoil) * r_dry), per band.
inline Reflectance soil_reflectance(double rsoil, double psoil,
                                    const std::vector<double>& r_wet,
                                    const std::vector<double>& r_dry) {
    if (psoil < 0.0 || psoil > 1.0)
        throw std::invalid_argument("soil_reflectance: psoil outside [0,1]");
    if (rsoil < 0.0)
        throw std::invalid_argument("soil_reflectance: rsoil negative");
    if (r_wet.size() != r_dry.size())
        throw std::invalid_argument("soil_reflectance: band count mismatch");
    std::vector<double> out(r_wet.size());
    for (std::size_t b = 0; b < out.size(); ++b)
        out[b] = rsoil * (psoil * r_wet[b] + (1.0 - psoil) * r_dry[b]);
    return Reflectance(std::move(out));
}

struct ToyCanopyModel {
    std::vector<double> k;        // extinction coefficient, > 0
    std::vector<double> alpha;    // pigment absorption per unit Cab
    std::vector<double> rho_max;  // asymptotic vegetation reflectance
    std::vector<double> r_wet;
    std::vector<double> r_dry;
    double sza_deg = 30.0;

    ToyCanopyModel(std::vector<double> k_, std::vector<double> alpha_,
                   std::vector<double> rho_max_, std::vector<double> r_wet_,
                   std::vector<double> r_dry_, double sza)
        : k(std::move(k_)), alpha(std::move(alpha_)), rho_max(std::move(rho_max_)),
          r_wet(std::move(r_wet_)), r_dry(std::move(r_dry_)), sza_deg(sza) {
        const std::size_t n = k.size();
        if (n == 0 || alpha.size() != n || rho_max.size() != n ||
            r_wet.size() != n || r_dry.size() != n)
            throw std::invalid_argument("ToyCanopyModel: band count mismatch");
        for (std::size_t b = 0; b < n; ++b) {
            if (k[b] <= 0) throw std::invalid_argument("ToyCanopyModel: k must be > 0");
            if (rho_max[b] < 0 || rho_max[b] > 1 || r_wet[b] < 0 || r_wet[b] > 1 ||
                r_dry[b] < 0 || r_dry[b] > 1)
                throw std::invalid_argument("ToyCanopyModel: reflectance constant outside [0,1]");
        }
        if (sza_deg < 0 || sza_deg >= 90)
            throw std::invalid_argument("ToyCanopyModel: sza outside [0,90)");
    }

    std::size_t num_bands() const { return k.size(); }
};

/// Six-band defaults mirroring the Landsat-8 preset; red absorption and a NIR
/// plateau make LAI and Cab identifiable but partially confounded.
inline ToyCanopyModel default_toy_canopy() {
    std::vector<double> r_dry = {0.10, 0.15, 0.20, 0.25, 0.30, 0.30};
    std::vector<double> r_wet(r_dry.size());
    for (std::size_t b = 0; b < r_dry.size(); ++b) r_wet[b] = 0.5 * r_dry[b];
    return ToyCanopyModel({0.60, 0.65, 0.70, 0.55, 0.45, 0.40},
                          {0.020, 0.012, 0.025, 0.002, 0.001, 0.001},
                          {0.05, 0.10, 0.06, 0.50, 0.30, 0.15},
                          std::move(r_wet), std::move(r_dry), 30.0);
}

/// Parameter names the toy canopy model consumes from theta.
inline const std::vector<std::string>& toy_canopy_param_names() {
    static const std::vector<std::string> names = {"LAI", "ALA", "Cab", "psoil", "rsoil"};
    return names;
}

inline Reflectance eval_canopy(const ToyCanopyModel& model, const ParamVector& theta) {
    const double lai = theta.values[theta.index_of("LAI")];
    const double ala = theta.values[theta.index_of("ALA")];
    const double cab = theta.values[theta.index_of("Cab")];
    const double psoil = theta.values[theta.index_of("psoil")];
    const double rsoil = theta.values[theta.index_of("rsoil")];
    if (lai < 0) throw std::invalid_argument("eval_canopy: LAI < 0");
    if (ala < 0 || ala >= 90) throw std::invalid_argument("eval_canopy: ALA outside [0,90)");
    if (cab < 0) throw std::invalid_argument("eval_canopy: Cab < 0");

    const Reflectance soil = soil_reflectance(rsoil, psoil, model.r_wet, model.r_dry);
    const double deg = M_PI / 180.0;
    const double path = std::cos(ala * deg) / std::cos(model.sza_deg * deg);
    std::vector<double> out(model.num_bands());
    for (std::size_t b = 0; b < out.size(); ++b) {
        const double tau = std::exp(-model.k[b] * path * lai);
        const double rho_v = model.rho_max[b] * std::exp(-model.alpha[b] * cab);
        out[b] = rho_v * (1.0 - tau) + soil[b] * tau;
    }
    return Reflectance(std::move(out));
}

// ---------------------------------------------------------------------------
// Tabulated model: adapter for externally simulated RTM output.
// ---------------------------------------------------------------------------

enum class LookupMode { Nearest, Multilinear };

struct TabulatedModel {
    std::vector<std::pair<ParamVector, Reflectance>> grid;
    LookupMode lookup_mode = LookupMode::Nearest;

    // Per-dimension range of the grid, used to standardize distances and as
    // the bounding box in multilinear mode.
    std::vector<double> lo, hi;

    TabulatedModel(std::vector<std::pair<ParamVector, Reflectance>> g, LookupMode mode)
        : grid(std::move(g)), lookup_mode(mode) {
        if (grid.empty()) throw std::invalid_argument("TabulatedModel: empty grid");
        const std::size_t m = grid.front().first.size();
        const std::size_t n = grid.front().second.size();
        lo.assign(m, std::numeric_limits<double>::infinity());
        hi.assign(m, -std::numeric_limits<double>::infinity());
        for (const auto& [theta, refl] : grid) {
            if (theta.size() != m || refl.size() != n)
                throw std::invalid_argument("TabulatedModel: inconsistent grid dimensions");
            for (std::size_t j = 0; j < m; ++j) {
                lo[j] = std::min(lo[j], theta.values[j]);
                hi[j] = std::max(hi[j], theta.values[j]);
            }
        }
    }

    std::size_t input_dim() const { return grid.front().first.size(); }
    std::size_t output_dim() const { return grid.front().second.size(); }
};

namespace detail {

inline Reflectance tabulated_nearest(const TabulatedModel& model, const ParamVector& theta) {
    double best = std::numeric_limits<double>::infinity();
    const Reflectance* hit = nullptr;
    for (const auto& [point, refl] : model.grid) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < theta.size(); ++j) {
            const double range = model.hi[j] - model.lo[j];
            const double scale = range > 0 ? range : 1.0;
            const double d = (theta.values[j] - point.values[j]) / scale;
            d2 += d * d;
        }
        if (d2 < best) {
            best = d2;
            hit = &refl;
        }
    }
    return *hit;
}

// Multilinear interpolation on a regular tensor grid. The axis coordinates are
// recovered from the grid entries themselves.
inline Reflectance tabulated_multilinear(const TabulatedModel& model, const ParamVector& theta) {
    const std::size_t m = model.input_dim();
    std::vector<std::vector<double>> axes(m);
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> vals;
        for (const auto& [point, refl] : model.grid) vals.push_back(point.values[j]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end(),
                               [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                   vals.end());
        axes[j] = std::move(vals);
    }
    std::size_t expected = 1;
    for (const auto& axis : axes) expected *= axis.size();
    if (expected != model.grid.size())
        throw std::invalid_argument("eval_tabulated: grid is not a full tensor product");

    std::vector<std::size_t> cell(m);   // lower corner index per axis
    std::vector<double> frac(m);        // position within the cell
    for (std::size_t j = 0; j < m; ++j) {
        const double x = theta.values[j];
        const auto& axis = axes[j];
        if (x < axis.front() - 1e-12 || x > axis.back() + 1e-12)
            throw std::invalid_argument("eval_tabulated: theta outside grid bounding box");
        if (axis.size() == 1) {
            cell[j] = 0;
            frac[j] = 0.0;
            continue;
        }
        auto it = std::upper_bound(axis.begin(), axis.end(), x);
        std::size_t upper = std::min<std::size_t>(it - axis.begin(), axis.size() - 1);
        std::size_t lowi = upper > 0 ? upper - 1 : 0;
        cell[j] = lowi;
        frac[j] = std::clamp((x - axis[lowi]) / (axis[lowi + 1] - axis[lowi]), 0.0, 1.0);
    }

    // Index grid entries by their axis coordinates.
    auto flat_index = [&](const std::vector<std::size_t>& idx) {
        std::size_t flat = 0;
        for (std::size_t j = 0; j < m; ++j) flat = flat * axes[j].size() + idx[j];
        return flat;
    };
    std::vector<const Reflectance*> table(expected, nullptr);
    for (const auto& [point, refl] : model.grid) {
        std::vector<std::size_t> idx(m);
        for (std::size_t j = 0; j < m; ++j) {
            auto it = std::lower_bound(axes[j].begin(), axes[j].end(), point.values[j] - 1e-12);
            idx[j] = it - axes[j].begin();
        }
        table[flat_index(idx)] = &refl;
    }

    const std::size_t n = model.output_dim();
    std::vector<double> out(n, 0.0);
    for (std::size_t corner = 0; corner < (std::size_t{1} << m); ++corner) {
        double weight = 1.0;
        std::vector<std::size_t> idx(m);
        for (std::size_t j = 0; j < m; ++j) {
            const bool upper = (corner >> j) & 1;
            if (axes[j].size() == 1) {
                if (upper) { weight = 0.0; break; }
                idx[j] = 0;
                continue;
            }
            idx[j] = cell[j] + (upper ? 1 : 0);
            weight *= upper ? frac[j] : (1.0 - frac[j]);
        }
        if (weight == 0.0) continue;
        const Reflectance* refl = table[flat_index(idx)];
        if (!refl) throw std::invalid_argument("eval_tabulated: grid is not regular");
        for (std::size_t b = 0; b < n; ++b) out[b] += weight * refl->values[b];
    }
    return Reflectance(std::move(out));
}

}  // namespace detail

inline Reflectance eval_tabulated(const TabulatedModel& model, const ParamVector& theta) {
    if (theta.size() != model.input_dim())
        throw std::invalid_argument("eval_tabulated: theta dimension mismatch");
    return model.lookup_mode == LookupMode::Nearest
               ? detail::tabulated_nearest(model, theta)
               : detail::tabulated_multilinear(model, theta);
}

inline ForwardFn make_forward(LinearGaussianModel model) {
    return [m = std::move(model)](const ParamVector& theta) { return eval_linear(m, theta); };
}

inline ForwardFn make_forward(ToyCanopyModel model) {
    return [m = std::move(model)](const ParamVector& theta) { return eval_canopy(m, theta); };
}

inline ForwardFn make_forward(TabulatedModel model) {
    return [m = std::move(model)](const ParamVector& theta) { return eval_tabulated(m, theta); };
}

}  // namespace upnet
