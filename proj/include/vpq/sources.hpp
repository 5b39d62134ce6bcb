#pragma once

/// \file sources.hpp
/// Synthetic latent distributions with analytic densities. They stand in
/// for encoder outputs so that every downstream claim (stationarity,
/// support, utilization, density fidelity) can be checked against ground
/// truth without any trained network.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "vpq/rng.hpp"
#include "vpq/types.hpp"

namespace vpq {

enum class SourceKind { uniform_cube, gaussian, gaussian_mixture, annulus };

inline const char* source_kind_name(SourceKind k) {
    switch (k) {
        case SourceKind::uniform_cube: return "uniform_cube";
        case SourceKind::gaussian: return "gaussian";
        case SourceKind::gaussian_mixture: return "gaussian_mixture";
        case SourceKind::annulus: return "annulus";
    }
    throw std::invalid_argument("source_kind_name: unknown kind");
}

inline SourceKind parse_source_kind(const std::string& s) {
    if (s == "uniform_cube") return SourceKind::uniform_cube;
    if (s == "gaussian") return SourceKind::gaussian;
    if (s == "gaussian_mixture") return SourceKind::gaussian_mixture;
    if (s == "annulus") return SourceKind::annulus;
    throw std::invalid_argument("unknown source kind: " + s);
}

struct MixtureComponent {
    double weight = 0.0;
    LatentVector mean;   // length dim
    double sigma = 1.0;  // isotropic standard deviation
};

struct SourceSpec {
    SourceKind kind = SourceKind::uniform_cube;
    std::size_t dim = 1;
    std::uint64_t seed = 0;

    // uniform_cube
    double cube_lo = 0.0;
    double cube_hi = 1.0;

    // gaussian: empty means zeros / unit variances; length 1 broadcasts
    LatentVector mean;
    LatentVector variance;

    // gaussian_mixture
    std::vector<MixtureComponent> components;

    // annulus: support is inner <= |x| <= outer
    double inner_radius = 0.5;
    double outer_radius = 1.0;

    void validate() const {
        require(dim >= 1, "SourceSpec: dim must be >= 1");
        switch (kind) {
            case SourceKind::uniform_cube:
                require(cube_lo < cube_hi, "SourceSpec: cube_lo must be < cube_hi");
                require(std::isfinite(cube_lo) && std::isfinite(cube_hi),
                        "SourceSpec: non-finite cube bounds");
                break;
            case SourceKind::gaussian: {
                require(mean.empty() || mean.size() == 1 || mean.size() == dim,
                        "SourceSpec: mean must be empty, scalar, or dim-length");
                require(variance.empty() || variance.size() == 1 || variance.size() == dim,
                        "SourceSpec: variance must be empty, scalar, or dim-length");
                for (double m : mean) require(std::isfinite(m), "SourceSpec: non-finite mean");
                for (double v : variance)
                    require(v > 0.0 && std::isfinite(v), "SourceSpec: variance must be positive");
                break;
            }
            case SourceKind::gaussian_mixture: {
                require(!components.empty(), "SourceSpec: mixture needs components");
                double wsum = 0.0;
                for (const auto& c : components) {
                    require(c.weight > 0.0, "SourceSpec: mixture weights must be positive");
                    require(c.sigma > 0.0 && std::isfinite(c.sigma),
                            "SourceSpec: component sigma must be positive");
                    check_vector(c.mean, dim, "SourceSpec component mean");
                    wsum += c.weight;
                }
                require(std::abs(wsum - 1.0) <= 1e-9, "SourceSpec: mixture weights must sum to 1");
                break;
            }
            case SourceKind::annulus:
                require(inner_radius >= 0.0, "SourceSpec: inner radius must be >= 0");
                require(inner_radius < outer_radius,
                        "SourceSpec: inner radius must be < outer radius");
                require(std::isfinite(outer_radius), "SourceSpec: non-finite outer radius");
                break;
        }
    }
};

namespace detail {

inline double broadcast_at(const LatentVector& v, std::size_t j, double fallback) {
    if (v.empty()) return fallback;
    if (v.size() == 1) return v[0];
    return v[j];
}

inline double gaussian_pdf_1d(double x, double mean, double variance) {
    const double t = x - mean;
    return std::exp(-t * t / (2.0 * variance)) /
           std::sqrt(2.0 * std::numbers::pi * variance);
}

/// Volume of the d-ball of radius r.
inline double ball_volume(std::size_t d, double r) {
    const double hd = static_cast<double>(d) / 2.0;
    return std::pow(std::numbers::pi, hd) / std::tgamma(hd + 1.0) *
           std::pow(r, static_cast<double>(d));
}

inline void sample_one(const SourceSpec& spec, Rng& rng, LatentVector& out) {
    const std::size_t d = spec.dim;
    out.resize(d);
    switch (spec.kind) {
        case SourceKind::uniform_cube:
            for (std::size_t j = 0; j < d; ++j) out[j] = rng.uniform(spec.cube_lo, spec.cube_hi);
            break;
        case SourceKind::gaussian:
            for (std::size_t j = 0; j < d; ++j) {
                const double m = broadcast_at(spec.mean, j, 0.0);
                const double v = broadcast_at(spec.variance, j, 1.0);
                out[j] = m + std::sqrt(v) * rng.normal();
            }
            break;
        case SourceKind::gaussian_mixture: {
            const double u = rng.uniform01();
            double acc = 0.0;
            const MixtureComponent* pick = &spec.components.back();
            for (const auto& c : spec.components) {
                acc += c.weight;
                if (u < acc) {
                    pick = &c;
                    break;
                }
            }
            for (std::size_t j = 0; j < d; ++j)
                out[j] = pick->mean[j] + pick->sigma * rng.normal();
            break;
        }
        case SourceKind::annulus: {
            double norm2 = 0.0;
            do {
                norm2 = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    out[j] = rng.normal();
                    norm2 += out[j] * out[j];
                }
            } while (std::sqrt(norm2) < 1e-30);
            const double dd = static_cast<double>(d);
            const double lo = std::pow(spec.inner_radius, dd);
            const double hi = std::pow(spec.outer_radius, dd);
            const double r = std::pow(lo + rng.uniform01() * (hi - lo), 1.0 / dd);
            const double scale = r / std::sqrt(norm2);
            for (std::size_t j = 0; j < d; ++j) out[j] *= scale;
            break;
        }
    }
}

}  // namespace detail

/// n i.i.d. draws. Distinct `stream` values give independent batches under
/// the same spec seed; the draw for a given (seed, stream, position) never
/// depends on n.
inline std::vector<LatentVector> sample_source(const SourceSpec& spec, std::size_t n,
                                               std::uint64_t stream = 0) {
    spec.validate();
    Rng rng = Rng(spec.seed).substream(stream);
    std::vector<LatentVector> out(n);
    for (std::size_t i = 0; i < n; ++i) detail::sample_one(spec, rng, out[i]);
    return out;
}

/// Exact probability density of the source at a point.
inline double source_density(const SourceSpec& spec, std::span<const double> point) {
    spec.validate();
    check_vector(point, spec.dim, "source_density point");
    switch (spec.kind) {
        case SourceKind::uniform_cube: {
            const double w = spec.cube_hi - spec.cube_lo;
            for (double x : point) {
                if (x < spec.cube_lo || x > spec.cube_hi) return 0.0;
            }
            return std::pow(w, -static_cast<double>(spec.dim));
        }
        case SourceKind::gaussian: {
            double p = 1.0;
            for (std::size_t j = 0; j < spec.dim; ++j) {
                const double m = detail::broadcast_at(spec.mean, j, 0.0);
                const double v = detail::broadcast_at(spec.variance, j, 1.0);
                p *= detail::gaussian_pdf_1d(point[j], m, v);
            }
            return p;
        }
        case SourceKind::gaussian_mixture: {
            double p = 0.0;
            for (const auto& c : spec.components) {
                double cp = c.weight;
                for (std::size_t j = 0; j < spec.dim; ++j)
                    cp *= detail::gaussian_pdf_1d(point[j], c.mean[j], c.sigma * c.sigma);
                p += cp;
            }
            return p;
        }
        case SourceKind::annulus: {
            const double r = norm(point);
            if (r < spec.inner_radius || r > spec.outer_radius) return 0.0;
            const double vol = detail::ball_volume(spec.dim, spec.outer_radius) -
                               detail::ball_volume(spec.dim, spec.inner_radius);
            return 1.0 / vol;
        }
    }
    throw std::invalid_argument("source_density: unknown kind");
}

}  // namespace vpq
