#pragma once

/// \file fsp.hpp
/// Finite scalar perturbation on [0,1]^d: CDF-like activations, equal-width
/// centroid quantization, bounded uniform perturbation with whole-vector
/// accept/reject, the perturb-or-quantize mixture, and two fixed-grid
/// baselines (boundary rounding, Gaussian-percentile bins). Per-dimension
/// indices pack into a single mixed-radix token id.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <span>
#include <utility>
#include <vector>

#include "vpq/normal.hpp"
#include "vpq/rng.hpp"
#include "vpq/types.hpp"

namespace vpq {

enum class ActivationKind { tanh_rescaled, normal_cdf, sigmoid };

/// Pre-activation variance under which each squashing function produces an
/// approximately uniform output on (0,1).
inline double activation_variance(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::tanh_rescaled: return 0.8225;
        case ActivationKind::normal_cdf: return 1.0;
        case ActivationKind::sigmoid: return 3.29;
    }
    throw std::invalid_argument("activation_variance: unknown kind");
}

inline const char* activation_name(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::tanh_rescaled: return "tanh_rescaled";
        case ActivationKind::normal_cdf: return "normal_cdf";
        case ActivationKind::sigmoid: return "sigmoid";
    }
    throw std::invalid_argument("activation_name: unknown kind");
}

struct FspConfig {
    std::vector<std::size_t> levels;  // per-dimension level counts, each >= 2
    double eta = 1.0;                 // perturbation scale; 0 disables noise
    ActivationKind activation = ActivationKind::normal_cdf;
    double mixture_p = 0.5;           // probability of the perturb branch

    std::size_t dim() const { return levels.size(); }

    void validate() const {
        require(!levels.empty(), "FspConfig: levels must be non-empty");
        for (std::size_t L : levels) require(L >= 2, "FspConfig: every level count must be >= 2");
        require(eta >= 0.0 && std::isfinite(eta), "FspConfig: eta must be finite and >= 0");
        require(mixture_p >= 0.0 && mixture_p <= 1.0, "FspConfig: mixture_p must be in [0,1]");
    }
};

struct ScalarQuantized {
    std::vector<std::size_t> indices;
    LatentVector value;
};

namespace detail {

inline void check_unit_interval(std::span<const double> z, const char* what) {
    for (double v : z) require(v >= 0.0 && v <= 1.0, std::string(what) + " outside [0,1]");
}

}  // namespace detail

/// Elementwise squashing onto (0,1), open at both ends even where the
/// double-precision limit saturates.
inline LatentVector activate(std::span<const double> a, ActivationKind kind) {
    require(all_finite(a), "activate: non-finite input");
    const double lo = std::numeric_limits<double>::min();
    const double hi = std::nextafter(1.0, 0.0);
    LatentVector z(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        double v = 0.0;
        switch (kind) {
            case ActivationKind::tanh_rescaled: v = (std::tanh(a[j]) + 1.0) / 2.0; break;
            case ActivationKind::normal_cdf: v = normal_cdf(a[j]); break;
            case ActivationKind::sigmoid: v = 1.0 / (1.0 + std::exp(-a[j])); break;
        }
        z[j] = std::clamp(v, lo, hi);
    }
    return z;
}

/// Midpoints of the L equal-width cells of [0,1]: (l + 1/2) / L.
inline std::vector<double> centroids(std::size_t L) {
    require(L >= 2, "centroids: L must be >= 2");
    std::vector<double> c(L);
    for (std::size_t l = 0; l < L; ++l)
        c[l] = (static_cast<double>(l) + 0.5) / static_cast<double>(L);
    return c;
}

/// Adds u_i ~ U(-eta/(2 L_i), eta/(2 L_i)) per dimension; the whole vector
/// is kept only if every coordinate stays inside [0,1], otherwise z is
/// returned unchanged. Consumes exactly d uniforms either way.
inline LatentVector fsp_perturb(std::span<const double> z, const FspConfig& cfg, Rng& rng) {
    cfg.validate();
    check_vector(z, cfg.dim(), "fsp_perturb input");
    detail::check_unit_interval(z, "fsp_perturb input");
    LatentVector prop(z.size());
    bool in_range = true;
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double half = cfg.eta / (2.0 * static_cast<double>(cfg.levels[j]));
        prop[j] = z[j] + rng.uniform(-half, half);
        in_range = in_range && prop[j] >= 0.0 && prop[j] <= 1.0;
    }
    if (!in_range) prop.assign(z.begin(), z.end());
    return prop;
}

/// Per-dimension cell index floor(L_i z_i) clipped to [0, L_i - 1]; the
/// reproduction value is the cell midpoint.
inline ScalarQuantized fsp_quantize(std::span<const double> z, const FspConfig& cfg) {
    cfg.validate();
    check_vector(z, cfg.dim(), "fsp_quantize input");
    detail::check_unit_interval(z, "fsp_quantize input");
    ScalarQuantized q;
    q.indices.resize(z.size());
    q.value.resize(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double L = static_cast<double>(cfg.levels[j]);
        double l = std::floor(L * z[j]);
        if (l < 0.0) l = 0.0;
        if (l > L - 1.0) l = L - 1.0;
        q.indices[j] = static_cast<std::size_t>(l);
        q.value[j] = (l + 0.5) / L;
    }
    return q;
}

/// Baseline grid quantizer: rounds z_i to the nearest of the L_i boundary
/// points {0, 1/(L_i-1), ..., 1}, ties away from zero.
inline ScalarQuantized fsq_quantize(std::span<const double> z,
                                    std::span<const std::size_t> levels) {
    require(!levels.empty(), "fsq_quantize: empty levels");
    for (std::size_t L : levels) require(L >= 2, "fsq_quantize: every level count must be >= 2");
    check_vector(z, levels.size(), "fsq_quantize input");
    detail::check_unit_interval(z, "fsq_quantize input");
    ScalarQuantized q;
    q.indices.resize(z.size());
    q.value.resize(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double steps = static_cast<double>(levels[j] - 1);
        const double l = std::round(z[j] * steps);
        q.indices[j] = static_cast<std::size_t>(l);
        q.value[j] = l / steps;
    }
    return q;
}

/// Standard-normal percentile grid. Bin j covers [q_j, q_{j+1}) with
/// q_j the normal quantile at probability j/bins; reproduction values are
/// the per-bin conditional means bins * (pdf(q_j) - pdf(q_{j+1})).
class GaussianGrid {
public:
    explicit GaussianGrid(std::size_t bins) : bins_(bins) {
        require(bins >= 2, "GaussianGrid: bins must be >= 2");
        boundaries_.resize(bins - 1);
        for (std::size_t j = 1; j < bins; ++j)
            boundaries_[j - 1] =
                inverse_normal_cdf(static_cast<double>(j) / static_cast<double>(bins));
        values_.resize(bins);
        const double n = static_cast<double>(bins);
        for (std::size_t j = 0; j < bins; ++j) {
            const double lo_pdf = j == 0 ? 0.0 : normal_pdf(boundaries_[j - 1]);
            const double hi_pdf = j + 1 == bins ? 0.0 : normal_pdf(boundaries_[j]);
            values_[j] = n * (lo_pdf - hi_pdf);
        }
    }

    std::size_t bins() const { return bins_; }
    const std::vector<double>& reproduction_values() const { return values_; }

    std::size_t bin_index(double a) const {
        std::size_t j = 0;
        while (j < boundaries_.size() && a >= boundaries_[j]) ++j;
        return j;
    }

    ScalarQuantized quantize(std::span<const double> a) const {
        require(all_finite(a), "GaussianGrid::quantize: non-finite input");
        ScalarQuantized q;
        q.indices.resize(a.size());
        q.value.resize(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) {
            const std::size_t idx = bin_index(a[j]);
            q.indices[j] = idx;
            q.value[j] = values_[idx];
        }
        return q;
    }

private:
    std::size_t bins_;
    std::vector<double> boundaries_;  // interior quantiles, ascending
    std::vector<double> values_;      // per-bin conditional means
};

inline ScalarQuantized gaussian_grid_quantize(std::span<const double> a, std::size_t bins) {
    return GaussianGrid(bins).quantize(a);
}

enum class MixtureBranch { perturbed, quantized };

struct MixtureOutcome {
    LatentVector value;
    MixtureBranch branch = MixtureBranch::quantized;
};

/// Per-call coin: perturb with probability mixture_p, else snap to the
/// centroid grid.
inline MixtureOutcome mixture_forward(std::span<const double> z, const FspConfig& cfg,
                                      Rng& rng) {
    cfg.validate();
    MixtureOutcome out;
    if (rng.uniform01() < cfg.mixture_p) {
        out.value = fsp_perturb(z, cfg, rng);
        out.branch = MixtureBranch::perturbed;
    } else {
        out.value = fsp_quantize(z, cfg).value;
        out.branch = MixtureBranch::quantized;
    }
    return out;
}

/// Product of per-dimension level counts: the effective token vocabulary.
inline std::uint64_t level_product(std::span<const std::size_t> levels) {
    require(!levels.empty(), "level_product: empty levels");
    std::uint64_t p = 1;
    for (std::size_t L : levels) {
        require(L >= 1, "level_product: zero level count");
        require(p <= std::numeric_limits<std::uint64_t>::max() / L,
                "level_product: vocabulary overflows 64 bits");
        p *= L;
    }
    return p;
}

/// Mixed-radix packing of per-dimension indices, first index most
/// significant. Bijective onto [0, product of levels).
inline std::uint64_t index_pack(std::span<const std::size_t> indices,
                                std::span<const std::size_t> levels) {
    require(indices.size() == levels.size(), "index_pack: shape mismatch");
    require(!levels.empty(), "index_pack: empty levels");
    std::uint64_t id = 0;
    for (std::size_t j = 0; j < indices.size(); ++j) {
        require(indices[j] < levels[j], "index_pack: index out of range");
        id = id * levels[j] + indices[j];
    }
    return id;
}

inline std::vector<std::size_t> index_unpack(std::uint64_t id,
                                             std::span<const std::size_t> levels) {
    require(id < level_product(levels), "index_unpack: id out of range");
    std::vector<std::size_t> indices(levels.size());
    for (std::size_t j = levels.size(); j-- > 0;) {
        indices[j] = static_cast<std::size_t>(id % levels[j]);
        id /= levels[j];
    }
    return indices;
}

/// Default level allocations for the benchmark vocabulary sizes.
inline std::vector<std::size_t> default_levels(std::size_t K) {
    switch (K) {
        case 256: return {8, 6, 5};
        case 1024: return {8, 5, 5, 5};
        case 4096: return {7, 5, 5, 5, 5};
        case 16384: return {8, 8, 8, 6, 5};
        default:
            throw std::invalid_argument("default_levels: no preset for this vocabulary size");
    }
}

}  // namespace vpq
