#pragma once

/// \file metrics.hpp
/// Evaluation quantities: utilization of a discrete code vocabulary
/// (exponentiated entropy over K), batch normalization penalties, mean
/// squared error, and histogramming with a fixed bin convention.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vpq/types.hpp"

namespace vpq {

struct UsageCounts {
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;

    static UsageCounts from_counts(std::vector<std::uint64_t> c) {
        UsageCounts u;
        u.total = 0;
        for (std::uint64_t v : c) u.total += v;
        u.counts = std::move(c);
        require(!u.counts.empty(), "UsageCounts: empty counts");
        return u;
    }
};

/// Shannon entropy in nats of the empirical selection probabilities;
/// zero-count codes contribute nothing.
inline double entropy_nats(const UsageCounts& usage) {
    require(!usage.counts.empty(), "entropy_nats: empty counts");
    require(usage.total >= 1, "entropy_nats: zero total");
    double h = 0.0;
    const double inv = 1.0 / static_cast<double>(usage.total);
    for (std::uint64_t c : usage.counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) * inv;
        h -= p * std::log(p);
    }
    return h;
}

/// exp(entropy) / K: 1.0 for perfectly balanced usage, 1/K when a single
/// code absorbs everything.
inline double cvu(const UsageCounts& usage) {
    return std::exp(entropy_nats(usage)) / static_cast<double>(usage.counts.size());
}

struct NormLossParams {
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double target_variance = 1.0;
    bool unbiased = false;  // divide variance by n-1 instead of n

    void validate() const {
        require(lambda1 >= 0.0 && std::isfinite(lambda1), "NormLossParams: bad lambda1");
        require(lambda2 >= 0.0 && std::isfinite(lambda2), "NormLossParams: bad lambda2");
        require(target_variance > 0.0 && std::isfinite(target_variance),
                "NormLossParams: target_variance must be positive");
    }
};

/// lambda1 * |mean|^2 + lambda2 * |variance - target|^2 over per-dimension
/// batch statistics. Population variance unless params.unbiased.
inline double norm_loss(std::span<const LatentVector> batch, const NormLossParams& params) {
    params.validate();
    require(batch.size() >= 2, "norm_loss: need at least 2 vectors");
    const std::size_t d = batch[0].size();
    const double n = static_cast<double>(batch.size());
    std::vector<double> mean(d, 0.0);
    for (const auto& v : batch) {
        check_vector(v, d, "norm_loss input");
        for (std::size_t j = 0; j < d; ++j) mean[j] += v[j];
    }
    for (std::size_t j = 0; j < d; ++j) mean[j] /= n;

    std::vector<double> var(d, 0.0);
    for (const auto& v : batch) {
        for (std::size_t j = 0; j < d; ++j) {
            const double t = v[j] - mean[j];
            var[j] += t * t;
        }
    }
    const double denom = params.unbiased ? n - 1.0 : n;
    double mean_term = 0.0;
    double var_term = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        var[j] /= denom;
        mean_term += mean[j] * mean[j];
        const double dv = var[j] - params.target_variance;
        var_term += dv * dv;
    }
    return params.lambda1 * mean_term + params.lambda2 * var_term;
}

/// Mean over all vectors and dimensions of squared elementwise differences.
inline double mse(std::span<const LatentVector> a, std::span<const LatentVector> b) {
    require(a.size() == b.size(), "mse: length mismatch");
    require(!a.empty(), "mse: empty input");
    const std::size_t d = a[0].size();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        check_vector(a[i], d, "mse input a");
        check_vector(b[i], d, "mse input b");
        for (std::size_t j = 0; j < d; ++j) {
            const double t = a[i][j] - b[i][j];
            s += t * t;
        }
    }
    return s / (static_cast<double>(a.size()) * static_cast<double>(d));
}

struct Histogram {
    std::vector<std::uint64_t> counts;    // one per bin
    std::vector<double> frequencies;      // counts / in-range total
    std::uint64_t below_range = 0;
    std::uint64_t above_range = 0;
};

/// Bins are half-open [e_j, e_{j+1}) except the last, which also contains
/// its upper edge. Out-of-range values are tallied separately.
inline Histogram histogram(std::span<const double> values, std::span<const double> edges) {
    require(edges.size() >= 2, "histogram: need at least 2 edges");
    for (std::size_t j = 1; j < edges.size(); ++j)
        require(edges[j - 1] < edges[j], "histogram: edges must be strictly increasing");

    Histogram h;
    const std::size_t bins = edges.size() - 1;
    h.counts.assign(bins, 0);
    std::uint64_t in_range = 0;
    for (double v : values) {
        require(std::isfinite(v), "histogram: non-finite value");
        if (v < edges.front()) {
            ++h.below_range;
            continue;
        }
        if (v > edges.back()) {
            ++h.above_range;
            continue;
        }
        std::size_t b;
        if (v == edges.back()) {
            b = bins - 1;
        } else {
            const auto it = std::upper_bound(edges.begin(), edges.end(), v);
            b = static_cast<std::size_t>(it - edges.begin()) - 1;
        }
        ++h.counts[b];
        ++in_range;
    }
    h.frequencies.assign(bins, 0.0);
    if (in_range > 0) {
        for (std::size_t b = 0; b < bins; ++b)
            h.frequencies[b] = static_cast<double>(h.counts[b]) / static_cast<double>(in_range);
    }
    return h;
}

/// Median with the even-size convention of averaging the two middle order
/// statistics. Mutates its scratch copy, not the caller's data.
inline double median(std::vector<double> values) {
    require(!values.empty(), "median: empty input");
    const std::size_t n = values.size();
    const std::size_t mid = n / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    const double hi = values[mid];
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(values.begin(), values.begin() + mid);
    return 0.5 * (lo + hi);
}

}  // namespace vpq
