#pragma once

// Shared statistical helpers for the test suite: KS statistics, rank
// correlation, and source-spec builders.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "vpq/sources.hpp"
#include "vpq/types.hpp"

namespace vpqtest {

// One-sample Kolmogorov-Smirnov statistic against a reference CDF.
inline double ks_one_sample(std::vector<double> xs,
                            const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

// Average ranks, ties sharing the mean of their rank range.
inline std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
        i = j + 1;
    }
    return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double num = 0.0;
    double da = 0.0;
    double db = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double xa = a[i] - ma;
        const double xb = b[i] - mb;
        num += xa * xb;
        da += xa * xa;
        db += xb * xb;
    }
    return num / std::sqrt(da * db);
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    return pearson(ranks(a), ranks(b));
}

// Builds a snapshot from a braced row list.
inline vpq::SampleSet make_set(std::vector<vpq::LatentVector> rows, std::size_t dim) {
    return vpq::SampleSet::from_vectors(rows, dim);
}

inline vpq::SourceSpec gaussian_spec(std::size_t dim, std::uint64_t seed) {
    vpq::SourceSpec s;
    s.kind = vpq::SourceKind::gaussian;
    s.dim = dim;
    s.seed = seed;
    return s;
}

inline vpq::SourceSpec uniform_spec(std::size_t dim, std::uint64_t seed, double lo = 0.0,
                                    double hi = 1.0) {
    vpq::SourceSpec s;
    s.kind = vpq::SourceKind::uniform_cube;
    s.dim = dim;
    s.seed = seed;
    s.cube_lo = lo;
    s.cube_hi = hi;
    return s;
}

// Two symmetric modes at +/-offset along the first axis.
inline vpq::SourceSpec two_mode_spec(std::size_t dim, std::uint64_t seed, double offset,
                                     double sigma, double w0 = 0.5) {
    vpq::SourceSpec s;
    s.kind = vpq::SourceKind::gaussian_mixture;
    s.dim = dim;
    s.seed = seed;
    vpq::MixtureComponent a;
    a.weight = w0;
    a.mean.assign(dim, 0.0);
    a.mean[0] = -offset;
    a.sigma = sigma;
    vpq::MixtureComponent b;
    b.weight = 1.0 - w0;
    b.mean.assign(dim, 0.0);
    b.mean[0] = offset;
    b.sigma = sigma;
    s.components = {a, b};
    return s;
}

inline vpq::SourceSpec annulus_spec(std::size_t dim, std::uint64_t seed, double inner,
                                    double outer) {
    vpq::SourceSpec s;
    s.kind = vpq::SourceKind::annulus;
    s.dim = dim;
    s.seed = seed;
    s.inner_radius = inner;
    s.outer_radius = outer;
    return s;
}

}  // namespace vpqtest
