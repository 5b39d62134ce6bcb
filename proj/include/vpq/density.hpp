#pragma once

/// \file density.hpp
/// Exact k-nearest-neighbor distance queries, the kNN log-density
/// estimate, and the local quantization radius derived from it.
///
/// Reference semantics are a full brute-force distance sort; the partial
/// selection used here returns identical values (order statistics of the
/// same distance multiset). Kept exact on purpose: d <= 16 and sample sets
/// up to ~1e5 make a linear scan tractable, and approximate indexes are
/// out of scope.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "vpq/types.hpp"

namespace vpq {

/// Floor applied to distances before taking logs; guards duplicate samples.
inline constexpr double kDistanceFloor = 1e-12;

struct RadiusParams {
    std::size_t codebook_size = 256;  // target K
    double eta = 1.0;                 // perturbation scale
    std::size_t knn_k = 3;            // density estimator order

    void validate() const {
        require(codebook_size >= 1, "RadiusParams: codebook_size must be >= 1");
        require(eta > 0.0 && std::isfinite(eta), "RadiusParams: eta must be positive");
        require(knn_k >= 1, "RadiusParams: knn_k must be >= 1");
    }
};

/// M = ceil(sample_count / K): expected points per cell when K codes
/// partition the sample set evenly.
inline std::size_t cell_count(std::size_t sample_count, std::size_t K) {
    require(sample_count >= 1, "cell_count: sample_count must be >= 1");
    require(K >= 1, "cell_count: K must be >= 1");
    return (sample_count + K - 1) / K;
}

namespace detail {

inline void all_squared_distances(std::span<const double> query, const SampleSet& samples,
                                  std::vector<double>& out) {
    const std::size_t n = samples.size();
    const std::size_t d = samples.dim();
    const double* base = samples.flat().data();
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = base + i * d;
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double t = query[j] - row[j];
            s += t * t;
        }
        out[i] = s;
    }
}

inline std::vector<double>& dist_scratch() {
    thread_local std::vector<double> buf;
    return buf;
}

/// m-th and M-th smallest squared distances (m <= M) in one pass over the
/// scratch buffer. Two nth_element selections, the second on the prefix
/// left behind by the first.
inline std::pair<double, double> select_two(std::vector<double>& d2, std::size_t m,
                                            std::size_t M) {
    std::nth_element(d2.begin(), d2.begin() + (M - 1), d2.end());
    const double dM = d2[M - 1];
    if (m == M) return {dM, dM};
    std::nth_element(d2.begin(), d2.begin() + (m - 1), d2.begin() + (M - 1));
    return {d2[m - 1], dM};
}

}  // namespace detail

/// Euclidean distance from `query` to its m-th nearest sample. Ties on
/// distance break by insertion order, which cannot change the returned
/// value (equal keys).
inline double knn_distance(std::span<const double> query, const SampleSet& samples,
                           std::size_t m) {
    require(!samples.empty(), "knn_distance: empty sample set");
    require(m >= 1 && m <= samples.size(), "knn_distance: m out of range");
    check_vector(query, samples.dim(), "knn_distance query");
    auto& d2 = detail::dist_scratch();
    detail::all_squared_distances(query, samples, d2);
    std::nth_element(d2.begin(), d2.begin() + (m - 1), d2.end());
    return std::sqrt(d2[m - 1]);
}

/// (D_m, D_M) for m <= M from a single distance pass.
inline std::pair<double, double> knn_distance_pair(std::span<const double> query,
                                                   const SampleSet& samples, std::size_t m,
                                                   std::size_t M) {
    require(!samples.empty(), "knn_distance_pair: empty sample set");
    require(m >= 1 && m <= M && M <= samples.size(), "knn_distance_pair: order out of range");
    check_vector(query, samples.dim(), "knn_distance_pair query");
    auto& d2 = detail::dist_scratch();
    detail::all_squared_distances(query, samples, d2);
    auto [a, b] = detail::select_two(d2, m, M);
    return {std::sqrt(a), std::sqrt(b)};
}

/// Local quantization radius R(z) = eta * D_M(z), M = ceil(|S| / K).
inline double local_radius(std::span<const double> query, const SampleSet& samples,
                           const RadiusParams& params) {
    params.validate();
    require(!samples.empty(), "local_radius: empty sample set");
    const std::size_t M = cell_count(samples.size(), params.codebook_size);
    return params.eta * knn_distance(query, samples, M);
}

/// Unnormalized log density: -d * log(max(D_k(z), floor)).
inline double log_density(std::span<const double> query, const SampleSet& samples,
                          std::size_t knn_k) {
    require(knn_k >= 1 && knn_k <= samples.size(), "log_density: knn_k out of range");
    const double dk = knn_distance(query, samples, knn_k);
    return -static_cast<double>(samples.dim()) * std::log(std::max(dk, kDistanceFloor));
}

}  // namespace vpq
