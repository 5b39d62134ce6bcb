#pragma once

/// \file codebook.hpp
/// Offline codebook generation (K-Means++ seeding, Lloyd refinement) and
/// inference-time nearest-code assignment. Assignment semantics are a
/// brute-force argmin over squared Euclidean distances with ties going to
/// the lowest code index; the fit loop reuses the same scan so training
/// and inference can never disagree.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vpq/io.hpp"
#include "vpq/rng.hpp"
#include "vpq/types.hpp"

namespace vpq {

struct Codebook {
    std::vector<double> flat;  // K x dim, row-major
    std::size_t dim = 0;

    std::size_t size() const { return dim == 0 ? 0 : flat.size() / dim; }

    std::span<const double> code(std::size_t j) const {
        return std::span<const double>(flat.data() + j * dim, dim);
    }

    void validate() const {
        require(dim >= 1, "Codebook: dim must be >= 1");
        require(!flat.empty() && flat.size() % dim == 0, "Codebook: bad storage shape");
        require(all_finite(flat), "Codebook: non-finite code");
    }
};

struct KMeansReport {
    std::size_t iterations = 0;
    double final_inertia = 0.0;
    bool converged = false;
    std::vector<double> inertia_trace;  // per-iteration, final value last
};

struct CodeAssignment {
    std::size_t index = 0;
    LatentVector code;
    double error = 0.0;  // Euclidean distance to the chosen code
};

struct BatchAssignment {
    std::vector<std::size_t> indices;
    std::vector<std::uint64_t> counts;  // per-code usage, sums to batch size
};

namespace detail {

/// Index of the nearest code and the squared distance to it; ties resolve
/// to the lowest index by strict comparison.
inline std::pair<std::size_t, double> nearest_code(std::span<const double> z,
                                                   const Codebook& cb) {
    const std::size_t K = cb.size();
    const std::size_t d = cb.dim;
    const double* base = cb.flat.data();
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < K; ++j) {
        const double* row = base + j * d;
        double s = 0.0;
        for (std::size_t t = 0; t < d; ++t) {
            const double diff = z[t] - row[t];
            s += diff * diff;
        }
        if (s < best_d2) {
            best_d2 = s;
            best = j;
        }
    }
    return {best, best_d2};
}

}  // namespace detail

inline CodeAssignment quantize(std::span<const double> z, const Codebook& cb) {
    cb.validate();
    check_vector(z, cb.dim, "quantize input");
    const auto [idx, d2] = detail::nearest_code(z, cb);
    CodeAssignment a;
    a.index = idx;
    a.code.assign(cb.code(idx).begin(), cb.code(idx).end());
    a.error = std::sqrt(d2);
    return a;
}

inline BatchAssignment quantize_batch(std::span<const LatentVector> batch, const Codebook& cb) {
    cb.validate();
    BatchAssignment out;
    out.indices.reserve(batch.size());
    out.counts.assign(cb.size(), 0);
    for (const auto& z : batch) {
        check_vector(z, cb.dim, "quantize_batch input");
        const auto [idx, d2] = detail::nearest_code(z, cb);
        (void)d2;
        out.indices.push_back(idx);
        ++out.counts[idx];
    }
    return out;
}

namespace detail {

inline void kmeanspp_init(const SampleSet& samples, std::size_t K, Rng& rng, Codebook& cb) {
    const std::size_t n = samples.size();
    const std::size_t d = samples.dim();
    cb.dim = d;
    cb.flat.clear();
    cb.flat.reserve(K * d);

    const auto append_center = [&](std::size_t i) {
        const auto r = samples.row(i);
        cb.flat.insert(cb.flat.end(), r.begin(), r.end());
    };

    append_center(rng.below(n));
    std::vector<double> min_d2(n);
    for (std::size_t i = 0; i < n; ++i)
        min_d2[i] = squared_distance(samples.row(i), cb.code(0));

    for (std::size_t c = 1; c < K; ++c) {
        double total = 0.0;
        for (double v : min_d2) total += v;
        std::size_t pick = 0;
        if (total > 0.0) {
            const double u = rng.uniform01() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += min_d2[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(n);  // all mass on existing centers; degenerate data
        }
        append_center(pick);
        const auto nc = cb.code(c);
        for (std::size_t i = 0; i < n; ++i) {
            const double d2 = squared_distance(samples.row(i), nc);
            if (d2 < min_d2[i]) min_d2[i] = d2;
        }
    }
}

inline bool codes_equal(const Codebook& cb, std::size_t a, std::size_t b) {
    const auto ra = cb.code(a);
    const auto rb = cb.code(b);
    for (std::size_t t = 0; t < cb.dim; ++t) {
        if (ra[t] != rb[t]) return false;
    }
    return true;
}

/// Replaces every duplicate code with the sample farthest from the current
/// codebook; guarantees pairwise-distinct codes or throws when the data
/// itself has too few distinct points.
inline void deduplicate_codes(const SampleSet& samples, Codebook& cb) {
    const std::size_t K = cb.size();
    for (std::size_t j = 1; j < K; ++j) {
        bool dup = false;
        for (std::size_t i = 0; i < j && !dup; ++i) dup = codes_equal(cb, i, j);
        if (!dup) continue;
        std::size_t best = 0;
        double best_d2 = 0.0;
        for (std::size_t s = 0; s < samples.size(); ++s) {
            const double d2 = nearest_code(samples.row(s), cb).second;
            if (d2 > best_d2) {
                best_d2 = d2;
                best = s;
            }
        }
        require(best_d2 > 0.0, "kmeans_fit: fewer distinct samples than K");
        const auto r = samples.row(best);
        std::copy(r.begin(), r.end(), cb.flat.begin() + j * cb.dim);
    }
}

}  // namespace detail

/// K-Means++ seeding followed by Lloyd iterations until the largest
/// centroid shift drops below tol or max_iter is hit. Empty clusters are
/// re-seeded from the point farthest from its assigned centroid. Fixed
/// seed gives an identical codebook.
inline std::pair<Codebook, KMeansReport> kmeans_fit(const SampleSet& samples, std::size_t K,
                                                    std::uint64_t seed,
                                                    std::size_t max_iter = 100,
                                                    double tol = 1e-6) {
    const std::size_t n = samples.size();
    const std::size_t d = samples.dim();
    require(K >= 1, "kmeans_fit: K must be >= 1");
    require(n >= K, "kmeans_fit: fewer samples than K");
    require(tol >= 0.0 && std::isfinite(tol), "kmeans_fit: bad tol");

    Rng rng(seed);
    Codebook cb;
    detail::kmeanspp_init(samples, K, rng, cb);

    KMeansReport report;
    std::vector<std::size_t> assign(n);
    std::vector<double> sums(K * d);
    std::vector<std::uint64_t> counts(K);
    std::vector<double> dist2(n);

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        double inertia = 0.0;
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = samples.row(i);
            const auto [idx, d2] = detail::nearest_code(row, cb);
            assign[i] = idx;
            dist2[i] = d2;
            inertia += d2;
            ++counts[idx];
            double* s = sums.data() + idx * d;
            for (std::size_t t = 0; t < d; ++t) s[t] += row[t];
        }
        report.inertia_trace.push_back(inertia);
        ++report.iterations;

        Codebook next = cb;
        for (std::size_t j = 0; j < K; ++j) {
            if (counts[j] == 0) continue;
            const double inv = 1.0 / static_cast<double>(counts[j]);
            double* c = next.flat.data() + j * d;
            const double* s = sums.data() + j * d;
            for (std::size_t t = 0; t < d; ++t) c[t] = s[t] * inv;
        }
        std::vector<bool> taken(n, false);
        for (std::size_t j = 0; j < K; ++j) {
            if (counts[j] != 0) continue;
            std::size_t far = 0;
            double far_d2 = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!taken[i] && dist2[i] > far_d2) {
                    far_d2 = dist2[i];
                    far = i;
                }
            }
            taken[far] = true;
            const auto r = samples.row(far);
            std::copy(r.begin(), r.end(), next.flat.begin() + j * d);
        }

        double max_shift = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
            const double shift = distance(cb.code(j), next.code(j));
            if (shift > max_shift) max_shift = shift;
        }
        cb = std::move(next);
        if (max_shift < tol) {
            report.converged = true;
            break;
        }
    }

    detail::deduplicate_codes(samples, cb);

    double final_inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        final_inertia += detail::nearest_code(samples.row(i), cb).second;
    report.final_inertia = final_inertia;
    report.inertia_trace.push_back(final_inertia);
    return {std::move(cb), report};
}

inline void write_codebook(std::ostream& os, const Codebook& cb) {
    cb.validate();
    write_matrix(os, kCodebookMagic, static_cast<std::uint32_t>(cb.dim), cb.flat);
}

inline void write_codebook_file(const std::string& path, const Codebook& cb) {
    cb.validate();
    write_matrix_file(path, kCodebookMagic, static_cast<std::uint32_t>(cb.dim), cb.flat);
}

inline Codebook read_codebook(std::istream& is) {
    auto m = read_matrix(is, kCodebookMagic);
    Codebook cb;
    cb.dim = m.dim;
    cb.flat = std::move(m.flat);
    cb.validate();
    return cb;
}

inline Codebook read_codebook_file(const std::string& path) {
    auto m = read_matrix_file(path, kCodebookMagic);
    Codebook cb;
    cb.dim = m.dim;
    cb.flat = std::move(m.flat);
    cb.validate();
    return cb;
}

}  // namespace vpq
