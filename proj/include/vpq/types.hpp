#pragma once

/// \file types.hpp
/// Core value types shared across the toolkit: latent vectors in the
/// d-dimensional bottleneck space and immutable sample-set views.

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vpq {

using LatentVector = std::vector<double>;

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline void check_vector(std::span<const double> v, std::size_t dim, const char* what) {
    if (v.size() != dim) {
        throw std::invalid_argument(std::string(what) + ": expected dimension " +
                                    std::to_string(dim) + ", got " + std::to_string(v.size()));
    }
    if (!all_finite(v)) {
        throw std::invalid_argument(std::string(what) + ": non-finite coordinate");
    }
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

inline double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// Immutable, shareable view of a set of latent vectors (row-major flat
/// storage). Snapshots taken from a queue are of this type; all distance
/// queries run against it. Copies are cheap (shared ownership).
class SampleSet {
public:
    SampleSet() = default;

    SampleSet(std::vector<double> flat, std::size_t dim) {
        require(dim >= 1, "SampleSet: dim must be >= 1");
        require(flat.size() % dim == 0, "SampleSet: flat size not divisible by dim");
        require(all_finite(flat), "SampleSet: non-finite coordinate");
        dim_ = dim;
        data_ = std::make_shared<const std::vector<double>>(std::move(flat));
    }

    static SampleSet from_vectors(std::span<const LatentVector> rows, std::size_t dim) {
        std::vector<double> flat;
        flat.reserve(rows.size() * dim);
        for (const auto& r : rows) {
            check_vector(r, dim, "SampleSet::from_vectors");
            flat.insert(flat.end(), r.begin(), r.end());
        }
        return SampleSet(std::move(flat), dim);
    }

    std::size_t size() const { return data_ ? data_->size() / dim_ : 0; }
    std::size_t dim() const { return dim_; }
    bool empty() const { return size() == 0; }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data_->data() + i * dim_, dim_);
    }

    std::span<const double> flat() const {
        if (!data_) return {};
        return std::span<const double>(data_->data(), data_->size());
    }

private:
    std::shared_ptr<const std::vector<double>> data_;
    std::size_t dim_ = 0;
};

}  // namespace vpq
