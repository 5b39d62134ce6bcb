#pragma once

/// \file sample_queue.hpp
/// Bounded FIFO buffer of recent latent vectors with random batch
/// subsampling. Snapshots are immutable and safe to share across readers;
/// pushes are single-writer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vpq/io.hpp"
#include "vpq/rng.hpp"
#include "vpq/types.hpp"

namespace vpq {

class SampleQueue {
public:
    SampleQueue(std::size_t capacity, std::size_t dim) : capacity_(capacity), dim_(dim) {
        require(capacity >= 1, "SampleQueue: capacity must be >= 1");
        require(dim >= 1, "SampleQueue: dim must be >= 1");
        data_.resize(capacity * dim);
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return count_; }

    /// Append one vector, evicting the oldest entry when full.
    void push(std::span<const double> v) {
        check_vector(v, dim_, "SampleQueue::push");
        const std::size_t slot = (head_ + count_) % capacity_;
        std::copy(v.begin(), v.end(), data_.begin() + slot * dim_);
        if (count_ < capacity_) {
            ++count_;
        } else {
            head_ = (head_ + 1) % capacity_;
        }
    }

    /// Insert ceil(fraction * |batch|) vectors chosen uniformly without
    /// replacement, appended in batch order. Returns the insertion count.
    std::size_t push_subsampled(std::span<const LatentVector> batch, double fraction, Rng& rng) {
        require(fraction > 0.0 && fraction <= 1.0, "push_subsampled: fraction must be in (0, 1]");
        for (const auto& v : batch) check_vector(v, dim_, "push_subsampled");
        if (batch.empty()) return 0;

        const std::size_t n = batch.size();
        // Tolerate representation error in fraction*n before the ceiling.
        const double target = fraction * static_cast<double>(n);
        std::size_t m = static_cast<std::size_t>(std::ceil(target * (1.0 - 1e-12)));
        if (m > n) m = n;
        if (m == 0) m = 1;

        std::vector<std::uint32_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0u);
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
            std::swap(idx[i], idx[j]);
        }
        std::sort(idx.begin(), idx.begin() + m);
        for (std::size_t i = 0; i < m; ++i) push(batch[idx[i]]);
        return m;
    }

    /// Immutable copy of the current entries in FIFO order (oldest first).
    SampleSet snapshot() const {
        std::vector<double> flat(count_ * dim_);
        for (std::size_t i = 0; i < count_; ++i) {
            const std::size_t slot = (head_ + i) % capacity_;
            std::copy_n(data_.begin() + slot * dim_, dim_, flat.begin() + i * dim_);
        }
        return SampleSet(std::move(flat), dim_);
    }

    void dump(std::ostream& os) const {
        SampleSet s = snapshot();
        write_matrix(os, kLatentDumpMagic, static_cast<std::uint32_t>(dim_), s.flat());
    }

    void dump_file(const std::string& path) const {
        write_latent_dump(path, snapshot());
    }

    /// Rebuild a queue from a dump. The file does not record capacity;
    /// `capacity` = 0 sizes the queue to exactly the stored entries.
    static SampleQueue load(std::istream& is, std::size_t capacity = 0) {
        MatrixData m = read_matrix(is, kLatentDumpMagic);
        const std::size_t count = m.flat.size() / m.dim;
        SampleQueue q(capacity == 0 ? std::max<std::size_t>(count, 1) : capacity, m.dim);
        for (std::size_t i = 0; i < count; ++i) {
            q.push(std::span<const double>(m.flat.data() + i * m.dim, m.dim));
        }
        return q;
    }

private:
    std::size_t capacity_;
    std::size_t dim_;
    std::size_t head_ = 0;
    std::size_t count_ = 0;
    std::vector<double> data_;  // ring buffer, capacity * dim
};

}  // namespace vpq
