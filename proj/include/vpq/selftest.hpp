#pragma once

/// \file selftest.hpp
/// Fast invariant battery behind the CLI `selftest` subcommand. Each check
/// is a cheap, deterministic probe of one module contract; the full
/// statistical validation lives in the test suite.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "vpq/codebook.hpp"
#include "vpq/density.hpp"
#include "vpq/fsp.hpp"
#include "vpq/metrics.hpp"
#include "vpq/normal.hpp"
#include "vpq/perturb.hpp"
#include "vpq/sample_queue.hpp"
#include "vpq/sources.hpp"

namespace vpq {

namespace detail {

struct SelfCheck {
    std::string name;
    std::function<bool()> body;
};

inline SourceSpec standard_gaussian_spec(std::size_t dim, std::uint64_t seed) {
    SourceSpec s;
    s.kind = SourceKind::gaussian;
    s.dim = dim;
    s.seed = seed;
    return s;
}

inline std::vector<SelfCheck> build_self_checks() {
    std::vector<SelfCheck> checks;

    checks.push_back({"ball_membership", [] {
        Rng rng(11);
        const LatentVector center{0.3, -1.2, 4.0};
        for (int i = 0; i < 2000; ++i) {
            const auto p = sample_ball(center, 1.25, rng);
            if (distance(p, center) > 1.25) return false;
        }
        const auto at_zero = sample_ball(center, 0.0, rng);
        return at_zero == center;
    }});

    checks.push_back({"token_pack_roundtrip", [] {
        const std::vector<std::size_t> levels{8, 6, 5};
        for (std::uint64_t id = 0; id < level_product(levels); ++id) {
            if (index_pack(index_unpack(id, levels), levels) != id) return false;
        }
        return true;
    }});

    checks.push_back({"centroid_idempotence", [] {
        Rng rng(5);
        FspConfig cfg;
        cfg.levels = {4, 5, 8};
        for (int i = 0; i < 200; ++i) {
            LatentVector z{rng.uniform01(), rng.uniform01(), rng.uniform01()};
            const auto once = fsp_quantize(z, cfg);
            const auto twice = fsp_quantize(once.value, cfg);
            if (once.value != twice.value || once.indices != twice.indices) return false;
        }
        return true;
    }});

    checks.push_back({"cvu_exact_cases", [] {
        const auto u1 = UsageCounts::from_counts({5, 5, 5, 5});
        const auto u2 = UsageCounts::from_counts({7, 0, 0, 0});
        const auto u3 = UsageCounts::from_counts({3, 1});
        return std::abs(cvu(u1) - 1.0) < 1e-12 && std::abs(cvu(u2) - 0.25) < 1e-12 &&
               std::abs(cvu(u3) - 0.8773826753) < 1e-6;
    }});

    checks.push_back({"queue_fifo_eviction", [] {
        SampleQueue q(3, 1);
        for (double v : {1.0, 2.0, 3.0, 4.0}) q.push(LatentVector{v});
        const auto snap = q.snapshot();
        return snap.size() == 3 && snap.row(0)[0] == 2.0 && snap.row(1)[0] == 3.0 &&
               snap.row(2)[0] == 4.0;
    }});

    checks.push_back({"knn_matches_full_sort", [] {
        Rng rng(17);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 5 + rng.below(45);
            std::vector<double> flat(n * 2);
            for (auto& x : flat) x = rng.uniform(-2.0, 2.0);
            const SampleSet set(flat, 2);
            const LatentVector q{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
            std::vector<double> all(n);
            for (std::size_t i = 0; i < n; ++i) all[i] = distance(q, set.row(i));
            std::sort(all.begin(), all.end());
            const std::size_t m = 1 + rng.below(n);
            if (knn_distance(q, set, m) != all[m - 1]) return false;
        }
        return true;
    }});

    checks.push_back({"kmeans_seed_determinism", [] {
        Rng rng(23);
        std::vector<double> flat(60 * 2);
        for (auto& x : flat) x = rng.uniform(-1.0, 1.0);
        const SampleSet set(flat, 2);
        const auto [cb1, r1] = kmeans_fit(set, 4, 99);
        const auto [cb2, r2] = kmeans_fit(set, 4, 99);
        return cb1.flat == cb2.flat && r1.iterations == r2.iterations;
    }});

    checks.push_back({"normal_cdf_inverse_roundtrip", [] {
        for (double x = -5.0; x <= 5.0; x += 0.25) {
            const double back = inverse_normal_cdf(normal_cdf(x));
            if (std::abs(back - x) > 1e-9) return false;
        }
        return true;
    }});

    checks.push_back({"perturb_seed_determinism", [] {
        const auto samples = sample_source(standard_gaussian_spec(2, 3), 400);
        const SampleSet set = SampleSet::from_vectors(samples, 2);
        PerturbConfig cfg;
        cfg.radius.codebook_size = 16;
        cfg.dim = 2;
        const LatentVector z{0.1, -0.4};
        Rng a(7);
        Rng b(7);
        const auto o1 = perturb(z, set, cfg, a);
        const auto o2 = perturb(z, set, cfg, b);
        return o1.result == o2.result && o1.accepted == o2.accepted &&
               o1.log_alpha == o2.log_alpha;
    }});

    checks.push_back({"accepted_moves_satisfy_support", [] {
        const auto samples = sample_source(standard_gaussian_spec(2, 31), 500);
        const SampleSet set = SampleSet::from_vectors(samples, 2);
        PerturbConfig cfg;
        cfg.radius.codebook_size = 32;
        cfg.dim = 2;
        const std::size_t M = cell_count(set.size(), cfg.radius.codebook_size);
        Rng rng(13);
        const auto queries = sample_source(standard_gaussian_spec(2, 37), 2000);
        for (const auto& z : queries) {
            const auto o = perturb(z, set, cfg, rng);
            if (!o.accepted) continue;
            const double lim = cfg.radius.eta * knn_distance(o.result, set, M);
            if (distance(z, o.result) > lim) return false;
        }
        return true;
    }});

    return checks;
}

}  // namespace detail

/// Runs every check, printing one line each; returns true when all pass.
inline bool run_selftest(std::ostream& os) {
    bool all_ok = true;
    for (const auto& check : detail::build_self_checks()) {
        bool ok = false;
        std::string note;
        try {
            ok = check.body();
        } catch (const std::exception& e) {
            note = std::string(" (") + e.what() + ")";
        }
        os << (ok ? "ok   " : "FAIL ") << check.name << note << "\n";
        all_ok = all_ok && ok;
    }
    return all_ok;
}

}  // namespace vpq
