#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "vpq/fsp.hpp"
#include "vpq/metrics.hpp"
#include "vpq/rng.hpp"

using vpq::LatentVector;
using vpq::NormLossParams;
using vpq::Rng;
using vpq::UsageCounts;

TEST_CASE("utilization is 1 for balanced counts and 1/K for a single code") {
    REQUIRE(vpq::cvu(UsageCounts::from_counts({5, 5, 5, 5})) ==
            Catch::Approx(1.0).epsilon(1e-12));
    REQUIRE(vpq::cvu(UsageCounts::from_counts({7, 0, 0, 0})) ==
            Catch::Approx(0.25).epsilon(1e-12));
    REQUIRE(vpq::cvu(UsageCounts::from_counts({42})) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("utilization on the 3-1 split matches the entropy oracle") {
    const auto usage = UsageCounts::from_counts({3, 1});
    const double h = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
    REQUIRE(vpq::entropy_nats(usage) == Catch::Approx(h).epsilon(1e-12));
    REQUIRE(vpq::cvu(usage) == Catch::Approx(std::exp(h) / 2.0).epsilon(1e-12));
    REQUIRE(vpq::cvu(usage) == Catch::Approx(0.8774).margin(1e-4));
}

TEST_CASE("utilization ignores zero-count codes in the entropy sum") {
    // Same distribution over the used codes, more unused slots: entropy
    // unchanged, denominator grows.
    const double h = vpq::entropy_nats(UsageCounts::from_counts({3, 1}));
    REQUIRE(vpq::entropy_nats(UsageCounts::from_counts({3, 1, 0, 0})) ==
            Catch::Approx(h).epsilon(1e-12));
    REQUIRE(vpq::cvu(UsageCounts::from_counts({3, 1, 0, 0})) ==
            Catch::Approx(std::exp(h) / 4.0).epsilon(1e-12));
}

TEST_CASE("utilization is invariant under permutation and scaling of counts") {
    const double base = vpq::cvu(UsageCounts::from_counts({8, 2, 4, 1}));
    REQUIRE(vpq::cvu(UsageCounts::from_counts({1, 4, 2, 8})) ==
            Catch::Approx(base).epsilon(1e-12));
    REQUIRE(vpq::cvu(UsageCounts::from_counts({80, 20, 40, 10})) ==
            Catch::Approx(base).epsilon(1e-12));
}

TEST_CASE("utilization stays within its analytic bounds") {
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t K = 1 + rng.below(20);
        std::vector<std::uint64_t> counts(K, 0);
        const int draws = 1 + static_cast<int>(rng.below(50));
        for (int i = 0; i < draws; ++i) ++counts[rng.below(K)];
        const auto usage = UsageCounts::from_counts(std::move(counts));
        const double v = vpq::cvu(usage);
        REQUIRE(v >= 1.0 / static_cast<double>(K) - 1e-12);
        REQUIRE(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("utilization rejects empty and all-zero counts") {
    REQUIRE_THROWS(vpq::cvu(UsageCounts::from_counts({})));
    REQUIRE_THROWS(vpq::cvu(UsageCounts::from_counts({0, 0})));
}

TEST_CASE("normalization penalty vanishes exactly at the target statistics") {
    NormLossParams params;
    REQUIRE(vpq::norm_loss(std::vector<LatentVector>{{-1.0}, {1.0}}, params) == 0.0);

    // mean 1, population variance 1: only the mean term fires.
    REQUIRE(vpq::norm_loss(std::vector<LatentVector>{{0.0}, {2.0}}, params) ==
            Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalization penalty separates its two terms") {
    NormLossParams params;
    const std::vector<LatentVector> batch{{0.0}, {1.0}};  // mean 0.5, var 0.25

    params.lambda1 = 1.0;
    params.lambda2 = 0.0;
    REQUIRE(vpq::norm_loss(batch, params) == Catch::Approx(0.25).epsilon(1e-12));

    params.lambda1 = 0.0;
    params.lambda2 = 1.0;
    REQUIRE(vpq::norm_loss(batch, params) == Catch::Approx(0.5625).epsilon(1e-12));

    params.lambda1 = 2.0;
    params.lambda2 = 3.0;
    REQUIRE(vpq::norm_loss(batch, params) ==
            Catch::Approx(2.0 * 0.25 + 3.0 * 0.5625).epsilon(1e-12));
}

TEST_CASE("normalization penalty honors the variance target") {
    NormLossParams params;
    params.target_variance = vpq::activation_variance(vpq::ActivationKind::sigmoid);
    // Variance-matched pre-activations: mean 0, population variance 3.29.
    const double a = std::sqrt(3.29);
    REQUIRE(vpq::norm_loss(std::vector<LatentVector>{{-a}, {a}}, params) ==
            Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("unbiased variance uses the n-minus-one denominator") {
    NormLossParams params;
    params.lambda1 = 0.0;
    params.unbiased = true;
    // {0, 2}: population variance 1, sample variance 2.
    REQUIRE(vpq::norm_loss(std::vector<LatentVector>{{0.0}, {2.0}}, params) ==
            Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalization penalty is nonnegative and sums per dimension") {
    Rng rng(102);
    NormLossParams params;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<LatentVector> batch(8);
        for (auto& v : batch) v = {rng.normal(), 2.0 * rng.normal(), rng.uniform(-1, 3)};
        const double full = vpq::norm_loss(batch, params);
        REQUIRE(full >= 0.0);

        double per_dim = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            std::vector<LatentVector> col(batch.size());
            for (std::size_t i = 0; i < batch.size(); ++i) col[i] = {batch[i][j]};
            per_dim += vpq::norm_loss(col, params);
        }
        REQUIRE(full == Catch::Approx(per_dim).epsilon(1e-12));
    }
}

TEST_CASE("normalization penalty needs at least two vectors") {
    REQUIRE_THROWS(vpq::norm_loss(std::vector<LatentVector>{{1.0}}, NormLossParams{}));
}

TEST_CASE("mean squared error averages over vectors and dimensions") {
    const std::vector<LatentVector> a{{0.0}, {1.0}};
    REQUIRE(vpq::mse(a, a) == 0.0);
    REQUIRE(vpq::mse(std::vector<LatentVector>{{0.0}}, std::vector<LatentVector>{{1.0}}) ==
            1.0);
    // Two 2-D pairs with squared diffs {1, 4, 0, 1} average to 1.5.
    REQUIRE(vpq::mse(std::vector<LatentVector>{{0, 0}, {1, 1}},
                     std::vector<LatentVector>{{1, 2}, {1, 0}}) ==
            Catch::Approx(1.5).epsilon(1e-12));
    REQUIRE_THROWS(vpq::mse(a, std::vector<LatentVector>{{0.0}}));
    REQUIRE_THROWS(vpq::mse(std::vector<LatentVector>{}, std::vector<LatentVector>{}));
}

TEST_CASE("cell quantization of a uniform source hits the twelfth-rule error") {
    // Midpoint reproduction on L equal cells of width 1/L: MSE = 1/(12 L^2).
    Rng rng(103);
    vpq::FspConfig cfg;
    cfg.levels = {4};
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.uniform01();
        const double v = vpq::fsp_quantize(LatentVector{z}, cfg).value[0];
        sum += (z - v) * (z - v);
    }
    REQUIRE(sum / n == Catch::Approx(1.0 / 192.0).epsilon(0.01));
}

TEST_CASE("histogram follows the half-open bin convention") {
    const std::vector<double> edges{0.0, 0.5, 1.0};
    const auto h = vpq::histogram(std::vector<double>{0.1, 0.9}, edges);
    REQUIRE(h.counts == std::vector<std::uint64_t>{1, 1});
    REQUIRE(h.frequencies == std::vector<double>{0.5, 0.5});

    REQUIRE(vpq::histogram(std::vector<double>{0.5}, edges).counts ==
            std::vector<std::uint64_t>{0, 1});
    REQUIRE(vpq::histogram(std::vector<double>{1.0}, edges).counts ==
            std::vector<std::uint64_t>{0, 1});
    REQUIRE(vpq::histogram(std::vector<double>{0.0}, edges).counts ==
            std::vector<std::uint64_t>{1, 0});
}

TEST_CASE("histogram tallies out-of-range values separately") {
    const std::vector<double> edges{0.0, 1.0};
    const auto h = vpq::histogram(std::vector<double>{-0.5, 0.5, 0.7, 2.0, 3.0}, edges);
    REQUIRE(h.below_range == 1);
    REQUIRE(h.above_range == 2);
    REQUIRE(h.counts == std::vector<std::uint64_t>{2});
    REQUIRE(h.frequencies == std::vector<double>{1.0});
}

TEST_CASE("histogram counts sum to the in-range total") {
    Rng rng(104);
    std::vector<double> values(5000);
    for (auto& v : values) v = rng.uniform(-1.0, 2.0);
    const std::vector<double> edges{0.0, 0.25, 0.5, 0.75, 1.0};
    const auto h = vpq::histogram(values, edges);
    std::uint64_t in_range = 0;
    for (auto c : h.counts) in_range += c;
    REQUIRE(in_range + h.below_range + h.above_range == values.size());
    double freq_total = 0.0;
    for (double f : h.frequencies) freq_total += f;
    REQUIRE(freq_total == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("histogram rejects bad edges") {
    REQUIRE_THROWS(vpq::histogram(std::vector<double>{0.5}, std::vector<double>{0.0}));
    REQUIRE_THROWS(vpq::histogram(std::vector<double>{0.5}, std::vector<double>{1.0, 0.0}));
    REQUIRE_THROWS(vpq::histogram(std::vector<double>{0.5}, std::vector<double>{0.0, 0.0}));
}

TEST_CASE("median averages the two middle order statistics") {
    REQUIRE(vpq::median({3.0}) == 3.0);
    REQUIRE(vpq::median({3.0, 1.0, 2.0}) == 2.0);
    REQUIRE(vpq::median({4.0, 1.0, 3.0, 2.0}) == 2.5);
    REQUIRE(vpq::median({1.0, 1.0, 5.0, 1.0}) == 1.0);
    REQUIRE_THROWS(vpq::median({}));
}
