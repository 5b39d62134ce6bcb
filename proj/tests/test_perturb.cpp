#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "vpq/density.hpp"
#include "vpq/perturb.hpp"
#include "vpq/rng.hpp"

using vpq::LatentVector;
using vpq::PerturbConfig;
using vpq::Rng;
using vpq::SampleSet;

namespace {

PerturbConfig make_config(std::size_t dim, std::size_t K, std::size_t k, double eta) {
    PerturbConfig cfg;
    cfg.dim = dim;
    cfg.radius.codebook_size = K;
    cfg.radius.knn_k = k;
    cfg.radius.eta = eta;
    return cfg;
}

// Collinear set with both order statistics pinned at z = origin and at
// z' = (10, 0, 0): distances from the origin are {0.2, 0.5, 10.25, 10.5}
// and from z' they are {0.25, 0.5, 10.2, 10.5}.
SampleSet pinned_ratio_set() {
    return vpqtest::make_set({{-0.2, 0, 0}, {-0.5, 0, 0}, {10.25, 0, 0}, {10.5, 0, 0}}, 3);
}

}  // namespace

TEST_CASE("ball samples never leave the ball") {
    Rng rng(41);
    for (std::size_t d : {1u, 2u, 3u, 7u}) {
        LatentVector center(d, 0.5);
        for (int i = 0; i < 2000; ++i) {
            const double radius = rng.uniform(0.0, 3.0);
            const auto x = vpq::sample_ball(center, radius, rng);
            REQUIRE(x.size() == d);
            REQUIRE(vpq::distance(center, x) <= radius);
        }
    }
}

TEST_CASE("ball samples with zero radius return the center") {
    Rng rng(42);
    const LatentVector center{1.0, -2.0};
    const auto x = vpq::sample_ball(center, 0.0, rng);
    REQUIRE(x == center);
}

TEST_CASE("ball radii follow the t^d law") {
    // In d dimensions the normalized radius has CDF t^d on [0,1].
    Rng rng(43);
    const std::size_t d = 2;
    const LatentVector center(d, 0.0);
    std::vector<double> radii;
    for (int i = 0; i < 5000; ++i)
        radii.push_back(vpq::distance(center, vpq::sample_ball(center, 1.0, rng)));
    const double ks = vpqtest::ks_one_sample(radii, [](double t) { return t * t; });
    REQUIRE(ks < 0.025);
}

TEST_CASE("ball samples have no directional bias") {
    Rng rng(44);
    const std::size_t d = 3;
    const LatentVector center(d, 0.0);
    LatentVector mean(d, 0.0);
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const auto x = vpq::sample_ball(center, 1.0, rng);
        for (std::size_t j = 0; j < d; ++j) mean[j] += x[j];
    }
    for (std::size_t j = 0; j < d; ++j) REQUIRE(std::abs(mean[j] / n) < 0.01);
}

TEST_CASE("log acceptance ratio matches the hand-computed value") {
    const auto set = pinned_ratio_set();
    const auto cfg = make_config(3, 2, 1, 1.0);
    const LatentVector z{0, 0, 0};
    const LatentVector prop{10, 0, 0};
    const auto [log_ratio, support_ok] = vpq::acceptance_log_ratio(z, prop, set, cfg);
    REQUIRE(log_ratio == Catch::Approx(3.0 * std::log(0.8)).epsilon(1e-12));
    REQUIRE(log_ratio == Catch::Approx(-0.66943).margin(5e-6));
    // The move spans 10 units but the reverse radius is only 0.5.
    REQUIRE_FALSE(support_ok);
}

TEST_CASE("support holds up to the reverse radius and fails just past it") {
    // Distances from (0,0): {1, 1, 9, 11}, so with K=2 the reverse
    // radius at the origin is the 2nd order statistic, 1.
    const auto set =
        vpqtest::make_set({{1, 0}, {-1, 0}, {9, 0}, {11, 0}}, 2);
    const auto cfg = make_config(2, 2, 1, 1.0);
    const LatentVector target{0, 0};

    auto support_of = [&](double x) {
        return vpq::acceptance_log_ratio(LatentVector{x, 0}, target, set, cfg).second;
    };
    REQUIRE(support_of(0.999));
    REQUIRE(support_of(1.0));
    REQUIRE_FALSE(support_of(1.01));
}

TEST_CASE("identical proposal is accepted with ratio one") {
    const auto set = pinned_ratio_set();
    const auto cfg = make_config(3, 2, 1, 1.0);
    Rng rng(45);
    const LatentVector z{0.1, 0.0, 0.0};
    const auto out = vpq::perturb_with_proposal(z, LatentVector{0.1, 0.0, 0.0}, set, cfg, rng);
    REQUIRE(out.accepted);
    REQUIRE(out.log_alpha == 0.0);
    REQUIRE(out.result == z);
    REQUIRE_FALSE(out.rejected_by_support);
}

TEST_CASE("support violation keeps the current point") {
    const auto set = pinned_ratio_set();
    const auto cfg = make_config(3, 2, 1, 1.0);
    Rng rng(46);
    const LatentVector z{0, 0, 0};
    const auto out = vpq::perturb_with_proposal(z, LatentVector{10, 0, 0}, set, cfg, rng);
    REQUIRE(out.rejected_by_support);
    REQUIRE_FALSE(out.accepted);
    REQUIRE(out.result == z);
}

TEST_CASE("empirical acceptance matches a pinned ratio of 0.75") {
    // One dimension, samples {-1, 1, -3, 3}. From z = 0.5 the order
    // statistics are (0.5, 1.5); from the proposal 0 they are (1, 1).
    // log alpha = log 0.5 + log 1.5 - log 1 - log 1 = log 0.75, and the
    // move of 0.5 sits inside the reverse radius 1.
    const auto set = vpqtest::make_set({{-1}, {1}, {-3}, {3}}, 1);
    const auto cfg = make_config(1, 2, 1, 1.0);
    const LatentVector z{0.5};
    const LatentVector prop{0.0};

    const auto [log_ratio, support_ok] = vpq::acceptance_log_ratio(z, prop, set, cfg);
    REQUIRE(support_ok);
    REQUIRE(log_ratio == Catch::Approx(std::log(0.75)).epsilon(1e-12));

    Rng master(47);
    int accepted = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        Rng sub = master.substream(static_cast<std::uint64_t>(i));
        if (vpq::perturb_with_proposal(z, prop, set, cfg, sub).accepted) ++accepted;
    }
    // 4 standard errors around 0.75 at n = 20000.
    const double freq = static_cast<double>(accepted) / n;
    REQUIRE(std::abs(freq - 0.75) < 0.013);
}

TEST_CASE("favorable ratios are always accepted when support holds") {
    // Reverse direction of the 0.75 case: alpha = 4/3 > 1.
    const auto set = vpqtest::make_set({{-1}, {1}, {-3}, {3}}, 1);
    const auto cfg = make_config(1, 2, 1, 1.0);
    Rng master(48);
    for (int i = 0; i < 200; ++i) {
        Rng sub = master.substream(static_cast<std::uint64_t>(i));
        const auto out =
            vpq::perturb_with_proposal(LatentVector{0.0}, LatentVector{0.5}, set, cfg, sub);
        REQUIRE(out.accepted);
        REQUIRE(out.log_alpha > 0.0);
    }
}

TEST_CASE("perturb reports the proposal radius it used") {
    Rng rng(49);
    std::vector<LatentVector> rows(200);
    for (auto& r : rows) r = {rng.normal(), rng.normal()};
    const auto set = SampleSet::from_vectors(rows, 2);
    const auto cfg = make_config(2, 16, 3, 0.8);

    for (int i = 0; i < 50; ++i) {
        const LatentVector z{rng.normal(), rng.normal()};
        Rng step(1000 + static_cast<std::uint64_t>(i));
        const auto out = vpq::perturb(z, set, cfg, step);
        REQUIRE(out.radius == vpq::local_radius(z, set, cfg.radius));
        REQUIRE(vpq::distance(z, out.proposal) <= out.radius);
        if (out.accepted) {
            REQUIRE(out.result == out.proposal);
        } else {
            REQUIRE(out.result == z);
        }
    }
}

TEST_CASE("accepted moves always satisfy the support constraint") {
    Rng rng(50);
    std::vector<LatentVector> rows(300);
    for (auto& r : rows) r = {rng.normal(), rng.normal(), rng.normal()};
    const auto set = SampleSet::from_vectors(rows, 3);
    const auto cfg = make_config(3, 32, 3, 1.0);

    int accepted = 0;
    for (int i = 0; i < 3000; ++i) {
        const LatentVector z{rng.normal(), rng.normal(), rng.normal()};
        const auto out = vpq::perturb(z, set, cfg, rng);
        if (!out.accepted) continue;
        ++accepted;
        const double reverse_radius = vpq::local_radius(out.result, set, cfg.radius);
        REQUIRE(vpq::distance(z, out.result) <= reverse_radius);
    }
    REQUIRE(accepted > 0);
}

TEST_CASE("perturb is reproducible from the seed") {
    Rng setup(51);
    std::vector<LatentVector> rows(100);
    for (auto& r : rows) r = {setup.normal(), setup.normal()};
    const auto set = SampleSet::from_vectors(rows, 2);
    const auto cfg = make_config(2, 8, 2, 1.0);
    const LatentVector z{0.2, -0.1};

    Rng a(52), b(52), c(53);
    bool diverged = false;
    for (int i = 0; i < 100; ++i) {
        const auto oa = vpq::perturb(z, set, cfg, a);
        const auto ob = vpq::perturb(z, set, cfg, b);
        const auto oc = vpq::perturb(z, set, cfg, c);
        REQUIRE(oa.result == ob.result);
        REQUIRE(oa.proposal == ob.proposal);
        REQUIRE(oa.accepted == ob.accepted);
        if (oa.proposal != oc.proposal) diverged = true;
    }
    REQUIRE(diverged);
}

TEST_CASE("batch outcomes are keyed by element index") {
    Rng setup(54);
    std::vector<LatentVector> rows(150);
    for (auto& r : rows) r = {setup.normal(), setup.normal()};
    const auto set = SampleSet::from_vectors(rows, 2);
    const auto cfg = make_config(2, 16, 3, 1.0);

    std::vector<LatentVector> batch(20);
    for (auto& z : batch) z = {setup.normal(), setup.normal()};

    const Rng base(55);
    const auto outs = vpq::perturb_batch(batch, set, cfg, base);
    REQUIRE(outs.size() == batch.size());

    // Every element is independently recomputable from its index, in any
    // evaluation order.
    std::vector<std::size_t> order(batch.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = order.size() - 1 - i;
    for (const std::size_t i : order) {
        Rng sub = base.substream(static_cast<std::uint64_t>(i));
        const auto solo = vpq::perturb(batch[i], set, cfg, sub);
        REQUIRE(solo.result == outs[i].result);
        REQUIRE(solo.proposal == outs[i].proposal);
        REQUIRE(solo.accepted == outs[i].accepted);
        REQUIRE(solo.rejected_by_support == outs[i].rejected_by_support);
    }
}

TEST_CASE("a batch of one matches a single perturb on substream zero") {
    Rng setup(56);
    std::vector<LatentVector> rows(80);
    for (auto& r : rows) r = {setup.normal(), setup.normal()};
    const auto set = SampleSet::from_vectors(rows, 2);
    const auto cfg = make_config(2, 8, 2, 1.0);

    const std::vector<LatentVector> batch{{0.4, 0.4}};
    const Rng base(57);
    const auto outs = vpq::perturb_batch(batch, set, cfg, base);
    Rng sub = base.substream(0);
    const auto solo = vpq::perturb(batch[0], set, cfg, sub);
    REQUIRE(outs.size() == 1);
    REQUIRE(outs[0].result == solo.result);
    REQUIRE(outs[0].proposal == solo.proposal);
}

TEST_CASE("perturb validates its inputs") {
    const auto set = vpqtest::make_set({{0, 0}, {1, 1}}, 2);
    Rng rng(58);
    auto cfg = make_config(2, 4, 3, 1.0);  // knn_k exceeds the set size
    REQUIRE_THROWS(vpq::perturb(LatentVector{0, 0}, set, cfg, rng));
    cfg = make_config(3, 4, 1, 1.0);  // dimension mismatch
    REQUIRE_THROWS(vpq::perturb(LatentVector{0, 0, 0}, set, cfg, rng));
    cfg = make_config(2, 4, 1, 1.0);
    REQUIRE_THROWS(vpq::perturb(LatentVector{0}, set, cfg, rng));
}
