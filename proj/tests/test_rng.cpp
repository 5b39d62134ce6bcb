#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "vpq/rng.hpp"

using vpq::Rng;

TEST_CASE("identical seeds give identical streams") {
    Rng a(12345);
    Rng b(12345);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds give different streams") {
    Rng a(1);
    Rng b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += a.next_u64() == b.next_u64();
    REQUIRE(same == 0);
}

TEST_CASE("substream depends only on seed and key") {
    Rng base(777);
    Rng early = base.substream(5);
    for (int i = 0; i < 100; ++i) base.next_u64();
    Rng late = base.substream(5);
    for (int i = 0; i < 100; ++i) REQUIRE(early.next_u64() == late.next_u64());

    Rng other = base.substream(6);
    REQUIRE(Rng(777).substream(5).next_u64() != other.next_u64());
}

TEST_CASE("uniform01 stays in the half-open unit interval") {
    Rng rng(9);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("uniform respects custom bounds and has the right mean") {
    Rng rng(10);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform(-3.0, 5.0);
        REQUIRE(u >= -3.0);
        REQUIRE(u < 5.0);
        sum += u;
    }
    REQUIRE(std::abs(sum / n - 1.0) < 0.05);
}

TEST_CASE("below covers every residue without bias") {
    Rng rng(11);
    std::vector<int> hits(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const std::uint64_t v = rng.below(7);
        REQUIRE(v < 7);
        ++hits[static_cast<std::size_t>(v)];
    }
    for (int h : hits) {
        REQUIRE(h > 9000);
        REQUIRE(h < 11000);
    }
}

TEST_CASE("normal deviates have standard moments") {
    Rng rng(12);
    const int n = 200000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    REQUIRE(std::abs(mean) < 0.01);
    REQUIRE(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("below rejects zero bound") {
    Rng rng(13);
    REQUIRE_THROWS(rng.below(0));
}
