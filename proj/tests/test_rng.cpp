#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <unordered_set>

#include "shapelab/rng.hpp"
#include "shapelab/stats.hpp"

using namespace shapelab;

TEST_CASE("derive_stream is deterministic") {
    REQUIRE(derive_stream(42, "weights", 0) == derive_stream(42, "weights", 0));
    REQUIRE(derive_stream(42, "weights", 3) == derive_stream(42, "weights", 3));
}

TEST_CASE("derive_stream separates labels over a million seeds") {
    counter_rng seeds(derive_stream(7, "seed-scan", 0));
    std::size_t collisions = 0;
    for (int i = 0; i < 1'000'000; ++i) {
        const std::uint64_t s = seeds.next_u64();
        if (derive_stream(s, "weights", 0) == derive_stream(s, "points", 0)) ++collisions;
    }
    REQUIRE(collisions == 0);
}

TEST_CASE("derive_stream separates replicas over a million seeds") {
    counter_rng seeds(derive_stream(8, "seed-scan", 0));
    std::size_t collisions = 0;
    for (int i = 0; i < 1'000'000; ++i) {
        const std::uint64_t s = seeds.next_u64();
        if (derive_stream(s, "weights", 0) == derive_stream(s, "weights", 1)) ++collisions;
    }
    REQUIRE(collisions == 0);
}

TEST_CASE("counter stream replays from the same key") {
    counter_rng a(123), b(123);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("unit draws look uniform") {
    counter_rng rng(derive_stream(9, "uniformity", 0));
    std::vector<double> xs;
    for (int i = 0; i < 20'000; ++i) xs.push_back(rng.next_unit());
    const double d = ks_statistic_uniform(xs);
    REQUIRE(d < 1.63 / std::sqrt(20'000.0));
}

TEST_CASE("poisson sampler matches its law") {
    counter_rng rng(derive_stream(10, "poisson", 0));
    SECTION("zero mean") { REQUIRE(sample_poisson(rng, 0.0) == 0); }
    SECTION("small mean chi-square") {
        std::vector<std::uint64_t> draws;
        for (int i = 0; i < 20'000; ++i) draws.push_back(sample_poisson(rng, 4.5));
        REQUIRE(poisson_gof_pvalue(draws, 4.5) > 0.01);
    }
    SECTION("large mean moments") {
        std::vector<double> draws;
        for (int i = 0; i < 4'000; ++i)
            draws.push_back(static_cast<double>(sample_poisson(rng, 900.0)));
        const auto s = summarize(draws);
        REQUIRE(std::abs(s.mean - 900.0) < 3.0 * std::sqrt(900.0 / 4'000.0));
        REQUIRE(s.variance / 900.0 > 0.9);
        REQUIRE(s.variance / 900.0 < 1.1);
    }
}

TEST_CASE("next_below is unbiased at the boundary") {
    counter_rng rng(derive_stream(11, "below", 0));
    std::vector<std::size_t> counts(7, 0);
    for (int i = 0; i < 70'000; ++i) ++counts[rng.next_below(7)];
    for (auto c : counts) {
        REQUIRE(c > 9'400);
        REQUIRE(c < 10'600);
    }
}
