#include <catch2/catch_amalgamated.hpp>

#include "shapelab/point_set.hpp"
#include "shapelab/stats.hpp"

using namespace shapelab;
using Catch::Approx;

namespace {

sim_config base_config(double box_side = 10.0, std::uint64_t seed = 1) {
    sim_config c;
    c.dimension = 2;
    c.intensity = 1.0;
    c.radius = 1.0;
    c.box_side = box_side;
    c.master_seed = seed;
    return c;
}

}  // namespace

TEST_CASE("zero-volume box yields the empty point set") {
    const auto ps = sample_ppp(base_config(0.0));
    REQUIRE(ps.count() == 0);
}

TEST_CASE("fixed seed gives bit-identical point sets") {
    const auto a = sample_ppp(base_config(10.0, 99));
    const auto b = sample_ppp(base_config(10.0, 99));
    REQUIRE(a == b);
    REQUIRE(a.coords == b.coords);
}

TEST_CASE("coordinates stay inside the box") {
    const auto ps = sample_ppp(base_config(10.0, 5));
    for (std::size_t i = 0; i < ps.count(); ++i)
        for (double c : ps.point(i)) {
            REQUIRE(c >= -5.0);
            REQUIRE(c <= 5.0);
        }
}

TEST_CASE("mean count over replicas matches the intensity") {
    double total = 0.0;
    const int replicas = 1000;
    for (int rep = 0; rep < replicas; ++rep) {
        auto c = base_config(10.0);
        c.master_seed = derive_stream(2024, "count-replica", rep);
        total += static_cast<double>(sample_ppp(c).count());
    }
    const double mean = total / replicas;
    REQUIRE(std::abs(mean - 100.0) < 3.0 * std::sqrt(100.0) / std::sqrt(replicas));
}

TEST_CASE("count distribution passes a goodness-of-fit test") {
    std::vector<std::uint64_t> counts;
    for (int rep = 0; rep < 2000; ++rep) {
        auto c = base_config(10.0);
        c.master_seed = derive_stream(77, "gof-replica", rep);
        counts.push_back(sample_ppp(c).count());
    }
    REQUIRE(poisson_gof_pvalue(counts, 100.0) > 0.01);
}

TEST_CASE("coordinates are marginally uniform per axis") {
    std::vector<double> axis0, axis1;
    for (int rep = 0; rep < 40; ++rep) {
        auto c = base_config(10.0);
        c.master_seed = derive_stream(88, "ks-replica", rep);
        const auto ps = sample_ppp(c);
        for (std::size_t i = 0; i < ps.count(); ++i) {
            axis0.push_back(ps.point(i)[0] / 10.0 + 0.5);
            axis1.push_back(ps.point(i)[1] / 10.0 + 0.5);
        }
    }
    REQUIRE(ks_statistic_uniform(axis0) < 1.63 / std::sqrt(static_cast<double>(axis0.size())));
    REQUIRE(ks_statistic_uniform(axis1) < 1.63 / std::sqrt(static_cast<double>(axis1.size())));
}

TEST_CASE("unit-intensity rescale is the identity") {
    const auto ps = sample_ppp(base_config(10.0, 3));
    REQUIRE(rescale_intensity(ps, 1.0) == ps);
}

TEST_CASE("rescale scales coordinates and box by the intensity root") {
    point_set ps;
    ps.dimension = 2;
    ps.box_side = 10.0;
    ps.intensity = 4.0;
    ps.seed = 1;
    ps.coords = {1.0, 1.0};
    const auto scaled = rescale_intensity(ps, 1.0);
    REQUIRE(scaled.count() == 1);
    REQUIRE(scaled.point(0)[0] == Approx(2.0));
    REQUIRE(scaled.point(0)[1] == Approx(2.0));
    REQUIRE(scaled.box_side == Approx(20.0));
    REQUIRE(scaled.intensity == 1.0);
}

TEST_CASE("rescaled realizations have unit empirical density") {
    double total_density = 0.0;
    const int replicas = 200;
    for (int rep = 0; rep < replicas; ++rep) {
        auto c = base_config(10.0);
        c.intensity = 4.0;
        c.master_seed = derive_stream(31, "density-replica", rep);
        const auto scaled = rescale_intensity(sample_ppp(c), 1.0);
        total_density += scaled.count() / std::pow(scaled.box_side, 2);
    }
    const double mean_density = total_density / replicas;
    // Each replica count is Poisson(400) on a box of area 400.
    const double sigma = std::sqrt(400.0) / 400.0 / std::sqrt(static_cast<double>(replicas));
    REQUIRE(std::abs(mean_density - 1.0) < 3.0 * sigma);
}

TEST_CASE("invalid configurations are rejected") {
    auto c = base_config();
    c.dimension = 1;
    REQUIRE_THROWS_AS(sample_ppp(c), error);
    c = base_config();
    c.intensity = 0.0;
    REQUIRE_THROWS_AS(sample_ppp(c), error);
    c = base_config();
    c.box_side = -1.0;
    REQUIRE_THROWS_AS(sample_ppp(c), error);
}
