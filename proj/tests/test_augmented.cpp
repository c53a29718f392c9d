#include <catch2/catch_amalgamated.hpp>

#include "shapelab/augmented.hpp"
#include "shapelab/rng.hpp"

using namespace shapelab;
using Catch::Approx;

namespace {

point_set make_points(std::vector<std::vector<double>> pts, double box_side) {
    point_set ps;
    ps.dimension = static_cast<int>(pts.empty() ? 2 : pts[0].size());
    ps.box_side = box_side;
    ps.intensity = 1.0;
    ps.seed = 0;
    for (const auto& p : pts) ps.coords.insert(ps.coords.end(), p.begin(), p.end());
    return ps;
}

geo_graph sampled_graph(double box_side, double radius, std::uint64_t seed) {
    sim_config c;
    c.dimension = 2;
    c.intensity = 1.0;
    c.radius = radius;
    c.box_side = box_side;
    c.master_seed = seed;
    return geo_graph(sample_ppp(c), radius);
}

augment_config config_with_pitch(double pitch, int d = 2) {
    auto cfg = augment_config::defaults_for_dimension(d);
    cfg.pitch = pitch;
    return cfg;
}

}  // namespace

TEST_CASE("lattice vertex count matches the closed form") {
    const auto g = sampled_graph(20.0, 1.5, 3);
    for (double pitch : {1.0, 2.0, 2.5}) {
        const augmented_graph aug(g, config_with_pitch(pitch));
        const auto half = static_cast<std::int64_t>(std::floor(20.0 / (2.0 * pitch) + 0.5));
        const auto per_axis = 2 * half + 1;
        REQUIRE(aug.lattice_count() == static_cast<std::size_t>(per_axis * per_axis));
    }
}

TEST_CASE("every base vertex owns exactly one cell edge") {
    const auto g = sampled_graph(18.0, 1.5, 7);
    const augmented_graph aug(g, config_with_pitch(2.0));
    for (std::size_t v = 0; v < aug.base_count(); ++v) {
        std::size_t cell_edges = 0;
        for (const auto& e : aug.adjacency(v))
            if (e.base_edge_id == kNoVertex) ++cell_edges;
        REQUIRE(cell_edges == 1);
        // The cell is the half-open cube around its center.
        const auto p = g.position(static_cast<vertex_id>(v));
        const auto axis = aug.cell_of(p);
        for (int k = 0; k < 2; ++k) {
            const double offset = p[k] - axis[k] * 2.0;
            REQUIRE(offset >= -1.0);
            REQUIRE(offset < 1.0);
        }
    }
}

TEST_CASE("extra edges all weigh K times the pitch") {
    const auto g = sampled_graph(12.0, 1.5, 9);
    const auto cfg = config_with_pitch(2.0);
    const augmented_graph aug(g, cfg);
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 11);
    for (std::size_t v = 0; v < aug.vertex_count(); ++v)
        for (const auto& e : aug.adjacency(v))
            if (e.base_edge_id == kNoVertex)
                REQUIRE(aug.edge_weight(e, field) == cfg.K * cfg.pitch);
}

TEST_CASE("a base point on a lattice site is rejected") {
    const auto ps = make_points({{0.0, 0.0}, {0.3, 0.7}}, 8.0);
    const geo_graph g(ps, 1.0);
    REQUIRE_THROWS_AS(augmented_graph(g, config_with_pitch(1.0)), lattice_collision);
}

TEST_CASE("empty surroundings: origin to lattice neighbor costs K times pitch") {
    // One far-away base point keeps the graph nonempty without touching the
    // corridor between the origin and its lattice neighbor.
    const geo_graph g(make_points({{7.4142, 7.1}}, 16.0), 1.0);
    const auto cfg = config_with_pitch(2.0);
    const augmented_graph aug(g, cfg);
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 5);
    const std::vector<double> origin = {0.0, 0.0};
    const std::vector<double> neighbor = {2.0, 0.0};
    REQUIRE(augmented_passage(aug, field, origin, neighbor) == Approx(cfg.K * 2.0));
}

TEST_CASE("detour bound holds on random pairs") {
    const auto g = sampled_graph(24.0, 1.5, 13);
    const auto cfg = config_with_pitch(1.0);
    const augmented_graph aug(g, cfg);
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 17);
    counter_rng rng(derive_stream(13, "pairs", 0));
    const double d = 2.0;
    for (int i = 0; i < 1000; ++i) {
        const std::vector<double> x = {(rng.next_unit() - 0.5) * 20.0, (rng.next_unit() - 0.5) * 20.0};
        const std::vector<double> y = {(rng.next_unit() - 0.5) * 20.0, (rng.next_unit() - 0.5) * 20.0};
        const auto a = aug.nearest_combined(x);
        const auto b = aug.nearest_combined(y);
        const auto pa = aug.position(a);
        const auto pb = aug.position(b);
        const double value = augmented_passage(aug, field, x, y);
        REQUIRE(value <
                cfg.K * std::sqrt(d) * distance(pa, pb) + cfg.K * cfg.pitch * d + 1e-9);
        REQUIRE(value < kInf);
    }
}

TEST_CASE("huge K makes the augmented time match the base time on a crafted pair") {
    // Base vertices sit exactly at the query points, so the combined nearest
    // vertex is the base vertex; with an enormous K no extra edge is used.
    const geo_graph g(make_points({{0.1, 0.1}, {0.8, 0.1}, {1.5, 0.1}}, 8.0), 1.0);
    REQUIRE(g.component_sizes().size() == 1);
    auto cfg = config_with_pitch(1.0);
    cfg.K = 1e6;
    const augmented_graph aug(g, cfg);
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 19);
    const std::vector<double> x = {0.1, 0.1};
    const std::vector<double> y = {1.5, 0.1};
    const auto fp = first_passage(field, 0);
    REQUIRE(augmented_passage(aug, field, x, y) == Approx(fp.time[2]));
}

TEST_CASE("hop-limited time at full budget equals the unconstrained time") {
    const auto g = sampled_graph(16.0, 1.5, 23);
    const augmented_graph aug(g, config_with_pitch(1.0));
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 29);
    const auto source = aug.lattice_origin();
    const auto reference = augmented_times_from(aug, field, source);
    counter_rng rng(derive_stream(23, "targets", 0));
    for (int i = 0; i < 20; ++i) {
        const auto target = rng.next_below(aug.vertex_count());
        const auto limited = hop_limited_time(aug, field, source, target, aug.vertex_count());
        REQUIRE(limited.value == Approx(reference[target]).epsilon(1e-12));
        REQUIRE(limited.stabilized_at > 0);
    }
}

TEST_CASE("hop-limited time is nonincreasing in the budget") {
    const auto g = sampled_graph(16.0, 1.5, 31);
    const augmented_graph aug(g, config_with_pitch(1.0));
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 37);
    const auto source = aug.lattice_origin();
    const std::vector<double> x = {6.0, -5.0};
    const auto target = aug.nearest_combined(x);
    double previous = kInf;
    for (std::size_t budget : {1, 2, 4, 8, 16, 32, 64, 128}) {
        const auto limited = hop_limited_time(aug, field, source, target, budget);
        REQUIRE(limited.value <= previous + 1e-15);
        previous = limited.value;
    }
}

TEST_CASE("truncated passage obeys both stated bounds") {
    const int d = 2;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const auto g = sampled_graph(24.0, 2.0, seed);
        const auto cfg = config_with_pitch(1.0);
        const augmented_graph aug(g, cfg);
        const auto field = assign_weights(g, weight_distribution::exponential(1.0), seed + 40);
        const std::vector<double> x = {8.0, 3.0};
        const auto y = truncated_passage(aug, field, x);
        const auto unconstrained =
            augmented_times_from(aug, field, aug.lattice_origin())[aug.nearest_combined(x)];
        REQUIRE(y.value >= unconstrained - 1e-12);
        REQUIRE(y.value <= 3.0 * d * cfg.K * norm(x) + 1e-9);
    }
}

TEST_CASE("truncated passage validates its preconditions") {
    const auto g = sampled_graph(12.0, 1.5, 41);
    const augmented_graph aug(g, config_with_pitch(2.0));
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 43);
    const std::vector<double> tiny = {0.5, 0.0};
    REQUIRE_THROWS_AS(truncated_passage(aug, field, tiny), error);
    const std::vector<double> below_pitch = {1.5, 0.0};
    REQUIRE_THROWS_AS(truncated_passage(aug, field, below_pitch), error);
}

TEST_CASE("cheap long self-avoiding walks are rare") {
    // Sampled walks of length 50 with exponential weights: the fraction with
    // average edge cost below 0.05 stays under 1e-3.
    const auto g = sampled_graph(30.0, 2.0, 47);
    const augmented_graph aug(g, config_with_pitch(1.0));
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 53);
    counter_rng rng(derive_stream(47, "walks", 0));
    const int walks = 10'000;
    const int length = 50;
    int cheap = 0;
    int completed = 0;
    for (int w = 0; w < walks; ++w) {
        std::size_t u = rng.next_below(aug.vertex_count());
        std::vector<bool> used(aug.vertex_count(), false);
        used[u] = true;
        double cost = 0.0;
        int steps = 0;
        while (steps < length) {
            const auto adjacency = aug.adjacency(u);
            std::vector<std::size_t> fresh;
            for (std::size_t i = 0; i < adjacency.size(); ++i)
                if (!used[adjacency[i].to]) fresh.push_back(i);
            if (fresh.empty()) break;
            const auto& e = adjacency[fresh[rng.next_below(fresh.size())]];
            cost += aug.edge_weight(e, field);
            used[e.to] = true;
            u = e.to;
            ++steps;
        }
        if (steps < length) continue;
        ++completed;
        if (cost <= 0.05 * length) ++cheap;
    }
    REQUIRE(completed > walks / 2);
    REQUIRE(static_cast<double>(cheap) / completed < 1e-3);
}

TEST_CASE("coupling frequencies sit in [0,1] with honest intervals") {
    sim_config c;
    c.dimension = 2;
    c.intensity = 1.0;
    c.radius = 2.0;
    c.box_side = 20.0;
    c.master_seed = 61;
    const std::vector<double> x = {5.0, 0.0};
    const auto table = coupling_frequencies(c, weight_distribution::exponential(1.0), x,
                                            {1.0, 2.0}, 200, 1);
    for (std::size_t i = 0; i < table.pitches.size(); ++i) {
        REQUIRE(table.freq_truncated_mismatch[i] >= 0.0);
        REQUIRE(table.freq_truncated_mismatch[i] <= 1.0);
        REQUIRE(table.freq_augmented_mismatch[i] >= 0.0);
        REQUIRE(table.freq_augmented_mismatch[i] <= 1.0);
        REQUIRE(table.truncated_ci[i].low >= 0.0);
        REQUIRE(table.truncated_ci[i].high <= 1.0);
        REQUIRE(table.truncated_ci[i].low <= table.truncated_ci[i].high);
    }
    // The hop budget is astronomically generous at this scale.
    REQUIRE(table.freq_truncated_mismatch[0] == 0.0);
}

TEST_CASE("coupling refuses weight laws with zero atoms") {
    sim_config c;
    c.dimension = 2;
    c.intensity = 1.0;
    c.radius = 2.0;
    c.box_side = 20.0;
    c.master_seed = 67;
    const std::vector<double> x = {5.0, 0.0};
    REQUIRE_THROWS_AS(coupling_frequencies(c, weight_distribution::bernoulli_zero_one(0.1), x,
                                           {1.0}, 200, 1),
                      condition_violated);
}
