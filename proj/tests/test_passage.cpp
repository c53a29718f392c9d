#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "shapelab/passage.hpp"
#include "shapelab/rng.hpp"
#include "shapelab/shape.hpp"

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

point_set uniform_points(std::size_t n, double box_side, std::uint64_t seed) {
    point_set ps;
    ps.dimension = 2;
    ps.box_side = box_side;
    ps.intensity = n / (box_side * box_side);
    ps.seed = seed;
    counter_rng rng(derive_stream(seed, "uniform-points", 0));
    for (std::size_t i = 0; i < n * 2; ++i) ps.coords.push_back((rng.next_unit() - 0.5) * box_side);
    return ps;
}

/// Exhaustive minimum over all simple paths, the shortest-path oracle.
double exhaustive_min_path(const geo_graph& g, const passage_field& field, vertex_id source,
                           vertex_id target) {
    std::vector<bool> used(g.vertex_count(), false);
    double best = kInf;
    auto dfs = [&](auto&& self, vertex_id u, double cost) -> void {
        if (u == target) {
            best = std::min(best, cost);
            return;
        }
        used[u] = true;
        const auto nbrs = g.neighbors(u);
        const auto eids = g.incident_edge_ids(u);
        for (std::size_t i = 0; i < nbrs.size(); ++i)
            if (!used[nbrs[i]]) self(self, nbrs[i], cost + field.weights[eids[i]]);
        used[u] = false;
    };
    dfs(dfs, source, 0.0);
    return best;
}

}  // namespace

TEST_CASE("deterministic weights are constant") {
    const geo_graph g(uniform_points(100, 8.0, 4), 1.2);
    const auto field = assign_weights(g, weight_distribution::deterministic(3.0), 7);
    for (double w : field.weights) REQUIRE(w == 3.0);
}

TEST_CASE("bernoulli zero fraction concentrates around p_zero") {
    const geo_graph g(uniform_points(4000, 18.0, 8), 1.1);
    REQUIRE(g.edge_count() > 100'000);
    const auto field = assign_weights(g, weight_distribution::bernoulli_zero_one(0.2), 3);
    std::size_t zeros = 0;
    for (double w : field.weights) {
        REQUIRE((w == 0.0 || w == 1.0));
        if (w == 0.0) ++zeros;
    }
    const double n = static_cast<double>(field.weights.size());
    const double fraction = zeros / n;
    REQUIRE(std::abs(fraction - 0.2) < 3.0 * std::sqrt(0.2 * 0.8 / n));
}

TEST_CASE("weights regenerate bit-identically") {
    const geo_graph g(uniform_points(200, 10.0, 5), 1.0);
    const auto a = assign_weights(g, weight_distribution::exponential(2.0), 11);
    const auto b = assign_weights(g, weight_distribution::exponential(2.0), 11);
    REQUIRE(a.weights == b.weights);
}

TEST_CASE("condition flags follow the stated zero-mass threshold") {
    // d=2, lambda=1, r=1: the threshold is 1/pi, and 0.2 < 1/pi.
    const geo_graph g(uniform_points(50, 7.0, 2), 1.0);
    point_set ps = g.points();
    ps.intensity = 1.0;
    const geo_graph unit(std::move(ps), 1.0);
    const auto field = assign_weights(unit, weight_distribution::bernoulli_zero_one(0.2), 1);
    REQUIRE(field.conditions.zero_mass_subcritical);
    REQUIRE_FALSE(field.conditions.zero_mass_absent);
    const auto heavy = assign_weights(unit, weight_distribution::bernoulli_zero_one(0.4), 1);
    REQUIRE_FALSE(heavy.conditions.zero_mass_subcritical);
    const auto expo = assign_weights(unit, weight_distribution::exponential(1.0), 1);
    REQUIRE(expo.conditions.zero_mass_absent);
    REQUIRE(expo.conditions.exponential_moment);
}

TEST_CASE("source time is zero and one edge costs its weight") {
    const geo_graph g(make_points({{0, 0}, {0.5, 0}}, 4), 1.0);
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 9);
    const auto fp = first_passage(field, 0);
    REQUIRE(fp.time[0] == 0.0);
    REQUIRE(fp.time[1] == field.weights[0]);
    REQUIRE(fp.predecessor[1] == 0);
}

TEST_CASE("first passage equals exhaustive path enumeration on 500 fuzz graphs") {
    counter_rng rng(derive_stream(1234, "fuzz", 0));
    for (int instance = 0; instance < 500; ++instance) {
        const std::size_t n = 2 + rng.next_below(8);  // up to 9 vertices
        point_set ps;
        ps.dimension = 2;
        ps.box_side = 4.0;
        ps.intensity = 1.0;
        ps.seed = instance;
        for (std::size_t i = 0; i < n * 2; ++i) ps.coords.push_back((rng.next_unit() - 0.5) * 4.0);
        // A wide radius keeps most pairs connected and the paths plentiful.
        const geo_graph g(std::move(ps), 2.5);
        const auto law = instance % 2 == 0 ? weight_distribution::exponential(1.0)
                                           : weight_distribution::uniform(0.1, 2.0);
        const auto field = assign_weights(g, law, derive_stream(9, "fuzz-weights", instance));
        const auto fp = first_passage(field, 0);
        for (vertex_id v = 0; v < g.vertex_count(); ++v) {
            const double oracle = exhaustive_min_path(g, field, 0, v);
            if (oracle == kInf) {
                REQUIRE_FALSE(fp.reached(v));
            } else {
                REQUIRE(fp.time[v] == Approx(oracle).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("passage times form a pseudometric on the giant component") {
    const geo_graph g(uniform_points(500, 16.0, 31), 1.6);
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 17);
    std::vector<vertex_id> giant;
    for (vertex_id v = 0; v < g.vertex_count(); ++v)
        if (g.in_giant(v)) giant.push_back(v);
    REQUIRE(giant.size() >= 50);

    counter_rng rng(derive_stream(31, "triples", 0));
    // Cache a few single-source results and check the axioms on random triples.
    std::vector<first_passage_result> from;
    std::vector<vertex_id> sources;
    for (int i = 0; i < 12; ++i) {
        sources.push_back(giant[rng.next_below(giant.size())]);
        from.push_back(first_passage(field, sources.back(), true));
    }
    for (int i = 0; i < 1000; ++i) {
        const auto a = rng.next_below(sources.size());
        const auto b = rng.next_below(sources.size());
        const auto c = giant[rng.next_below(giant.size())];
        REQUIRE(from[a].time[c] >= 0.0);
        REQUIRE(from[a].time[sources[a]] == 0.0);
        REQUIRE(from[a].time[sources[b]] == Approx(from[b].time[sources[a]]).epsilon(1e-10));
        REQUIRE(from[a].time[c] <= from[a].time[sources[b]] + from[b].time[c] + 1e-9);
    }
}

TEST_CASE("no zero passage time between distinct vertices without zero weights") {
    const geo_graph g(uniform_points(300, 12.0, 3), 1.4);
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 23);
    REQUIRE(field.conditions.zero_mass_absent);
    const auto fp = first_passage(field, 0);
    for (vertex_id v = 1; v < g.vertex_count(); ++v)
        if (fp.reached(v)) REQUIRE(fp.time[v] > 0.0);
}

TEST_CASE("reached sets are monotone in t") {
    const geo_graph g(uniform_points(400, 14.0, 6), 1.5);
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 29);
    std::vector<double> origin = {0.0, 0.0};
    const auto root = g.nearest_vertex(origin, true);
    const auto fp = first_passage(field, root, true);
    const auto early = reached_set(fp, g, 1.0);
    const auto late = reached_set(fp, g, 2.5);
    REQUIRE(std::includes(late.begin(), late.end(), early.begin(), early.end()));
}

TEST_CASE("geodesics backtrack consistently") {
    const geo_graph g(uniform_points(400, 14.0, 12), 1.5);
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 41);
    std::vector<double> origin = {0.0, 0.0};
    const auto root = g.nearest_vertex(origin, true);
    const auto fp = first_passage(field, root, true);

    SECTION("single-vertex path at the source") {
        const auto path = extract_geodesic(fp, root);
        REQUIRE(path == std::vector<vertex_id>{root});
    }

    SECTION("path cost equals the passage time, prefixes are geodesics") {
        std::size_t checked = 0;
        for (vertex_id v = 0; v < g.vertex_count(); ++v) {
            if (!fp.reached(v) || v == root) continue;
            const auto path = extract_geodesic(fp, v);
            REQUIRE(path.front() == root);
            REQUIRE(path.back() == v);
            double cost = 0.0;
            for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                const auto nbrs = g.neighbors(path[i]);
                const auto eids = g.incident_edge_ids(path[i]);
                const auto it = std::find(nbrs.begin(), nbrs.end(), path[i + 1]);
                REQUIRE(it != nbrs.end());
                cost += field.weights[eids[it - nbrs.begin()]];
                // Every prefix is the stored geodesic of its endpoint.
                REQUIRE(fp.time[path[i + 1]] == Approx(cost).epsilon(1e-12));
                REQUIRE(fp.predecessor[path[i + 1]] == path[i]);
            }
            ++checked;
        }
        REQUIRE(checked > 100);
    }

    SECTION("unreached target throws") {
        const geo_graph two(make_points({{0, 0}, {0.5, 0}, {3, 0}}, 8), 1.0);
        const auto f2 = assign_weights(two, weight_distribution::deterministic(1.0), 1);
        const auto r2 = first_passage(f2, 0);
        REQUIRE_FALSE(r2.reached(2));
        REQUIRE_THROWS_AS(extract_geodesic(r2, 2), unreached_vertex);
    }
}

TEST_CASE("geodesic tree edges equal the union of extracted paths") {
    const geo_graph g(uniform_points(300, 12.0, 18), 1.5);
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 55);
    std::vector<double> origin = {0.0, 0.0};
    const auto root = g.nearest_vertex(origin, true);
    const auto fp = first_passage(field, root, true);
    std::set<std::pair<vertex_id, vertex_id>> tree_edges;
    for (vertex_id v = 0; v < g.vertex_count(); ++v)
        if (fp.reached(v) && v != root)
            tree_edges.insert({std::min(v, fp.predecessor[v]), std::max(v, fp.predecessor[v])});
    std::set<std::pair<vertex_id, vertex_id>> path_edges;
    for (vertex_id v = 0; v < g.vertex_count(); ++v) {
        if (!fp.reached(v)) continue;
        const auto path = extract_geodesic(fp, v);
        for (std::size_t i = 0; i + 1 < path.size(); ++i)
            path_edges.insert({std::min(path[i], path[i + 1]), std::max(path[i], path[i + 1])});
    }
    REQUIRE(tree_edges == path_edges);
}

TEST_CASE("passage time between coordinates is symmetric and subadditive") {
    const geo_graph g(uniform_points(500, 16.0, 25), 1.6);
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 61);
    counter_rng rng(derive_stream(25, "coords", 0));
    for (int i = 0; i < 25; ++i) {
        const std::vector<double> x = {(rng.next_unit() - 0.5) * 12.0, (rng.next_unit() - 0.5) * 12.0};
        const std::vector<double> y = {(rng.next_unit() - 0.5) * 12.0, (rng.next_unit() - 0.5) * 12.0};
        const std::vector<double> z = {(rng.next_unit() - 0.5) * 12.0, (rng.next_unit() - 0.5) * 12.0};
        const double xy = passage_time_between(field, x, y);
        const double yx = passage_time_between(field, y, x);
        REQUIRE(xy == Approx(yx).epsilon(1e-10));
        const double xz = passage_time_between(field, x, z);
        const double yz = passage_time_between(field, y, z);
        REQUIRE(xz <= xy + yz + 1e-9);
        const double xx = passage_time_between(field, x, x);
        REQUIRE(xx == 0.0);
    }
}
