#include <catch2/catch_amalgamated.hpp>

#include <deque>
#include <map>

#include "shapelab/geo_graph.hpp"
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

point_set uniform_points(std::size_t n, int d, double box_side, std::uint64_t seed) {
    point_set ps;
    ps.dimension = d;
    ps.box_side = box_side;
    ps.intensity = n / std::pow(box_side, d);
    ps.seed = seed;
    counter_rng rng(derive_stream(seed, "uniform-points", 0));
    for (std::size_t i = 0; i < n * d; ++i)
        ps.coords.push_back((rng.next_unit() - 0.5) * box_side);
    return ps;
}

std::vector<std::pair<vertex_id, vertex_id>> brute_force_edges(const point_set& ps, double r) {
    std::vector<std::pair<vertex_id, vertex_id>> edges;
    for (std::size_t i = 0; i < ps.count(); ++i)
        for (std::size_t j = i + 1; j < ps.count(); ++j) {
            const double d = distance(ps.point(i), ps.point(j));
            if (d > 0.0 && d < r)
                edges.emplace_back(static_cast<vertex_id>(i), static_cast<vertex_id>(j));
        }
    return edges;
}

/// Flood-fill labels, the independent oracle for union-find components.
std::vector<std::uint32_t> bfs_labels(const geo_graph& g) {
    std::vector<std::uint32_t> label(g.vertex_count(), UINT32_MAX);
    std::uint32_t next = 0;
    for (vertex_id s = 0; s < g.vertex_count(); ++s) {
        if (label[s] != UINT32_MAX) continue;
        std::deque<vertex_id> queue{s};
        label[s] = next;
        while (!queue.empty()) {
            const auto u = queue.front();
            queue.pop_front();
            for (auto w : g.neighbors(u))
                if (label[w] == UINT32_MAX) {
                    label[w] = next;
                    queue.push_back(w);
                }
        }
        ++next;
    }
    return label;
}

}  // namespace

TEST_CASE("two nearby points are joined, strict threshold excluded") {
    const geo_graph close(make_points({{0, 0}, {0, 0.5}}, 4), 1.0);
    REQUIRE(close.edge_count() == 1);
    const geo_graph at_threshold(make_points({{0, 0}, {1, 0}}, 4), 1.0);
    REQUIRE(at_threshold.edge_count() == 0);
}

TEST_CASE("coincident points get no edge") {
    const geo_graph g(make_points({{0.25, 0.25}, {0.25, 0.25}}, 4), 1.0);
    REQUIRE(g.edge_count() == 0);
}

TEST_CASE("cell-indexed edges equal the all-pairs oracle") {
    const auto ps = uniform_points(500, 2, 10.0, 42);
    const geo_graph g(ps, 0.3);
    REQUIRE(g.edges() == brute_force_edges(ps, 0.3));
}

TEST_CASE("grid completeness across radii and dimensions") {
    for (const auto& [n, d, r, seed] : {std::tuple{300, 2, 0.8, 1ULL}, std::tuple{200, 3, 1.1, 2ULL},
                                        std::tuple{400, 2, 2.5, 3ULL}}) {
        const auto ps = uniform_points(n, d, 8.0, seed);
        const geo_graph g(ps, r);
        REQUIRE(g.edges() == brute_force_edges(ps, r));
    }
}

TEST_CASE("adjacency is symmetric and strict") {
    const auto ps = uniform_points(400, 2, 10.0, 9);
    const geo_graph g(ps, 1.0);
    for (vertex_id u = 0; u < g.vertex_count(); ++u)
        for (vertex_id v : g.neighbors(u)) {
            const auto back = g.neighbors(v);
            REQUIRE(std::find(back.begin(), back.end(), u) != back.end());
            const double d = distance(g.position(u), g.position(v));
            REQUIRE(d > 0.0);
            REQUIRE(d < 1.0);
        }
}

TEST_CASE("five isolated vertices form five components, giant is vertex 0's") {
    const geo_graph g(make_points({{0, 0}, {2, 0}, {0, 2}, {-2, 0}, {0, -2}}, 8), 1.0);
    REQUIRE(g.component_sizes().size() == 5);
    REQUIRE(g.giant_size() == 1);
    REQUIRE(g.component_of(0) == g.giant_component_id());
}

TEST_CASE("a path of four vertices is one component") {
    const geo_graph g(make_points({{0, 0}, {0.9, 0}, {1.8, 0}, {2.7, 0}}, 8), 1.0);
    REQUIRE(g.component_sizes().size() == 1);
    REQUIRE(g.giant_size() == 4);
}

TEST_CASE("union-find labels agree with flood fill up to relabeling") {
    const auto ps = uniform_points(300, 2, 12.0, 77);
    const geo_graph g(ps, 1.0);
    const auto oracle = bfs_labels(g);
    std::map<std::uint32_t, std::uint32_t> forward;
    for (vertex_id v = 0; v < g.vertex_count(); ++v) {
        const auto [it, fresh] = forward.emplace(g.component_of(v), oracle[v]);
        REQUIRE(it->second == oracle[v]);
        (void)fresh;
    }
}

TEST_CASE("nearest vertex returns exact hits and lexicographic ties") {
    const geo_graph g(make_points({{0, 0}, {0, 2}}, 8), 1.0);
    const std::vector<double> hit = {0.0, 2.0};
    REQUIRE(g.nearest_vertex(hit, false) == 1);
    const std::vector<double> between = {0.0, 1.0};
    // Equidistant: the lexicographically smaller coordinate vector wins.
    REQUIRE(g.nearest_vertex(between, false) == 0);
}

TEST_CASE("nearest vertex matches the linear-scan oracle") {
    const auto ps = uniform_points(600, 2, 10.0, 5);
    const geo_graph g(ps, 0.9);
    counter_rng rng(derive_stream(5, "queries", 0));
    for (int i = 0; i < 10'000; ++i) {
        const std::vector<double> x = {(rng.next_unit() - 0.5) * 12.0,
                                       (rng.next_unit() - 0.5) * 12.0};
        vertex_id best = kNoVertex;
        double best_sq = kInf;
        for (vertex_id v = 0; v < g.vertex_count(); ++v) {
            const double sq = squared_distance(g.position(v), x);
            if (sq < best_sq) {
                best_sq = sq;
                best = v;
            } else if (sq == best_sq && lex_less(g.position(v), g.position(best))) {
                best = v;
            }
        }
        REQUIRE(g.nearest_vertex(x, false) == best);
    }
}

TEST_CASE("nearest vertex with empty target set throws") {
    const geo_graph g(make_points({}, 4), 1.0);
    const std::vector<double> x = {0.0, 0.0};
    REQUIRE_THROWS_AS(g.nearest_vertex(x, false), empty_target_set);
}

TEST_CASE("graph distance basics") {
    const geo_graph g(make_points({{0, 0}, {0.9, 0}, {1.8, 0}}, 8), 1.0);
    const std::vector<double> a = {0.0, 0.0};
    const std::vector<double> c = {1.8, 0.0};
    REQUIRE(g.graph_distance(a, a) == 0);
    REQUIRE(g.graph_distance(a, c) == 2);
}

TEST_CASE("hop count times radius exceeds the Euclidean distance") {
    const auto ps = uniform_points(800, 2, 14.0, 21);
    const geo_graph g(ps, 1.2);
    counter_rng rng(derive_stream(21, "pairs", 0));
    std::vector<vertex_id> giant;
    for (vertex_id v = 0; v < g.vertex_count(); ++v)
        if (g.in_giant(v)) giant.push_back(v);
    REQUIRE(giant.size() >= 2);
    const auto hops_from_first = g.hop_distances_from(giant[0]);
    for (int i = 0; i < 1'000; ++i) {
        const auto u = giant[rng.next_below(giant.size())];
        const auto v = giant[rng.next_below(giant.size())];
        if (u == v) continue;
        const double euclid = distance(g.position(u), g.position(v));
        const auto hops = g.hop_distance(u, v);
        REQUIRE(static_cast<double>(hops) * 1.2 > euclid);
        REQUIRE(hops >= static_cast<std::size_t>(std::ceil(euclid / 1.2)));
        (void)hops_from_first;
    }
}

TEST_CASE("structure: complete graph density equals the point density") {
    const auto ps = uniform_points(60, 2, 4.0, 11);
    const geo_graph g(ps, 4.0 * std::sqrt(2.0) + 0.1);  // r >= L sqrt(d): complete graph
    REQUIRE(g.giant_size() == 60);
    const auto report = estimate_structure(g, 1.0, 1.0);
    REQUIRE(report.giant_density == Approx(60.0 / 16.0));
}

TEST_CASE("structure: stretch factor is at least one hop per radius") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
        sim_config c;
        c.dimension = 2;
        c.intensity = 1.0;
        c.radius = 2.0;
        c.box_side = 40.0;
        c.master_seed = seed;
        const geo_graph g(sample_ppp(c), c.radius);
        const auto report = estimate_structure(g);
        REQUIRE(report.stretch_factor >= 1.0 / c.radius);
    }
}

TEST_CASE("structure: planted circular void is recovered") {
    const double r = 1.0;
    // Dense regular grid covering the box, minus a disk of radius 3r.
    std::vector<std::vector<double>> pts;
    for (double x = -10.0; x <= 10.0; x += 0.5)
        for (double y = -10.0; y <= 10.0; y += 0.5) {
            if (x * x + y * y < 9.0 * r * r) continue;
            pts.push_back({x, y});
        }
    const geo_graph g(make_points(std::move(pts), 20.0), r);
    const double probe = r / 4.0;
    const auto report = estimate_structure(g, 1.0, probe);
    REQUIRE(report.hole_diameter >= 2.0 * (3.0 * r - r) - 2.0 * probe);
    REQUIRE(report.hole_diameter <= 6.0 * r);
}

TEST_CASE("structure: window with too few vertices is rejected") {
    const geo_graph g(make_points({{0, 0}, {0.5, 0}}, 40.0), 1.0);
    REQUIRE_THROWS_AS(estimate_structure(g, 0.5, 0.25), window_too_small);
}

TEST_CASE("structure: probe spacing coarser than r/2 is rejected") {
    const auto ps = uniform_points(200, 2, 10.0, 3);
    const geo_graph g(ps, 1.0);
    REQUIRE_THROWS_AS(estimate_structure(g, 0.5, 0.9), error);
}
