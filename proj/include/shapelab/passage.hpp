#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

#include "shapelab/distributions.hpp"
#include "shapelab/geo_graph.hpp"
#include "shapelab/rng.hpp"

namespace shapelab {

/// One i.i.d. weight per edge. Weights are drawn on per-edge derived
/// streams keyed by the sorted endpoint pair, so regeneration from
/// (graph, distribution, seed) is bit-identical and order-independent.
struct passage_field {
    const geo_graph* graph = nullptr;
    weight_distribution distribution;
    std::uint64_t seed = 0;
    std::vector<double> weights;  // indexed by canonical edge id
    condition_flags conditions;

    double weight_of_edge(std::uint32_t edge_id) const { return weights[edge_id]; }
};

inline passage_field assign_weights(const geo_graph& graph, const weight_distribution& dist,
                                    std::uint64_t seed) {
    passage_field field;
    field.graph = &graph;
    field.distribution = dist;
    field.seed = seed;
    field.weights.resize(graph.edge_count());
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        const auto& [u, v] = graph.edges()[e];
        counter_rng stream(derive_edge_stream(seed, u, v));
        field.weights[e] = dist.sample(stream);
    }
    field.conditions = evaluate_conditions(dist, graph.points().dimension, graph.radius(),
                                           graph.points().intensity);
    return field;
}

/// Single-source passage times with the geodesic tree. time[v] is the
/// minimal path weight from the source; predecessor[v] closes the tree.
struct first_passage_result {
    vertex_id source = kNoVertex;
    std::vector<double> time;
    std::vector<vertex_id> predecessor;  // kNoVertex at the source and unreached vertices

    bool reached(vertex_id v) const { return time[v] < kInf; }
};

/// Dijkstra over nonnegative weights. The heap orders by (distance, vertex
/// id), and among settled neighbors that realize the same optimal distance
/// the smallest predecessor index wins, which pins the tree deterministically.
inline first_passage_result first_passage(const passage_field& field, vertex_id source,
                                          bool restrict_to_giant = false) {
    const geo_graph& g = *field.graph;
    if (source >= g.vertex_count()) throw error("first_passage: bad source");
    if (restrict_to_giant && !g.in_giant(source))
        throw error("first_passage: source not in giant component");

    first_passage_result result;
    result.source = source;
    result.time.assign(g.vertex_count(), kInf);
    result.predecessor.assign(g.vertex_count(), kNoVertex);
    std::vector<bool> settled(g.vertex_count(), false);

    using entry = std::pair<double, vertex_id>;
    std::priority_queue<entry, std::vector<entry>, std::greater<>> heap;
    result.time[source] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        const auto [dist, u] = heap.top();
        heap.pop();
        if (settled[u]) continue;
        settled[u] = true;
        const auto nbrs = g.neighbors(u);
        const auto eids = g.incident_edge_ids(u);
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            const vertex_id v = nbrs[i];
            const double cand = dist + field.weights[eids[i]];
            if (cand < result.time[v]) {
                result.time[v] = cand;
                result.predecessor[v] = u;
                heap.emplace(cand, v);
            } else if (v != source && !settled[v] && cand == result.time[v] &&
                       u < result.predecessor[v]) {
                result.predecessor[v] = u;
            }
        }
    }
    return result;
}

/// Passage time between arbitrary coordinates: the time between their
/// nearest giant-component vertices.
inline double passage_time_between(const passage_field& field, point_view x, point_view y) {
    const geo_graph& g = *field.graph;
    const vertex_id a = g.nearest_vertex(x, true);
    const vertex_id b = g.nearest_vertex(y, true);
    if (a == b) return 0.0;
    const auto result = first_passage(field, a, true);
    return result.time[b];
}

/// Backtracks the geodesic from source to target along the tree.
inline std::vector<vertex_id> extract_geodesic(const first_passage_result& result, vertex_id target) {
    if (!result.reached(target)) throw unreached_vertex("extract_geodesic: target unreached");
    std::vector<vertex_id> path;
    for (vertex_id v = target; v != kNoVertex; v = result.predecessor[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace shapelab
