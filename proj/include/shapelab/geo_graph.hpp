#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "shapelab/common.hpp"
#include "shapelab/point_set.hpp"
#include "shapelab/stats.hpp"
#include "shapelab/union_find.hpp"

namespace shapelab {

using vertex_id = std::uint32_t;
inline constexpr vertex_id kNoVertex = std::numeric_limits<vertex_id>::max();

namespace detail {

/// Uniform grid over the box with cell side >= r, so that all neighbors of a
/// point lie in the 3^d cells around it. Cells are indexed per axis.
class cell_grid {
   public:
    cell_grid(const point_set& ps, double cell_side) : dim_(ps.dimension), side_(cell_side) {
        origin_ = -ps.box_side / 2.0;
        cells_per_axis_ = std::max<std::int64_t>(
            1, static_cast<std::int64_t>(std::floor(ps.box_side / cell_side)));
        // Integer cell coordinates are clamped to the axis range, so points
        // on the far box face fall into the last cell.
        std::int64_t total = 1;
        for (int k = 0; k < dim_; ++k) total *= cells_per_axis_;
        cell_start_.assign(total + 1, 0);
        const std::size_t n = ps.count();
        std::vector<std::int64_t> cell_of(n);
        for (std::size_t i = 0; i < n; ++i) {
            cell_of[i] = cell_index(ps.point(i));
            ++cell_start_[cell_of[i] + 1];
        }
        for (std::size_t c = 1; c < cell_start_.size(); ++c) cell_start_[c] += cell_start_[c - 1];
        members_.resize(n);
        std::vector<std::int64_t> cursor(cell_start_.begin(), cell_start_.end() - 1);
        for (std::size_t i = 0; i < n; ++i) members_[cursor[cell_of[i]]++] = static_cast<vertex_id>(i);
    }

    std::int64_t axis_cell(double coordinate) const {
        auto c = static_cast<std::int64_t>(std::floor((coordinate - origin_) / side_));
        return std::clamp<std::int64_t>(c, 0, cells_per_axis_ - 1);
    }

    std::int64_t cell_index(point_view p) const {
        std::int64_t idx = 0;
        for (int k = 0; k < dim_; ++k) idx = idx * cells_per_axis_ + axis_cell(p[k]);
        return idx;
    }

    std::span<const vertex_id> cell_members(std::int64_t idx) const {
        return {members_.data() + cell_start_[idx],
                static_cast<std::size_t>(cell_start_[idx + 1] - cell_start_[idx])};
    }

    /// Visits the members of every cell whose axis indices differ from the
    /// given center cell by at most `range`.
    template <typename Fn>
    void for_each_in_window(std::span<const std::int64_t> center, std::int64_t range, Fn&& fn) const {
        std::vector<std::int64_t> lo(dim_), hi(dim_), cur(dim_);
        for (int k = 0; k < dim_; ++k) {
            lo[k] = std::max<std::int64_t>(0, center[k] - range);
            hi[k] = std::min<std::int64_t>(cells_per_axis_ - 1, center[k] + range);
            cur[k] = lo[k];
        }
        while (true) {
            std::int64_t idx = 0;
            for (int k = 0; k < dim_; ++k) idx = idx * cells_per_axis_ + cur[k];
            for (vertex_id v : cell_members(idx)) fn(v);
            int k = dim_ - 1;
            while (k >= 0 && ++cur[k] > hi[k]) {
                cur[k] = lo[k];
                --k;
            }
            if (k < 0) break;
        }
    }

    int dimension() const { return dim_; }
    double cell_side() const { return side_; }
    std::int64_t cells_per_axis() const { return cells_per_axis_; }

   private:
    int dim_;
    double side_;
    double origin_;
    std::int64_t cells_per_axis_;
    std::vector<std::int64_t> cell_start_;
    std::vector<vertex_id> members_;
};

}  // namespace detail

/// Random geometric graph over a point set: vertices are the points, edges
/// join pairs at Euclidean distance strictly between 0 and r. Immutable
/// after construction; all queries are read-only.
class geo_graph {
   public:
    geo_graph(point_set points, double radius) : points_(std::move(points)), radius_(radius) {
        if (!(radius > 0.0)) throw error("geo_graph: radius must be > 0");
        build_edges();
        label_components();
    }

    const point_set& points() const { return points_; }
    double radius() const { return radius_; }
    std::size_t vertex_count() const { return points_.count(); }
    std::size_t edge_count() const { return edges_.size(); }

    point_view position(vertex_id v) const { return points_.point(v); }

    /// Neighbor ids of v, sorted ascending.
    std::span<const vertex_id> neighbors(vertex_id v) const {
        return {adjacency_.data() + adj_start_[v], adj_start_[v + 1] - adj_start_[v]};
    }

    /// Edge list with u < v, sorted lexicographically; index in this list is
    /// the canonical edge id used by passage fields.
    const std::vector<std::pair<vertex_id, vertex_id>>& edges() const { return edges_; }

    /// Edge ids aligned with neighbors(v).
    std::span<const std::uint32_t> incident_edge_ids(vertex_id v) const {
        return {adj_edge_.data() + adj_start_[v], adj_start_[v + 1] - adj_start_[v]};
    }

    const std::vector<std::uint32_t>& component_ids() const { return component_; }
    std::uint32_t component_of(vertex_id v) const { return component_[v]; }
    const std::vector<std::size_t>& component_sizes() const { return component_sizes_; }
    std::uint32_t giant_component_id() const { return giant_id_; }
    std::size_t giant_size() const {
        return component_sizes_.empty() ? 0 : component_sizes_[giant_id_];
    }
    bool in_giant(vertex_id v) const { return component_[v] == giant_id_; }

    /// Closest vertex to x, over all vertices or over the giant component.
    /// Distance ties break toward the lexicographically smallest coordinate
    /// vector, then the smallest index.
    vertex_id nearest_vertex(point_view x, bool restrict_to_giant) const {
        if (vertex_count() == 0 || (restrict_to_giant && giant_size() == 0))
            throw empty_target_set("nearest_vertex: target vertex set is empty");
        const auto& grid = *grid_;
        std::vector<std::int64_t> center(points_.dimension);
        for (int k = 0; k < points_.dimension; ++k) center[k] = grid.axis_cell(x[k]);

        vertex_id best = kNoVertex;
        double best_sq = kInf;
        auto consider = [&](vertex_id v) {
            if (restrict_to_giant && !in_giant(v)) return;
            const double sq = squared_distance(position(v), x);
            if (sq < best_sq || (sq == best_sq && better_tie(v, best))) {
                best_sq = sq;
                best = v;
            }
        };
        // Expand cell rings until the closest possible point of the next ring
        // cannot beat the current best.
        const std::int64_t max_range = grid.cells_per_axis();
        for (std::int64_t range = 0; range <= max_range; ++range) {
            if (range == 0) {
                grid.for_each_in_window(center, 0, consider);
            } else {
                grid.for_each_in_window(center, range, [&](vertex_id v) { consider(v); });
            }
            if (best != kNoVertex) {
                // A point outside the scanned window is at least `range`
                // whole cells away along some axis.
                const double safe = static_cast<double>(range) * grid.cell_side();
                if (best_sq <= safe * safe) break;
            }
        }
        if (best == kNoVertex) throw empty_target_set("nearest_vertex: target vertex set is empty");
        return best;
    }

    /// Unweighted hop distance between the nearest giant vertices to x and y.
    std::size_t graph_distance(point_view x, point_view y) const {
        const vertex_id a = nearest_vertex(x, true);
        const vertex_id b = nearest_vertex(y, true);
        return hop_distance(a, b);
    }

    /// BFS hop distance between two vertices of one component.
    std::size_t hop_distance(vertex_id a, vertex_id b) const {
        if (a == b) return 0;
        if (component_[a] != component_[b])
            throw empty_target_set("hop_distance: vertices in different components");
        std::vector<std::uint32_t> dist(vertex_count(), std::numeric_limits<std::uint32_t>::max());
        std::deque<vertex_id> queue;
        dist[a] = 0;
        queue.push_back(a);
        while (!queue.empty()) {
            const vertex_id u = queue.front();
            queue.pop_front();
            for (vertex_id w : neighbors(u)) {
                if (dist[w] != std::numeric_limits<std::uint32_t>::max()) continue;
                dist[w] = dist[u] + 1;
                if (w == b) return dist[w];
                queue.push_back(w);
            }
        }
        throw empty_target_set("hop_distance: unreachable");  // components matched, cannot happen
    }

    /// Hop distances from one source to every vertex (max uint32 = unreached).
    std::vector<std::uint32_t> hop_distances_from(vertex_id a) const {
        std::vector<std::uint32_t> dist(vertex_count(), std::numeric_limits<std::uint32_t>::max());
        std::deque<vertex_id> queue;
        dist[a] = 0;
        queue.push_back(a);
        while (!queue.empty()) {
            const vertex_id u = queue.front();
            queue.pop_front();
            for (vertex_id w : neighbors(u)) {
                if (dist[w] != std::numeric_limits<std::uint32_t>::max()) continue;
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
        return dist;
    }

    /// Euclidean distance from x to the nearest giant-component vertex.
    double distance_to_giant(point_view x) const {
        const vertex_id v = nearest_vertex(x, true);
        return distance(position(v), x);
    }

   private:
    bool better_tie(vertex_id candidate, vertex_id incumbent) const {
        if (incumbent == kNoVertex) return true;
        const auto pc = position(candidate);
        const auto pi = position(incumbent);
        if (lex_less(pc, pi)) return true;
        if (lex_less(pi, pc)) return false;
        return candidate < incumbent;
    }

    void build_edges() {
        const std::size_t n = points_.count();
        grid_.emplace(points_, radius_);
        std::vector<std::vector<vertex_id>> adj(n);
        const double r_sq = radius_ * radius_;
        std::vector<std::int64_t> center(points_.dimension);
        for (std::size_t i = 0; i < n; ++i) {
            const auto pi = points_.point(i);
            for (int k = 0; k < points_.dimension; ++k) center[k] = grid_->axis_cell(pi[k]);
            grid_->for_each_in_window(center, 1, [&](vertex_id j) {
                if (j <= i) return;
                const double sq = squared_distance(pi, points_.point(j));
                if (sq > 0.0 && sq < r_sq) {
                    adj[i].push_back(j);
                    adj[j].push_back(static_cast<vertex_id>(i));
                }
            });
        }
        adj_start_.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) adj_start_[i + 1] = adj_start_[i] + adj[i].size();
        adjacency_.resize(adj_start_[n]);
        adj_edge_.assign(adj_start_[n], 0);
        for (std::size_t i = 0; i < n; ++i) {
            std::sort(adj[i].begin(), adj[i].end());
            std::copy(adj[i].begin(), adj[i].end(), adjacency_.begin() + adj_start_[i]);
            for (vertex_id j : adj[i])
                if (j > i) edges_.emplace_back(static_cast<vertex_id>(i), j);
        }
        std::sort(edges_.begin(), edges_.end());
        // Map adjacency entries to canonical edge ids.
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t s = adj_start_[i]; s < adj_start_[i + 1]; ++s) {
                const vertex_id j = adjacency_[s];
                const auto key = std::make_pair(std::min<vertex_id>(i, j), std::max<vertex_id>(i, j));
                const auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
                adj_edge_[s] = static_cast<std::uint32_t>(it - edges_.begin());
            }
        }
    }

    void label_components() {
        const std::size_t n = points_.count();
        union_find uf(n);
        for (const auto& [u, v] : edges_) uf.unite(u, v);
        component_.assign(n, 0);
        std::vector<std::uint32_t> root_label(n, std::numeric_limits<std::uint32_t>::max());
        std::uint32_t next = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t root = uf.find(i);
            if (root_label[root] == std::numeric_limits<std::uint32_t>::max()) root_label[root] = next++;
            component_[i] = root_label[root];
        }
        component_sizes_.assign(next, 0);
        for (std::size_t i = 0; i < n; ++i) ++component_sizes_[component_[i]];
        // Giant component: maximum size; ties resolved toward the component
        // containing the smallest vertex index. Labels are assigned in order
        // of first-seen vertex, so the smallest label wins ties.
        giant_id_ = 0;
        for (std::uint32_t c = 1; c < next; ++c)
            if (component_sizes_[c] > component_sizes_[giant_id_]) giant_id_ = c;
    }

    point_set points_;
    double radius_;
    std::optional<detail::cell_grid> grid_;
    std::vector<std::size_t> adj_start_;
    std::vector<vertex_id> adjacency_;
    std::vector<std::uint32_t> adj_edge_;
    std::vector<std::pair<vertex_id, vertex_id>> edges_;
    std::vector<std::uint32_t> component_;
    std::vector<std::size_t> component_sizes_;
    std::uint32_t giant_id_ = 0;
};

/// Structural estimates for the giant component measured inside an inner
/// window: point density, hop-per-distance stretch, largest empty-ball
/// diameter found by a probe lattice.
struct structure_report {
    double giant_density = 0.0;      // giant vertices per unit volume in the window
    double window_side = 0.0;        // inner window side used
    double stretch_factor = 0.0;     // fitted hops per unit Euclidean distance
    double stretch_halfwidth = 0.0;  // ~2 standard errors of the fit
    double hole_diameter = 0.0;      // largest probe-certified empty-ball diameter
    double probe_spacing = 0.0;
};

inline structure_report estimate_structure(const geo_graph& graph, double inner_window_fraction = 0.5,
                                           double probe_spacing = -1.0) {
    const auto& ps = graph.points();
    const int d = ps.dimension;
    if (probe_spacing <= 0.0) probe_spacing = graph.radius() / 4.0;
    if (probe_spacing > graph.radius() / 2.0)
        throw error("estimate_structure: probe_spacing must be <= r/2");
    if (graph.giant_size() == 0) throw window_too_small("estimate_structure: giant component empty");

    structure_report report;
    report.window_side = inner_window_fraction * ps.box_side;
    report.probe_spacing = probe_spacing;
    const double half_window = report.window_side / 2.0;

    // Density of giant vertices in the inner window.
    std::size_t inside = 0;
    for (vertex_id v = 0; v < graph.vertex_count(); ++v) {
        if (!graph.in_giant(v)) continue;
        bool in = true;
        const auto p = graph.position(v);
        for (int k = 0; k < d; ++k)
            if (std::abs(p[k]) > half_window) in = false;
        if (in) ++inside;
    }
    if (inside < 10) throw window_too_small("estimate_structure: < 10 giant vertices in window");
    report.giant_density = static_cast<double>(inside) / std::pow(report.window_side, d);

    // Stretch: hops from the origin's giant vertex to probes s*u over a grid
    // of scales and >= 8 directions, fitted through the origin so that the
    // per-hop bound ||u-v|| < r forces slope >= 1/r.
    std::vector<double> origin(d, 0.0);
    const vertex_id root = graph.nearest_vertex(origin, true);
    const auto hops = graph.hop_distances_from(root);
    std::vector<double> xs, ys;
    const int directions = std::max(8, 2 * d);
    const int scale_count = 6;
    for (int dir = 0; dir < directions; ++dir) {
        std::vector<double> u(d, 0.0);
        if (d == 2) {
            const double ang = 2.0 * std::numbers::pi * dir / directions;
            u[0] = std::cos(ang);
            u[1] = std::sin(ang);
        } else {
            // Axis and diagonal directions; enough spread for the fit.
            const int axis = dir % d;
            u[axis] = (dir / d) % 2 == 0 ? 1.0 : -1.0;
            if (dir >= 2 * d) {
                for (int k = 0; k < d; ++k) u[k] = (dir >> k) & 1 ? 1.0 : -1.0;
                const double nn = norm(u);
                for (int k = 0; k < d; ++k) u[k] /= nn;
            }
        }
        for (int si = 1; si <= scale_count; ++si) {
            const double s = half_window * si / scale_count;
            std::vector<double> target(d);
            for (int k = 0; k < d; ++k) target[k] = s * u[k];
            const vertex_id tv = graph.nearest_vertex(target, true);
            if (hops[tv] == std::numeric_limits<std::uint32_t>::max()) continue;
            xs.push_back(s);
            ys.push_back(static_cast<double>(hops[tv]));
        }
    }
    const auto fit = fit_line_through_origin(xs, ys);
    report.stretch_factor = fit.slope;
    report.stretch_halfwidth = 2.0 * fit.slope_std_error;

    // Largest empty ball: for every probe p in the window, the ball around p
    // of radius (distance to nearest giant vertex - r) avoids the giant
    // coverage; report twice the best radius. Resolution is +- probe_spacing.
    double best_gap = 0.0;
    const auto steps = static_cast<std::int64_t>(std::floor(report.window_side / probe_spacing));
    std::vector<std::int64_t> idx(d, 0);
    std::vector<double> probe(d);
    while (true) {
        for (int k = 0; k < d; ++k) probe[k] = -half_window + idx[k] * probe_spacing;
        const double gap = graph.distance_to_giant(probe) - graph.radius();
        if (gap > best_gap) best_gap = gap;
        int k = d - 1;
        while (k >= 0 && ++idx[k] > steps) {
            idx[k] = 0;
            --k;
        }
        if (k < 0) break;
    }
    report.hole_diameter = 2.0 * best_gap;
    return report;
}

}  // namespace shapelab
