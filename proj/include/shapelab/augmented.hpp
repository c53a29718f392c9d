#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

#include "shapelab/estimators.hpp"
#include "shapelab/passage.hpp"
#include "shapelab/stats.hpp"

namespace shapelab {

/// Parameters of the lattice augmentation: pitch, extra-edge weight
/// multiplier, and the cheap-path rate constant that fixes the hop budget
/// K' = 3dK/delta.
struct augment_config {
    double pitch = 1.0;   // lattice spacing, >= 1
    double K = 200.0;     // extra edges weigh K * pitch
    double delta = 0.05;  // cheap-path rate constant

    void validate() const {
        if (!(pitch >= 1.0)) throw error("augment_config: pitch must be >= 1");
        if (!(K > 0.0)) throw error("augment_config: K must be > 0");
        if (!(delta > 0.0)) throw error("augment_config: delta must be > 0");
    }
    double hop_budget_rate(int d) const { return 3.0 * d * K / delta; }
    static augment_config defaults_for_dimension(int d) { return {1.0, 100.0 * d, 0.05}; }
};

/// The base graph plus a cubic lattice of pitch t: every base vertex gains
/// one edge to the lattice vertex of its half-open cell u + [-t/2, t/2)^d,
/// and lattice vertices are joined to their 2d axis neighbors. All extra
/// edges carry deterministic weight K * t.
///
/// The lattice spans the box padded by half a cell so that each base
/// vertex's cell center exists; combined vertex ids place the base graph
/// first, lattice vertices after.
class augmented_graph {
   public:
    augmented_graph(const geo_graph& base, augment_config cfg) : base_(&base), cfg_(cfg) {
        cfg.validate();
        const auto& ps = base.points();
        dim_ = ps.dimension;
        per_axis_half_ = static_cast<std::int64_t>(
            std::floor(ps.box_side / (2.0 * cfg_.pitch) + 0.5));
        per_axis_ = 2 * per_axis_half_ + 1;
        lattice_count_ = 1;
        for (int k = 0; k < dim_; ++k) lattice_count_ *= per_axis_;
        build();
    }

    const geo_graph& base() const { return *base_; }
    const augment_config& config() const { return cfg_; }
    int dimension() const { return dim_; }
    std::size_t base_count() const { return base_->vertex_count(); }
    std::size_t lattice_count() const { return static_cast<std::size_t>(lattice_count_); }
    std::size_t vertex_count() const { return base_count() + lattice_count(); }
    double extra_edge_weight() const { return cfg_.K * cfg_.pitch; }

    bool is_lattice(std::size_t v) const { return v >= base_count(); }

    /// Combined vertex id of the lattice point at the given axis indices
    /// (each in [-half, half]).
    std::size_t lattice_vertex(std::span<const std::int64_t> axis) const {
        std::size_t idx = 0;
        for (int k = 0; k < dim_; ++k) {
            const std::int64_t a = axis[k] + per_axis_half_;
            idx = idx * per_axis_ + static_cast<std::size_t>(a);
        }
        return base_count() + idx;
    }

    std::size_t lattice_origin() const {
        std::vector<std::int64_t> zero(dim_, 0);
        return lattice_vertex(zero);
    }

    std::vector<double> position(std::size_t v) const {
        if (!is_lattice(v)) {
            const auto p = base_->position(static_cast<vertex_id>(v));
            return {p.begin(), p.end()};
        }
        std::size_t idx = v - base_count();
        std::vector<double> pos(dim_);
        for (int k = dim_ - 1; k >= 0; --k) {
            const auto a = static_cast<std::int64_t>(idx % per_axis_) - per_axis_half_;
            pos[k] = a * cfg_.pitch;
            idx /= per_axis_;
        }
        return pos;
    }

    /// Lattice cell center owning coordinate x (half-open cells), as axis
    /// indices clamped to the lattice range.
    std::vector<std::int64_t> cell_of(point_view x) const {
        std::vector<std::int64_t> axis(dim_);
        for (int k = 0; k < dim_; ++k) {
            auto a = static_cast<std::int64_t>(std::floor(x[k] / cfg_.pitch + 0.5));
            axis[k] = std::clamp(a, -per_axis_half_, per_axis_half_);
        }
        return axis;
    }

    std::size_t extra_edge_count() const { return extra_edge_count_; }

    /// Nearest vertex of the combined vertex set; ties break toward the
    /// lexicographically smallest coordinate vector, then the smallest id.
    std::size_t nearest_combined(point_view x) const {
        std::size_t best;
        double best_sq;
        {
            const vertex_id b = base_->nearest_vertex(x, false);
            best = b;
            best_sq = squared_distance(base_->position(b), x);
        }
        const auto axis = cell_of(x);
        const std::size_t lv = lattice_vertex(axis);
        const auto lp = position(lv);
        const double lsq = squared_distance(lp, x);
        if (lsq < best_sq) return lv;
        if (lsq == best_sq) {
            const auto bp = position(best);
            if (lex_less(lp, bp)) return lv;
        }
        return best;
    }

    struct half_edge {
        std::uint32_t to;
        std::uint32_t base_edge_id;  // kNoVertex marks an extra edge
    };

    std::span<const half_edge> adjacency(std::size_t v) const {
        return {adj_.data() + adj_start_[v], adj_start_[v + 1] - adj_start_[v]};
    }

    double edge_weight(const half_edge& e, const passage_field& field) const {
        return e.base_edge_id == kNoVertex ? extra_edge_weight() : field.weights[e.base_edge_id];
    }

   private:
    void build() {
        const std::size_t n = base_count();
        const std::size_t total = vertex_count();
        std::vector<std::vector<half_edge>> adj(total);

        for (vertex_id v = 0; v < n; ++v) {
            const auto nbrs = base_->neighbors(v);
            const auto eids = base_->incident_edge_ids(v);
            for (std::size_t i = 0; i < nbrs.size(); ++i)
                adj[v].push_back({nbrs[i], eids[i]});
        }
        // Cell-assignment edges; a base point exactly on a lattice site would
        // make the disjoint-union assumption fail.
        for (vertex_id v = 0; v < n; ++v) {
            const auto p = base_->position(v);
            const auto axis = cell_of(p);
            bool collision = true;
            for (int k = 0; k < dim_; ++k)
                if (p[k] != axis[k] * cfg_.pitch) collision = false;
            if (collision) throw lattice_collision("augmented_graph: point coincides with lattice site");
            const std::size_t lv = lattice_vertex(axis);
            adj[v].push_back({static_cast<std::uint32_t>(lv), kNoVertex});
            adj[lv].push_back({v, kNoVertex});
            ++extra_edge_count_;
        }
        // Lattice axis neighbors.
        std::vector<std::int64_t> axis(dim_, -per_axis_half_);
        while (true) {
            const std::size_t u = lattice_vertex(axis);
            for (int k = 0; k < dim_; ++k) {
                if (axis[k] + 1 <= per_axis_half_) {
                    ++axis[k];
                    const std::size_t w = lattice_vertex(axis);
                    --axis[k];
                    adj[u].push_back({static_cast<std::uint32_t>(w), kNoVertex});
                    adj[w].push_back({static_cast<std::uint32_t>(u), kNoVertex});
                    ++extra_edge_count_;
                }
            }
            int k = dim_ - 1;
            while (k >= 0 && ++axis[k] > per_axis_half_) {
                axis[k] = -per_axis_half_;
                --k;
            }
            if (k < 0) break;
        }

        adj_start_.assign(total + 1, 0);
        for (std::size_t v = 0; v < total; ++v) adj_start_[v + 1] = adj_start_[v] + adj[v].size();
        adj_.resize(adj_start_[total]);
        for (std::size_t v = 0; v < total; ++v)
            std::copy(adj[v].begin(), adj[v].end(), adj_.begin() + adj_start_[v]);
    }

    const geo_graph* base_;
    augment_config cfg_;
    int dim_ = 0;
    std::int64_t per_axis_half_ = 0;
    std::int64_t per_axis_ = 0;
    std::int64_t lattice_count_ = 0;
    std::size_t extra_edge_count_ = 0;
    std::vector<std::size_t> adj_start_;
    std::vector<half_edge> adj_;
};

/// Shortest passage time on the augmented graph from one combined vertex to
/// every other. Always finite: the lattice grid connects everything.
inline std::vector<double> augmented_times_from(const augmented_graph& aug,
                                                const passage_field& field, std::size_t source) {
    std::vector<double> dist(aug.vertex_count(), kInf);
    std::vector<bool> settled(aug.vertex_count(), false);
    using entry = std::pair<double, std::size_t>;
    std::priority_queue<entry, std::vector<entry>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        const auto [du, u] = heap.top();
        heap.pop();
        if (settled[u]) continue;
        settled[u] = true;
        for (const auto& e : aug.adjacency(u)) {
            const double cand = du + aug.edge_weight(e, field);
            if (cand < dist[e.to]) {
                dist[e.to] = cand;
                heap.emplace(cand, e.to);
            }
        }
    }
    return dist;
}

/// Passage time between two coordinates through their nearest combined
/// vertices; satisfies the lattice detour bound
/// T <= K sqrt(d) ||u - v|| + K t d.
inline double augmented_passage(const augmented_graph& aug, const passage_field& field, point_view x,
                                point_view y) {
    const std::size_t a = aug.nearest_combined(x);
    const std::size_t b = aug.nearest_combined(y);
    if (a == b) return 0.0;
    return augmented_times_from(aug, field, a)[b];
}

/// Minimum passage time over paths with at most `budget` hops, by layered
/// relaxation: layer h holds the optimum over walks of <= h edges, which for
/// nonnegative weights equals the optimum over paths of <= h edges. Stops
/// early once a layer is stationary, at which point the unconstrained
/// shortest-path value has been reached.
struct hop_limited_result {
    double value = kInf;
    std::size_t budget = 0;
    std::size_t stabilized_at = 0;  // first layer with no change (0 = never within budget)
};

inline hop_limited_result hop_limited_time(const augmented_graph& aug, const passage_field& field,
                                           std::size_t source, std::size_t target,
                                           std::size_t budget) {
    if (budget < 1) throw budget_too_small("hop_limited_time: hop budget < 1");
    std::vector<double> dist(aug.vertex_count(), kInf);
    dist[source] = 0.0;
    hop_limited_result out;
    out.budget = budget;
    for (std::size_t h = 1; h <= budget; ++h) {
        std::vector<double> next = dist;
        bool changed = false;
        for (std::size_t u = 0; u < aug.vertex_count(); ++u) {
            if (dist[u] == kInf) continue;
            for (const auto& e : aug.adjacency(u)) {
                const double cand = dist[u] + aug.edge_weight(e, field);
                if (cand < next[e.to]) {
                    next[e.to] = cand;
                    changed = true;
                }
            }
        }
        dist.swap(next);
        if (!changed) {
            out.stabilized_at = h;
            break;
        }
    }
    out.value = dist[target];
    return out;
}

/// The hop-limited passage time from the lattice origin to the combined
/// nearest vertex of x, with hop budget floor(K' ||x||).
inline hop_limited_result truncated_passage(const augmented_graph& aug, const passage_field& field,
                                            point_view x) {
    const double nx = norm(x);
    if (!(nx >= 1.0)) throw error("truncated_passage: ||x|| must be >= 1");
    if (!(aug.config().pitch <= nx)) throw error("truncated_passage: pitch must be <= ||x||");
    const auto budget =
        static_cast<std::size_t>(std::floor(aug.config().hop_budget_rate(aug.dimension()) * nx));
    if (budget < 1) throw budget_too_small("truncated_passage: hop budget < 1");
    return hop_limited_time(aug, field, aug.lattice_origin(), aug.nearest_combined(x), budget);
}

/// Empirical coupling table: frequencies of the hop-truncated time differing
/// from the augmented time, and of the augmented time (between the giant
/// nearest vertices) differing from the plain first-passage time.
struct coupling_table {
    std::vector<double> pitches;
    std::vector<double> freq_truncated_mismatch;  // P(Y != T^t)
    std::vector<double> freq_augmented_mismatch;  // P(T^t != T)
    std::vector<interval> truncated_ci;
    std::vector<interval> augmented_ci;
    std::size_t replicas = 0;
};

inline coupling_table coupling_frequencies(const sim_config& config, const weight_distribution& dist,
                                           const std::vector<double>& x,
                                           const std::vector<double>& pitches, std::size_t replicas,
                                           std::size_t workers = 0) {
    if (replicas < 200) throw error("coupling_frequencies: need >= 200 replicas");
    const auto flags = evaluate_conditions(dist, config.dimension, config.radius, config.intensity);
    if (!flags.zero_mass_absent || !flags.exponential_moment)
        throw condition_violated("coupling_frequencies: weight law must have no atom at zero "
                                 "and a finite exponential moment");

    coupling_table table;
    table.pitches = pitches;
    table.replicas = replicas;
    std::vector<std::vector<std::uint8_t>> trunc_mismatch(pitches.size(),
                                                          std::vector<std::uint8_t>(replicas, 0));
    std::vector<std::vector<std::uint8_t>> aug_mismatch(pitches.size(),
                                                        std::vector<std::uint8_t>(replicas, 0));

    const int d = config.dimension;
    for_each_replica(replicas, workers, [&](std::size_t rep) {
        const geo_graph graph = build_replica_graph(config, rep);
        const auto field =
            assign_weights(graph, dist, seeds_for_replica(config.master_seed, rep).weights);
        std::vector<double> origin(d, 0.0);
        const vertex_id qo = graph.nearest_vertex(origin, true);
        const vertex_id qx = graph.nearest_vertex(x, true);
        const auto fp = first_passage(field, qo, true);
        const double plain_time = fp.time[qx];
        for (std::size_t ti = 0; ti < pitches.size(); ++ti) {
            augment_config cfg = augment_config::defaults_for_dimension(d);
            cfg.pitch = pitches[ti];
            const augmented_graph aug(graph, cfg);
            const auto from_origin = augmented_times_from(aug, field, aug.lattice_origin());
            const double tt_origin = from_origin[aug.nearest_combined(x)];
            const auto truncated = truncated_passage(aug, field, x);
            const auto from_qo = augmented_times_from(aug, field, qo);
            const double tt_between_q = from_qo[qx];
            trunc_mismatch[ti][rep] = relative_mismatch(truncated.value, tt_origin) ? 1 : 0;
            aug_mismatch[ti][rep] = relative_mismatch(tt_between_q, plain_time) ? 1 : 0;
        }
    });

    for (std::size_t ti = 0; ti < pitches.size(); ++ti) {
        std::size_t trunc_hits = 0, aug_hits = 0;
        for (std::size_t rep = 0; rep < replicas; ++rep) {
            trunc_hits += trunc_mismatch[ti][rep];
            aug_hits += aug_mismatch[ti][rep];
        }
        table.freq_truncated_mismatch.push_back(static_cast<double>(trunc_hits) / replicas);
        table.freq_augmented_mismatch.push_back(static_cast<double>(aug_hits) / replicas);
        table.truncated_ci.push_back(wilson_interval(trunc_hits, replicas));
        table.augmented_ci.push_back(wilson_interval(aug_hits, replicas));
    }
    return table;
}

}  // namespace shapelab
