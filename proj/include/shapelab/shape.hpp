#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "shapelab/passage.hpp"

namespace shapelab {

/// Radii and roundness of the reached region at time t, measured on a probe
/// lattice: a probe belongs to the region iff its nearest giant vertex has
/// been reached. Radii are resolved to +- probe_spacing.
struct shape_stats {
    double t = 0.0;
    std::size_t reached_count = 0;
    double inradius = 0.0;
    double outradius = 0.0;
    double roundness = 1.0;       // outradius / inradius
    double speed_estimate = 0.0;  // ((inradius + outradius) / 2) / t, 0 at t = 0
    bool window_clipped = false;  // region touched the window boundary; radii unreliable
};

/// Membership mask of the probe lattice, exportable as a text grid.
struct shape_mask {
    int dimension = 0;
    double spacing = 0.0;
    double half_window = 0.0;
    std::int64_t per_axis = 0;
    std::vector<std::uint8_t> member;  // row-major over the probe lattice
};

namespace detail {

template <typename Fn>
void for_each_lattice_point(int d, std::int64_t per_axis, Fn&& fn) {
    std::vector<std::int64_t> idx(d, 0);
    while (true) {
        fn(std::span<const std::int64_t>(idx));
        int k = d - 1;
        while (k >= 0 && ++idx[k] >= per_axis) {
            idx[k] = 0;
            --k;
        }
        if (k < 0) return;
    }
}

}  // namespace detail

inline shape_stats shape_statistics(const passage_field& field, point_view source_coordinate, double t,
                                    double probe_spacing, double inner_window_fraction = 0.5,
                                    shape_mask* mask_out = nullptr) {
    if (!(t >= 0.0)) throw error("shape_statistics: t must be >= 0");
    if (!(probe_spacing > 0.0)) throw error("shape_statistics: probe_spacing must be > 0");
    const geo_graph& g = *field.graph;
    const int d = g.points().dimension;
    const vertex_id root = g.nearest_vertex(source_coordinate, true);
    const auto fp = first_passage(field, root, true);

    shape_stats stats;
    stats.t = t;
    for (vertex_id v = 0; v < g.vertex_count(); ++v)
        if (g.in_giant(v) && fp.time[v] <= t) ++stats.reached_count;

    const double half_window = inner_window_fraction * g.points().box_side / 2.0;
    const auto per_axis = static_cast<std::int64_t>(std::floor(2.0 * half_window / probe_spacing)) + 1;

    double min_nonmember = kInf;
    double max_member = 0.0;
    std::vector<double> probe(d);
    if (mask_out != nullptr) {
        mask_out->dimension = d;
        mask_out->spacing = probe_spacing;
        mask_out->half_window = half_window;
        mask_out->per_axis = per_axis;
        mask_out->member.assign(static_cast<std::size_t>(std::pow(per_axis, d)), 0);
    }
    std::size_t flat = 0;
    detail::for_each_lattice_point(d, per_axis, [&](std::span<const std::int64_t> idx) {
        bool boundary = false;
        for (int k = 0; k < d; ++k) {
            probe[k] = -half_window + idx[k] * probe_spacing;
            if (idx[k] == 0 || idx[k] == per_axis - 1) boundary = true;
        }
        const vertex_id nearest = g.nearest_vertex(probe, true);
        const bool member = fp.time[nearest] <= t;
        if (mask_out != nullptr) mask_out->member[flat] = member ? 1 : 0;
        ++flat;
        const double dist = distance(probe, source_coordinate);
        if (member) {
            max_member = std::max(max_member, dist);
            if (boundary) stats.window_clipped = true;
        } else {
            min_nonmember = std::min(min_nonmember, dist);
        }
    });

    // The ball test is only valid inside the window; beyond its boundary the
    // lattice says nothing, so the inradius is capped there as well.
    double window_gap = kInf;
    for (int k = 0; k < d; ++k) {
        window_gap = std::min(window_gap, half_window - std::abs(source_coordinate[k]));
    }
    stats.outradius = max_member;
    stats.inradius = std::min({min_nonmember, window_gap, stats.outradius});
    if (stats.inradius < 0.0) stats.inradius = 0.0;
    stats.roundness = stats.inradius > 0.0 ? stats.outradius / stats.inradius : 1.0;
    if (t > 0.0) stats.speed_estimate = 0.5 * (stats.inradius + stats.outradius) / t;
    return stats;
}

/// Reached vertex set at time t (giant component only), for monotonicity
/// checks and exports.
inline std::vector<vertex_id> reached_set(const first_passage_result& fp, const geo_graph& g,
                                          double t) {
    std::vector<vertex_id> out;
    for (vertex_id v = 0; v < g.vertex_count(); ++v)
        if (g.in_giant(v) && fp.time[v] <= t) out.push_back(v);
    return out;
}

}  // namespace shapelab
