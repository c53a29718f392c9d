#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "shapelab/passage.hpp"

namespace shapelab {

namespace detail {

/// Distance from point p to the segment [a, b].
inline double point_segment_distance(point_view p, point_view a, point_view b) {
    const std::size_t d = p.size();
    double ab2 = 0.0, ap_ab = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double e = b[k] - a[k];
        ab2 += e * e;
        ap_ab += (p[k] - a[k]) * e;
    }
    double s = ab2 > 0.0 ? ap_ab / ab2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    double dist2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double c = a[k] + s * (b[k] - a[k]);
        dist2 += (p[k] - c) * (p[k] - c);
    }
    return std::sqrt(dist2);
}

inline double point_polyline_distance(point_view p, const std::vector<std::vector<double>>& poly) {
    if (poly.size() == 1) return distance(p, point_view(poly[0]));
    double best = kInf;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i)
        best = std::min(best, point_segment_distance(p, point_view(poly[i]), point_view(poly[i + 1])));
    return best;
}

/// Samples a polyline at the given resolution, always including its vertices.
inline std::vector<std::vector<double>> sample_polyline(const std::vector<std::vector<double>>& poly,
                                                        double resolution) {
    std::vector<std::vector<double>> samples;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        const point_view a(poly[i]), b(poly[i + 1]);
        const double len = distance(a, b);
        const int pieces = std::max(1, static_cast<int>(std::ceil(len / resolution)));
        for (int j = 0; j < pieces; ++j) {
            std::vector<double> p(a.size());
            for (std::size_t k = 0; k < a.size(); ++k)
                p[k] = a[k] + (b[k] - a[k]) * j / static_cast<double>(pieces);
            samples.push_back(std::move(p));
        }
    }
    samples.push_back(poly.back());
    return samples;
}

}  // namespace detail

/// Symmetric Hausdorff distance between the polyline through the geodesic's
/// vertices and the straight segment from x to y. Each side is sampled at
/// the given resolution and measured exactly against the other polyline;
/// the vertices contribute exact distances.
inline double geodesic_deviation(const geo_graph& g, const std::vector<vertex_id>& path, point_view x,
                                 point_view y, double resolution = -1.0) {
    if (path.empty()) throw error("geodesic_deviation: empty path");
    if (resolution <= 0.0) resolution = g.radius() / 8.0;
    std::vector<std::vector<double>> poly;
    poly.reserve(path.size());
    for (vertex_id v : path) {
        const auto p = g.position(v);
        poly.emplace_back(p.begin(), p.end());
    }
    std::vector<std::vector<double>> segment = {std::vector<double>(x.begin(), x.end()),
                                                std::vector<double>(y.begin(), y.end())};

    double forward = 0.0;
    for (const auto& p : detail::sample_polyline(poly, resolution))
        forward = std::max(forward,
                           detail::point_segment_distance(point_view(p), x, y));
    double backward = 0.0;
    for (const auto& p : detail::sample_polyline(segment, resolution))
        backward = std::max(backward, detail::point_polyline_distance(point_view(p), poly));
    return std::max(forward, backward);
}

/// Vertices of the geodesic tree whose subtree leaves the shrinking cone
/// around their own direction: v fails when some descendant u satisfies
/// angle(v - x, u - x) > ||v - x||^(eps - 1/4).
struct straightness_report {
    std::size_t violating_count = 0;
    std::vector<vertex_id> violators;
};

/// `window_half_side`: only vertices inside the centered cube of that half
/// side participate, both as cone apexes and as descendants; pass a
/// non-positive value to use every reached vertex.
inline straightness_report report_straightness(const geo_graph& g, const first_passage_result& fp,
                                               point_view x, double eps,
                                               double window_half_side = -1.0) {
    if (!(eps > 0.0 && eps < 0.25)) throw error("report_straightness: eps must be in (0, 1/4)");
    const int d = g.points().dimension;
    const double exponent = eps - 0.25;

    auto in_window = [&](vertex_id v) {
        if (window_half_side <= 0.0) return true;
        const auto p = g.position(v);
        for (int k = 0; k < d; ++k)
            if (std::abs(p[k]) > window_half_side) return false;
        return true;
    };

    std::vector<bool> violates(g.vertex_count(), false);
    std::vector<double> direction(d);
    // Every vertex u charges all of its ancestors v: u is in the subtree of
    // each v on the tree path from the root to u.
    for (vertex_id u = 0; u < g.vertex_count(); ++u) {
        if (!fp.reached(u) || u == fp.source || !in_window(u)) continue;
        std::vector<double> toward_u(d);
        const auto pu = g.position(u);
        for (int k = 0; k < d; ++k) toward_u[k] = pu[k] - x[k];
        const double nu = norm(toward_u);
        for (vertex_id v = u; v != fp.source && v != kNoVertex; v = fp.predecessor[v]) {
            if (violates[v] || !in_window(v)) continue;
            const auto pv = g.position(v);
            double nv2 = 0.0;
            for (int k = 0; k < d; ++k) {
                direction[k] = pv[k] - x[k];
                nv2 += direction[k] * direction[k];
            }
            const double nv = std::sqrt(nv2);
            if (nv == 0.0 || nu == 0.0) continue;
            const double threshold = std::pow(nv, exponent);
            if (angle_between(direction, toward_u) > threshold) violates[v] = true;
        }
    }
    straightness_report report;
    for (vertex_id v = 0; v < g.vertex_count(); ++v) {
        if (violates[v]) {
            report.violators.push_back(v);
            ++report.violating_count;
        }
    }
    return report;
}

}  // namespace shapelab
