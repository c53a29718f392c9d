#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "shapelab/geo_graph.hpp"
#include "shapelab/parallel.hpp"
#include "shapelab/passage.hpp"
#include "shapelab/stats.hpp"

namespace shapelab {

/// Derives the per-replica seeds for a simulation universe: one stream for
/// the point process, one for the edge weights.
struct replica_seeds {
    std::uint64_t points;
    std::uint64_t weights;
};

inline replica_seeds seeds_for_replica(std::uint64_t master_seed, std::uint64_t replica) {
    return {derive_stream(master_seed, "points", replica),
            derive_stream(master_seed, "weights", replica)};
}

inline geo_graph build_replica_graph(const sim_config& config, std::uint64_t replica) {
    sim_config c = config;
    c.master_seed = seeds_for_replica(config.master_seed, replica).points;
    return geo_graph(sample_ppp(c), config.radius);
}

/// Passage-time scaling along one direction: sample means of T(o, s*u)/s per
/// scale, the pooled estimate at the largest scale, and the upper bracket
/// stretch * E[weight] implied by hop-count subadditivity.
struct time_constant_estimate {
    std::vector<double> scales;
    std::vector<sample_summary> per_scale;  // statistics of T(o, s*u)/s
    double pooled = 0.0;                    // mean at the largest scale
    double pooled_std_error = 0.0;
    double lower_bracket = 0.0;  // pooled - 2 SE, floored at 0
    double upper_bracket = 0.0;  // stretch_factor * mean weight
    bool window_clipped = false;
    std::vector<std::vector<double>> samples;  // per scale, per replica (replica-ordered)
};

inline time_constant_estimate estimate_time_constant(const sim_config& config,
                                                     const weight_distribution& dist,
                                                     const std::vector<double>& direction,
                                                     const std::vector<double>& scales,
                                                     std::size_t replicas, std::size_t workers = 0) {
    if (replicas < 2) throw error("estimate_time_constant: need >= 2 replicas");
    if (scales.empty()) throw error("estimate_time_constant: empty scale grid");
    const int d = config.dimension;
    const double inner_half = config.box_side / 4.0;  // inner window fraction 1/2
    for (double s : scales)
        if (s > inner_half) throw window_too_small("estimate_time_constant: scale outside inner window");

    const double dir_norm = norm(direction);
    if (dir_norm == 0.0) throw error("estimate_time_constant: zero direction");

    time_constant_estimate out;
    out.scales = scales;
    out.samples.assign(scales.size(), std::vector<double>(replicas, 0.0));
    std::vector<double> stretch_samples(replicas, 0.0);

    for_each_replica(replicas, workers, [&](std::size_t rep) {
        const geo_graph graph = build_replica_graph(config, rep);
        const auto field =
            assign_weights(graph, dist, seeds_for_replica(config.master_seed, rep).weights);
        std::vector<double> origin(d, 0.0);
        const vertex_id root = graph.nearest_vertex(origin, true);
        const auto fp = first_passage(field, root, true);
        std::vector<double> target(d);
        for (std::size_t si = 0; si < scales.size(); ++si) {
            for (int k = 0; k < d; ++k) target[k] = scales[si] * direction[k] / dir_norm;
            const vertex_id tv = graph.nearest_vertex(target, true);
            out.samples[si][rep] = fp.time[tv] / scales[si];
        }
        stretch_samples[rep] = estimate_structure(graph).stretch_factor;
    });

    out.per_scale.reserve(scales.size());
    for (const auto& column : out.samples) out.per_scale.push_back(summarize(column));
    const auto& last = out.per_scale.back();
    out.pooled = last.mean;
    out.pooled_std_error = last.std_error;
    out.lower_bracket = std::max(0.0, out.pooled - 2.0 * out.pooled_std_error);
    out.upper_bracket = summarize(stretch_samples).mean * dist.mean();
    return out;
}

/// Per-distance mean and variance of T(x), plus the empirical tail table of
/// |T(x) - mean| / sqrt(||x||) over a grid of thresholds.
struct deviation_statistics_result {
    std::vector<double> distances;
    std::vector<sample_summary> per_distance;  // statistics of T(x)
    std::vector<double> thresholds;
    std::vector<std::vector<double>> tail_frequency;  // [distance][threshold]
    std::vector<std::vector<double>> samples;         // [distance][replica]
};

inline deviation_statistics_result deviation_statistics(const sim_config& config,
                                                        const weight_distribution& dist,
                                                        const std::vector<double>& distances,
                                                        const std::vector<double>& thresholds,
                                                        std::size_t replicas,
                                                        std::size_t workers = 0) {
    if (replicas < 100) throw error("deviation_statistics: need >= 100 replicas");
    const auto flags = evaluate_conditions(dist, config.dimension, config.radius, config.intensity);
    if (!flags.zero_mass_absent || !flags.exponential_moment)
        throw condition_violated("deviation_statistics: weight law must have no atom at zero "
                                 "and a finite exponential moment");

    const int d = config.dimension;
    deviation_statistics_result out;
    out.distances = distances;
    out.thresholds = thresholds;
    out.samples.assign(distances.size(), std::vector<double>(replicas, 0.0));

    for_each_replica(replicas, workers, [&](std::size_t rep) {
        const geo_graph graph = build_replica_graph(config, rep);
        const auto field =
            assign_weights(graph, dist, seeds_for_replica(config.master_seed, rep).weights);
        std::vector<double> origin(d, 0.0);
        const vertex_id root = graph.nearest_vertex(origin, true);
        const auto fp = first_passage(field, root, true);
        std::vector<double> target(d, 0.0);
        for (std::size_t xi = 0; xi < distances.size(); ++xi) {
            target[0] = distances[xi];
            const vertex_id tv = graph.nearest_vertex(target, true);
            out.samples[xi][rep] = fp.time[tv];
        }
    });

    out.per_distance.reserve(distances.size());
    out.tail_frequency.assign(distances.size(), std::vector<double>(thresholds.size(), 0.0));
    for (std::size_t xi = 0; xi < distances.size(); ++xi) {
        const auto summary = summarize(out.samples[xi]);
        out.per_distance.push_back(summary);
        const double scale = std::sqrt(distances[xi]);
        for (std::size_t li = 0; li < thresholds.size(); ++li) {
            std::size_t hits = 0;
            for (double s : out.samples[xi])
                if (std::abs(s - summary.mean) / scale > thresholds[li]) ++hits;
            out.tail_frequency[xi][li] = static_cast<double>(hits) / replicas;
        }
    }
    return out;
}

}  // namespace shapelab
