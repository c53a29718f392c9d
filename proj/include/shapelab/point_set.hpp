#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "shapelab/common.hpp"
#include "shapelab/rng.hpp"

namespace shapelab {

/// Parameters of one simulation universe: dimension, point intensity,
/// connection radius, box side, master seed. The box is [-L/2, L/2]^d.
struct sim_config {
    int dimension = 2;
    double intensity = 1.0;
    double radius = 1.0;
    double box_side = 10.0;
    std::uint64_t master_seed = 1;

    void validate() const {
        if (dimension < 2) throw error("sim_config: dimension must be >= 2");
        if (!(intensity > 0.0)) throw error("sim_config: intensity must be > 0");
        if (!(radius > 0.0)) throw error("sim_config: radius must be > 0");
        if (!(box_side >= 0.0)) throw error("sim_config: box_side must be >= 0");
    }
};

/// A seeded realization of a homogeneous Poisson point process in the box.
/// Coordinates are stored row-major; the order is the generation order and
/// is stable under a fixed seed.
struct point_set {
    int dimension = 0;
    double box_side = 0.0;
    double intensity = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> coords;  // size() == count() * dimension

    std::size_t count() const { return dimension == 0 ? 0 : coords.size() / dimension; }

    point_view point(std::size_t i) const {
        return point_view(coords.data() + i * dimension, static_cast<std::size_t>(dimension));
    }

    bool operator==(const point_set&) const = default;
};

/// Draws the Poisson count for the box volume first, then places that many
/// points uniformly (conditional uniformity). Identical config gives a
/// bit-identical result.
inline point_set sample_ppp(const sim_config& config) {
    config.validate();
    point_set ps;
    ps.dimension = config.dimension;
    ps.box_side = config.box_side;
    ps.intensity = config.intensity;
    ps.seed = config.master_seed;

    const double volume = std::pow(config.box_side, config.dimension);
    counter_rng count_stream(derive_stream(config.master_seed, "ppp-count", 0));
    const std::uint64_t n = sample_poisson(count_stream, config.intensity * volume);

    counter_rng coord_stream(derive_stream(config.master_seed, "ppp-coords", 0));
    ps.coords.resize(n * config.dimension);
    for (std::uint64_t i = 0; i < n; ++i) {
        for (int k = 0; k < config.dimension; ++k) {
            ps.coords[i * config.dimension + k] = (coord_stream.next_unit() - 0.5) * config.box_side;
        }
    }
    return ps;
}

/// Maps a realization of intensity lambda to intensity target by scaling
/// every coordinate (and the box) by (lambda/target)^(1/d). Point count is
/// unchanged.
inline point_set rescale_intensity(const point_set& ps, double target_intensity = 1.0) {
    if (!(ps.intensity > 0.0)) throw error("rescale_intensity: intensity must be > 0");
    if (!(target_intensity > 0.0)) throw error("rescale_intensity: target must be > 0");
    const double factor = std::pow(ps.intensity / target_intensity, 1.0 / ps.dimension);
    point_set out = ps;
    for (double& c : out.coords) c *= factor;
    out.box_side *= factor;
    out.intensity = target_intensity;
    return out;
}

}  // namespace shapelab
