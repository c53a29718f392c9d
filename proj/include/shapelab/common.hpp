#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace shapelab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Error taxonomy shared by all modules. Each condition named by the
// operation contracts maps to one subclass so callers can catch precisely.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct empty_target_set : error {
    using error::error;
};
struct window_too_small : error {
    using error::error;
};
struct condition_violated : error {
    using error::error;
};
struct unreached_vertex : error {
    using error::error;
};
struct lattice_collision : error {
    using error::error;
};
struct budget_too_small : error {
    using error::error;
};
struct budget_exceeded : error {
    using error::error;
};
struct integer_overflow : error {
    using error::error;
};
struct invalid_schedule : error {
    using error::error;
};
struct spec_invalid : error {
    using error::error;
};
struct format_version_mismatch : error {
    using error::error;
};
struct corrupt_file : error {
    using error::error;
};
struct resource_error : error {
    using error::error;
};

/// Volume of the unit ball in d dimensions.
inline double unit_ball_volume(int d) {
    if (d < 1) throw error("unit_ball_volume: d must be >= 1");
    return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

// Flat coordinate views. Points are stored row-major with stride d;
// a "point" is a span of d doubles.
using point_view = std::span<const double>;

inline double squared_distance(point_view a, point_view b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

inline double distance(point_view a, point_view b) { return std::sqrt(squared_distance(a, b)); }

inline double norm(point_view a) {
    double s = 0.0;
    for (double c : a) s += c * c;
    return std::sqrt(s);
}

/// Angle between two nonzero vectors, via clamped arccos of the
/// normalized dot product. Returns a value in [0, pi].
inline double angle_between(point_view a, point_view b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw error("angle_between: zero vector");
    double c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) c += a[i] * b[i];
    c /= (na * nb);
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return std::acos(c);
}

/// Lexicographic comparison of coordinate vectors.
inline bool lex_less(point_view a, point_view b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

/// True when a and b differ beyond floating-point noise. Distinct random
/// sums essentially never collide; the tolerance only absorbs rounding.
inline bool relative_mismatch(double a, double b, double tolerance = 1e-9) {
    if (a == b) return false;
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) > tolerance * scale;
}

}  // namespace shapelab
