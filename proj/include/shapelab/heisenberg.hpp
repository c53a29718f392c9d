#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "shapelab/common.hpp"
#include "shapelab/rng.hpp"
#include "shapelab/stats.hpp"

namespace shapelab {

namespace detail {

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw integer_overflow("heisenberg: addition overflow");
    return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw integer_overflow("heisenberg: multiplication overflow");
    return r;
}

}  // namespace detail

/// Integer upper-triangular coordinates (x, y, z) with the group law
/// (x,y,z)(x',y',z') = (x+x', y+y', z+z'+xy'). Exact checked arithmetic.
struct heisenberg_element {
    std::int64_t x = 0;
    std::int64_t y = 0;
    std::int64_t z = 0;

    bool operator==(const heisenberg_element&) const = default;

    static heisenberg_element identity() { return {0, 0, 0}; }
};

inline heisenberg_element multiply(const heisenberg_element& g, const heisenberg_element& h) {
    using detail::checked_add;
    using detail::checked_mul;
    return {checked_add(g.x, h.x), checked_add(g.y, h.y),
            checked_add(checked_add(g.z, h.z), checked_mul(g.x, h.y))};
}

inline heisenberg_element inverse(const heisenberg_element& g) {
    using detail::checked_mul;
    return {-g.x, -g.y, detail::checked_add(checked_mul(g.x, g.y), -g.z)};
}

inline heisenberg_element commutator(const heisenberg_element& g, const heisenberg_element& h) {
    using detail::checked_mul;
    return {0, 0, detail::checked_add(checked_mul(g.x, h.y), -checked_mul(h.x, g.y))};
}

/// Closed-form n-th power (n >= 0): (nx, ny, nz + n(n-1)/2 xy).
inline heisenberg_element power(const heisenberg_element& g, std::int64_t n) {
    if (n < 0) throw error("power: exponent must be >= 0");
    using detail::checked_add;
    using detail::checked_mul;
    const std::int64_t pairs = (n % 2 == 0) ? checked_mul(n / 2, n - 1) : checked_mul(n, (n - 1) / 2);
    return {checked_mul(n, g.x), checked_mul(n, g.y),
            checked_add(checked_mul(n, g.z), checked_mul(pairs, checked_mul(g.x, g.y)))};
}

inline const std::vector<heisenberg_element>& standard_generators() {
    static const std::vector<heisenberg_element> gens = {
        {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
    return gens;
}

namespace detail {

// Packed key for hash storage; coordinates must fit the bit budget, which
// holds comfortably for every ball radius this module can enumerate.
inline std::uint64_t pack_element(const heisenberg_element& g) {
    const auto ux = static_cast<std::uint64_t>(g.x + (1 << 15)) & 0xFFFF;
    const auto uy = static_cast<std::uint64_t>(g.y + (1 << 15)) & 0xFFFF;
    const auto uz = static_cast<std::uint64_t>(g.z + (1LL << 30)) & 0xFFFFFFFF;
    return (ux << 48) | (uy << 32) | uz;
}

struct packed_hash {
    std::size_t operator()(std::uint64_t k) const { return mix64(k); }
};

}  // namespace detail

/// Word ball of radius n around the identity for the standard generators:
/// every group element at word norm <= n, with its norm. Neighbors of g are
/// the left translates s*g (right-invariant convention).
class word_ball {
   public:
    explicit word_ball(int radius) : radius_(radius) {
        if (radius < 0) throw error("word_ball: radius must be >= 0");
        // Ball volume grows like the fourth power of the radius.
        index_.reserve(static_cast<std::size_t>(0.5 * std::pow(radius + 1.0, 4.0)) + 16);
        elements_.push_back(heisenberg_element::identity());
        norms_.push_back(0);
        index_.emplace(detail::pack_element(elements_[0]), 0);
        layer_sizes_.push_back(1);
        std::size_t layer_begin = 0;
        for (int depth = 1; depth <= radius; ++depth) {
            const std::size_t layer_end = elements_.size();
            for (std::size_t i = layer_begin; i < layer_end; ++i) {
                const heisenberg_element g = elements_[i];
                for (const auto& s : standard_generators()) {
                    const heisenberg_element h = multiply(s, g);
                    const auto key = detail::pack_element(h);
                    if (index_.emplace(key, elements_.size()).second) {
                        elements_.push_back(h);
                        norms_.push_back(static_cast<std::uint16_t>(depth));
                    }
                }
            }
            layer_sizes_.push_back(elements_.size());
            layer_begin = layer_end;
        }
    }

    int radius() const { return radius_; }
    std::size_t size() const { return elements_.size(); }
    const std::vector<heisenberg_element>& elements() const { return elements_; }
    std::uint16_t norm_at(std::size_t i) const { return norms_[i]; }

    /// |B(e, n)| for n = 0..radius.
    const std::vector<std::size_t>& cumulative_sizes() const { return layer_sizes_; }

    std::optional<std::size_t> find(const heisenberg_element& g) const {
        const auto it = index_.find(detail::pack_element(g));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::uint16_t> norm_of(const heisenberg_element& g) const {
        const auto idx = find(g);
        if (!idx) return std::nullopt;
        return norms_[*idx];
    }

   private:
    int radius_;
    std::vector<heisenberg_element> elements_;
    std::vector<std::uint16_t> norms_;
    std::vector<std::size_t> layer_sizes_;
    std::unordered_map<std::uint64_t, std::size_t, detail::packed_hash> index_;
};

/// Word norm by breadth-first search, bounded by the enumeration budget.
inline int word_norm(const heisenberg_element& g, int budget = 40) {
    const word_ball ball(std::min(budget, 6));
    if (auto n = ball.norm_of(g)) return *n;
    for (int radius = 12; radius <= budget; radius += 6) {
        const word_ball bigger(radius);
        if (auto n = bigger.norm_of(g)) return *n;
    }
    const word_ball last(budget);
    if (auto n = last.norm_of(g)) return *n;
    throw budget_exceeded("word_norm: element outside the enumerated ball");
}

/// Word norm by splitting a geodesic in half against a precomputed ball:
/// ||g|| = min over p in B(R) with g p^{-1} in B(R) of ||p|| + ||g p^{-1}||,
/// exact whenever ||g|| <= 2R.
inline int word_norm_split(const heisenberg_element& g, const word_ball& half_ball) {
    if (auto direct = half_ball.norm_of(g)) return *direct;
    int best = std::numeric_limits<int>::max();
    const auto& elements = half_ball.elements();
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const heisenberg_element rest = multiply(g, inverse(elements[i]));
        if (auto n = half_ball.norm_of(rest)) {
            best = std::min(best, static_cast<int>(half_ball.norm_at(i)) + *n);
        }
    }
    if (best == std::numeric_limits<int>::max())
        throw budget_exceeded("word_norm_split: element outside twice the ball radius");
    return best;
}

/// Ball growth and the scaling of central powers: ball sizes up to n_max,
/// the log-log growth exponent fitted on the upper half of the range, and
/// the table ||Z^m|| / sqrt(m) over square m <= m_max.
struct growth_report {
    std::vector<std::size_t> ball_sizes;  // |B(n)|, n = 0..n_max
    double growth_exponent = 0.0;
    std::vector<std::int64_t> square_m;
    std::vector<int> central_norms;
    std::vector<double> central_ratios;  // ||Z^m|| / sqrt(m)
};

inline growth_report growth_and_central_scaling(int n_max, std::int64_t m_max) {
    if (n_max < 2) throw error("growth_and_central_scaling: n_max too small");
    growth_report report;
    {
        const word_ball ball(n_max);
        report.ball_sizes = ball.cumulative_sizes();
    }
    std::vector<double> log_n, log_size;
    for (int n = std::max(1, n_max / 2); n <= n_max; ++n) {
        log_n.push_back(std::log(static_cast<double>(n)));
        log_size.push_back(std::log(static_cast<double>(report.ball_sizes[n])));
    }
    report.growth_exponent = fit_line(log_n, log_size).slope;

    const auto k_max = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(m_max))));
    if (k_max >= 1) {
        // One half-ball serves every split; the norm of Z^(k^2) is at most 4k.
        const word_ball half_ball(static_cast<int>(2 * k_max + 2));
        for (std::int64_t k = 1; k <= k_max; ++k) {
            const std::int64_t m = k * k;
            const heisenberg_element zm{0, 0, m};
            const int norm = word_norm_split(zm, half_ball);
            report.square_m.push_back(m);
            report.central_norms.push_back(norm);
            report.central_ratios.push_back(norm / std::sqrt(static_cast<double>(m)));
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// First-passage weights on the Cayley ball.

/// Vertex-coloring weight model: i.i.d. colors per element, edge weight
/// 1 when the endpoint colors differ. Colors are keyed by the element
/// coordinates, so enlarging the ball never recolors anything.
struct random_coloring_model {
    std::vector<double> palette;  // color probabilities, must sum to 1

    int color_of(const heisenberg_element& g, std::uint64_t seed) const {
        counter_rng stream(detail::mix64(seed ^ detail::pack_element(g)));
        const double u = stream.next_unit();
        double acc = 0.0;
        for (std::size_t c = 0; c < palette.size(); ++c) {
            acc += palette[c];
            if (u < acc) return static_cast<int>(c);
        }
        return static_cast<int>(palette.size()) - 1;
    }

    /// Sufficient condition for at-least-linear growth of the passage time:
    /// the largest color probability below 1/(|S|-1) = 1/3.
    bool condition_satisfied() const {
        return *std::max_element(palette.begin(), palette.end()) < 1.0 / 3.0;
    }
};

/// Independent exponential weights whose rate depends on the direction
/// class of the edge ({s, s^-1}); class 0 = x-direction, class 1 = y.
struct directional_exponential_model {
    double rate_x = 1.0;
    double rate_y = 1.0;
};

struct cayley_fpp_result {
    const word_ball* ball = nullptr;
    int target_radius = 0;
    std::vector<double> passage_time;  // per ball element, from the identity
    bool margin_stable = true;         // doubled margin left target values unchanged
    bool coloring_condition = false;   // only meaningful for the coloring model
};

namespace detail {

inline int direction_class(const heisenberg_element& s) { return s.x != 0 ? 0 : 1; }

/// Dijkstra from the identity over the ball-restricted Cayley graph. The
/// weight callback receives the endpoint element indices and the generator.
template <typename WeightFn>
std::vector<double> cayley_dijkstra(const word_ball& ball, WeightFn&& weight) {
    std::vector<double> dist(ball.size(), kInf);
    std::vector<bool> settled(ball.size(), false);
    using entry = std::pair<double, std::size_t>;
    std::priority_queue<entry, std::vector<entry>, std::greater<>> heap;
    dist[0] = 0.0;  // identity is element 0
    heap.emplace(0.0, 0);
    while (!heap.empty()) {
        const auto [du, u] = heap.top();
        heap.pop();
        if (settled[u]) continue;
        settled[u] = true;
        const heisenberg_element& g = ball.elements()[u];
        for (const auto& s : standard_generators()) {
            const heisenberg_element h = multiply(s, g);
            const auto vi = ball.find(h);
            if (!vi) continue;
            const double cand = du + weight(u, *vi, s);
            if (cand < dist[*vi]) {
                dist[*vi] = cand;
                heap.emplace(cand, *vi);
            }
        }
    }
    return dist;
}

inline std::uint64_t cayley_edge_key(std::uint64_t seed, const heisenberg_element& a,
                                     const heisenberg_element& b) {
    const auto ka = pack_element(a);
    const auto kb = pack_element(b);
    return mix64(seed ^ mix64(std::min(ka, kb)) ^ (mix64(std::max(ka, kb)) << 1));
}

}  // namespace detail

namespace detail {

/// Shared margin-doubling check: recompute on a ball with twice the margin
/// and adopt any changed target value, flagging the instability.
template <typename RunFn>
void verify_margin(cayley_fpp_result& result, const word_ball& ball, int target_radius,
                   RunFn&& run_on) {
    const int doubled = 2 * ball.radius() - target_radius;
    if (doubled < ball.radius() + 1) return;
    const word_ball larger(doubled);
    const std::vector<double> wider = run_on(larger);
    for (std::size_t i = 0; i < ball.size(); ++i) {
        if (ball.norm_at(i) > target_radius) continue;
        const auto j = larger.find(ball.elements()[i]);
        if (relative_mismatch(result.passage_time[i], wider[*j])) {
            result.margin_stable = false;
            result.passage_time[i] = wider[*j];
        }
    }
}

}  // namespace detail

/// Passage times c(g) from the identity under the coloring model, computed
/// on a ball with margin; the default margin equals the target radius,
/// and stability under margin doubling is verified when requested.
inline cayley_fpp_result cayley_fpp(const word_ball& ball, const random_coloring_model& model,
                                    std::uint64_t seed, int target_radius, bool check_margin = true) {
    if (target_radius > ball.radius()) throw budget_exceeded("cayley_fpp: target exceeds ball");
    double total = 0.0;
    for (double p : model.palette) total += p;
    if (model.palette.empty() || std::abs(total - 1.0) > 1e-12)
        throw error("cayley_fpp: palette must sum to 1");
    auto run_on = [&](const word_ball& b) {
        std::vector<int> colors(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) colors[i] = model.color_of(b.elements()[i], seed);
        return detail::cayley_dijkstra(
            b, [&](std::size_t u, std::size_t v, const heisenberg_element&) {
                return colors[u] == colors[v] ? 0.0 : 1.0;
            });
    };
    cayley_fpp_result result;
    result.ball = &ball;
    result.target_radius = target_radius;
    result.passage_time = run_on(ball);
    result.coloring_condition = model.condition_satisfied();
    if (check_margin) detail::verify_margin(result, ball, target_radius, run_on);
    return result;
}

inline cayley_fpp_result cayley_fpp(const word_ball& ball, const directional_exponential_model& model,
                                    std::uint64_t seed, int target_radius, bool check_margin = true) {
    if (target_radius > ball.radius()) throw budget_exceeded("cayley_fpp: target exceeds ball");
    if (!(model.rate_x > 0.0 && model.rate_y > 0.0)) throw error("cayley_fpp: rates must be > 0");
    auto run_on = [&](const word_ball& b) {
        return detail::cayley_dijkstra(
            b, [&](std::size_t u, std::size_t v, const heisenberg_element& s) {
                const double rate = detail::direction_class(s) == 0 ? model.rate_x : model.rate_y;
                counter_rng stream(detail::cayley_edge_key(seed, b.elements()[u], b.elements()[v]));
                return -std::log1p(-stream.next_unit()) / rate;
            });
    };
    cayley_fpp_result result;
    result.ball = &ball;
    result.target_radius = target_radius;
    result.passage_time = run_on(ball);
    if (check_margin) detail::verify_margin(result, ball, target_radius, run_on);
    return result;
}

/// Rescaled passage times along powers of one element: sample means of
/// c(g^n)/n with standard errors for each n in the grid.
struct cocycle_convergence_result {
    std::vector<std::int64_t> exponents;
    std::vector<sample_summary> per_exponent;
    bool fekete_trend = true;  // means weakly decreasing up to 2 combined SE
};

template <typename Model>
cocycle_convergence_result cocycle_convergence(const heisenberg_element& g,
                                               const Model& model,
                                               const std::vector<std::int64_t>& exponents,
                                               std::size_t replicas, std::uint64_t master_seed,
                                               const word_ball* shared_ball = nullptr) {
    if (exponents.empty()) throw error("cocycle_convergence: empty grid");
    std::vector<heisenberg_element> targets;
    int needed = 0;
    for (auto n : exponents) {
        targets.push_back(power(g, n));
        needed = std::max(needed, word_norm(targets.back(), 200));
    }
    // Margin equal to the farthest target norm; callers may pass a prebuilt
    // ball at least that large.
    std::optional<word_ball> own;
    if (shared_ball == nullptr || shared_ball->radius() < 2 * needed)
        own.emplace(2 * needed);
    const word_ball& ball = own ? *own : *shared_ball;

    std::vector<std::vector<double>> samples(exponents.size(), std::vector<double>(replicas, 0.0));
    for (std::size_t rep = 0; rep < replicas; ++rep) {
        const auto seed = derive_stream(master_seed, "cayley-weights", rep);
        const auto result = cayley_fpp(ball, model, seed, needed, false);
        for (std::size_t i = 0; i < exponents.size(); ++i) {
            const auto idx = ball.find(targets[i]);
            samples[i][rep] = result.passage_time[*idx] / static_cast<double>(exponents[i]);
        }
    }
    cocycle_convergence_result out;
    out.exponents = exponents;
    for (const auto& column : samples) out.per_exponent.push_back(summarize(column));
    for (std::size_t i = 0; i + 1 < out.per_exponent.size(); ++i) {
        const auto& a = out.per_exponent[i];
        const auto& b = out.per_exponent[i + 1];
        const double slack = 2.0 * std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
        if (b.mean > a.mean + slack) out.fekete_trend = false;
    }
    return out;
}

}  // namespace shapelab
