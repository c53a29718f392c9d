#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "shapelab/estimators.hpp"
#include "shapelab/geo_graph.hpp"
#include "shapelab/rng.hpp"
#include "shapelab/stats.hpp"

namespace shapelab {

/// Time/angle schedule for the competition diagnostics: geometric times
/// t_n = t0 (1+d)^n and angles r_n decreasing to r0/2 with decrements
/// r_n - r_{n+1} = t_n^(a-1).
struct schedule_params {
    double growth_exponent_a = 0.9;   // in (3/4, 1)
    double band_exponent_b = 0.78;    // in (3/4, 1), < 2a - 1
    double step_ratio = 0.5;          // in (0, 1)
    double t0 = 0.0;                  // must exceed the minimal start time

    double minimal_start_time() const {
        return std::pow(2.0 * (1.0 + step_ratio) / step_ratio, 1.0 / (1.0 - growth_exponent_a));
    }

    void validate() const {
        if (!(growth_exponent_a > 0.75 && growth_exponent_a < 1.0))
            throw invalid_schedule("schedule: a must be in (3/4, 1)");
        if (!(band_exponent_b > 0.75 && band_exponent_b < 1.0))
            throw invalid_schedule("schedule: b must be in (3/4, 1)");
        if (!(band_exponent_b < 2.0 * growth_exponent_a - 1.0))
            throw invalid_schedule("schedule: b must be < 2a - 1");
        if (!(step_ratio > 0.0 && step_ratio < 1.0))
            throw invalid_schedule("schedule: step ratio must be in (0, 1)");
        if (!(t0 > minimal_start_time()))
            throw invalid_schedule("schedule: t0 must exceed the minimal start time");
    }
};

struct competition_schedule {
    schedule_params params;
    std::vector<double> times;   // t_0 .. t_n
    std::vector<double> angles;  // r_0 .. r_n
    double angle_limit = 0.0;    // r_0 / 2
    double max_recurrence_residual = 0.0;
};

/// Closed-form schedule with the recurrence cross-checked against stepwise
/// accumulation; the residual reported is relative to the angle scale.
inline competition_schedule compute_schedule(const schedule_params& params, std::size_t n_max) {
    params.validate();
    competition_schedule s;
    s.params = params;
    const double a1 = params.growth_exponent_a - 1.0;  // negative
    const double q = std::pow(1.0 + params.step_ratio, a1);
    const double scale = std::pow(params.t0, a1);
    s.times.reserve(n_max + 1);
    s.angles.reserve(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) {
        s.times.push_back(params.t0 * std::pow(1.0 + params.step_ratio, static_cast<double>(n)));
        s.angles.push_back((1.0 + std::pow(q, static_cast<double>(n))) / (1.0 - q) * scale);
    }
    s.angle_limit = s.angles.front() / 2.0;

    double acc = s.angles.front();
    for (std::size_t n = 0; n + 1 <= n_max; ++n) {
        acc -= std::pow(s.times[n], a1);
        const double residual = std::abs(acc - s.angles[n + 1]) / s.angles[n + 1];
        s.max_recurrence_residual = std::max(s.max_recurrence_residual, residual);
    }
    if (s.max_recurrence_residual > 1e-12)
        throw invalid_schedule("compute_schedule: recurrence residual above 1e-12");
    return s;
}

// ---------------------------------------------------------------------------
// Geometric region predicates used by the competition diagnostics.

/// Is p within angle s of direction z (apex at the origin)? The apex itself
/// belongs to every cone.
inline bool in_cone(point_view p, point_view z, double s) {
    if (norm(p) == 0.0) return true;
    return angle_between(p, z) <= s;
}

/// rho1 <= ||p|| < rho2 (difference of open balls).
inline bool in_annulus(point_view p, double rho1, double rho2) {
    const double n = norm(p);
    return n >= rho1 && n < rho2;
}

/// The stage-n target region: the annulus between speed * t_n/(1+step) and
/// speed * (t_n - t_n^b), intersected with the cone of angle r_n around z.
inline bool in_stage_region(point_view p, point_view z, const competition_schedule& schedule,
                            std::size_t n, double speed) {
    const double tn = schedule.times.at(n);
    const double rn = schedule.angles.at(n);
    const double inner = speed * tn / (1.0 + schedule.params.step_ratio);
    const double outer = speed * (tn - std::pow(tn, schedule.params.band_exponent_b));
    return in_annulus(p, inner, outer) && in_cone(p, z, rn);
}

// ---------------------------------------------------------------------------
// Two-species growth/invasion dynamics on the giant component.

enum class occupancy : std::uint8_t { empty = 0, red = 1, blue = 2 };

enum class overlap_rule { red_wins, blue_wins, alternate_by_index };

namespace detail {

/// Fenwick tree over per-site rates; values are small integers stored as
/// doubles, so updates and prefix sums stay exact.
class rate_tree {
   public:
    explicit rate_tree(std::size_t n) : tree_(n + 1, 0.0), n_(n) {}

    void add(std::size_t i, double delta) {
        for (std::size_t k = i + 1; k <= n_; k += k & (~k + 1)) tree_[k] += delta;
    }

    double total() const {
        double s = 0.0;
        for (std::size_t k = n_; k > 0; k &= k - 1) s += tree_[k];
        return s;
    }

    /// Smallest index with prefix sum (inclusive) exceeding `target`.
    std::size_t find(double target) const {
        std::size_t pos = 0;
        std::size_t mask = 1;
        while ((mask << 1) <= n_) mask <<= 1;
        for (; mask > 0; mask >>= 1) {
            const std::size_t next = pos + mask;
            if (next <= n_ && tree_[next] <= target) {
                target -= tree_[next];
                pos = next;
            }
        }
        return pos;  // 0-based site index
    }

   private:
    std::vector<double> tree_;
    std::size_t n_;
};

}  // namespace detail

/// Mutable state of one competition run. Occupied sites never return to
/// empty; the cached neighbor counts are the source of the rates and can be
/// audited against the occupancy at any time.
class competition_state {
   public:
    competition_state(const geo_graph& graph, const std::vector<std::vector<double>>& red_sites,
                      const std::vector<std::vector<double>>& blue_sites, overlap_rule rule)
        : graph_(&graph),
          occupancy_(graph.vertex_count(), occupancy::empty),
          red_neighbors_(graph.vertex_count(), 0),
          blue_neighbors_(graph.vertex_count(), 0),
          rates_(graph.vertex_count(), 0.0),
          tree_(graph.vertex_count()) {
        if (graph.giant_size() == 0) throw empty_target_set("competition: giant component empty");
        std::vector<std::uint8_t> red_mark(graph.vertex_count(), 0);
        std::vector<std::uint8_t> blue_mark(graph.vertex_count(), 0);
        for (const auto& w : red_sites) red_mark[graph.nearest_vertex(w, true)] = 1;
        for (const auto& w : blue_sites) blue_mark[graph.nearest_vertex(w, true)] = 1;
        std::size_t alternate = 0;
        for (vertex_id v = 0; v < graph.vertex_count(); ++v) {
            if (red_mark[v] && blue_mark[v]) {
                switch (rule) {
                    case overlap_rule::red_wins:
                        occupancy_[v] = occupancy::red;
                        break;
                    case overlap_rule::blue_wins:
                        occupancy_[v] = occupancy::blue;
                        break;
                    case overlap_rule::alternate_by_index:
                        occupancy_[v] = (alternate++ % 2 == 0) ? occupancy::red : occupancy::blue;
                        break;
                }
            } else if (red_mark[v]) {
                occupancy_[v] = occupancy::red;
            } else if (blue_mark[v]) {
                occupancy_[v] = occupancy::blue;
            }
        }
        rebuild_caches();
    }

    const geo_graph& graph() const { return *graph_; }
    double clock() const { return clock_; }
    std::uint64_t event_count() const { return event_count_; }
    occupancy site(vertex_id v) const { return occupancy_[v]; }
    const std::vector<occupancy>& sites() const { return occupancy_; }

    std::size_t count(occupancy kind) const {
        std::size_t c = 0;
        for (auto o : occupancy_)
            if (o == kind) ++c;
        return c;
    }

    /// Total event rate currently active.
    double total_rate() const { return tree_.total(); }

    /// Advances the dynamics until the horizon or the event cap. Returns
    /// false when the cap fired first (partial trajectory).
    bool run(double horizon, std::uint64_t max_events, counter_rng& rng,
             std::uint64_t audit_interval = 10000) {
        while (true) {
            const double total = tree_.total();
            if (total <= 0.0) {
                clock_ = horizon;
                return true;
            }
            const double u = rng.next_unit();
            const double wait = -std::log1p(-u) / total;
            if (clock_ + wait > horizon) {
                clock_ = horizon;
                return true;
            }
            if (event_count_ >= max_events) return false;
            clock_ += wait;
            const auto site_index = tree_.find(rng.next_unit() * total);
            apply_event(static_cast<vertex_id>(site_index), rng);
            ++event_count_;
            if (audit_interval > 0 && event_count_ % audit_interval == 0) audit_caches();
        }
    }

    /// Recomputes every neighbor count from the occupancy and compares with
    /// the caches; throws if any cached rate drifted.
    void audit_caches() const {
        for (vertex_id v = 0; v < graph_->vertex_count(); ++v) {
            std::uint32_t red = 0, blue = 0;
            for (vertex_id w : graph_->neighbors(v)) {
                if (occupancy_[w] == occupancy::red) ++red;
                if (occupancy_[w] == occupancy::blue) ++blue;
            }
            if (red != red_neighbors_[v] || blue != blue_neighbors_[v])
                throw error("competition: neighbor-count cache mismatch");
            if (rates_[v] != rate_for(v))
                throw error("competition: rate cache mismatch");
        }
    }

   private:
    double rate_for(vertex_id v) const {
        switch (occupancy_[v]) {
            case occupancy::empty:
                return static_cast<double>(red_neighbors_[v] + blue_neighbors_[v]);
            case occupancy::red:
                return static_cast<double>(blue_neighbors_[v]);
            case occupancy::blue:
                return static_cast<double>(red_neighbors_[v]);
        }
        return 0.0;
    }

    void set_rate(vertex_id v) {
        const double fresh = rate_for(v);
        if (fresh != rates_[v]) {
            tree_.add(v, fresh - rates_[v]);
            rates_[v] = fresh;
        }
    }

    void apply_event(vertex_id v, counter_rng& rng) {
        occupancy next;
        if (occupancy_[v] == occupancy::empty) {
            const auto red = red_neighbors_[v];
            const auto blue = blue_neighbors_[v];
            const double p_red = static_cast<double>(red) / (red + blue);
            next = rng.next_unit() < p_red ? occupancy::red : occupancy::blue;
        } else {
            next = occupancy_[v] == occupancy::red ? occupancy::blue : occupancy::red;
        }
        const occupancy prev = occupancy_[v];
        occupancy_[v] = next;
        set_rate(v);
        for (vertex_id w : graph_->neighbors(v)) {
            if (prev == occupancy::red) --red_neighbors_[w];
            if (prev == occupancy::blue) --blue_neighbors_[w];
            if (next == occupancy::red) ++red_neighbors_[w];
            if (next == occupancy::blue) ++blue_neighbors_[w];
            set_rate(w);
        }
    }

    void rebuild_caches() {
        for (vertex_id v = 0; v < graph_->vertex_count(); ++v) {
            std::uint32_t red = 0, blue = 0;
            for (vertex_id w : graph_->neighbors(v)) {
                if (occupancy_[w] == occupancy::red) ++red;
                if (occupancy_[w] == occupancy::blue) ++blue;
            }
            red_neighbors_[v] = red;
            blue_neighbors_[v] = blue;
        }
        for (vertex_id v = 0; v < graph_->vertex_count(); ++v) {
            const double fresh = rate_for(v);
            tree_.add(v, fresh - rates_[v]);
            rates_[v] = fresh;
        }
    }

    const geo_graph* graph_;
    std::vector<occupancy> occupancy_;
    std::vector<std::uint32_t> red_neighbors_;
    std::vector<std::uint32_t> blue_neighbors_;
    std::vector<double> rates_;
    detail::rate_tree tree_;
    double clock_ = 0.0;
    std::uint64_t event_count_ = 0;
};

/// One snapshot per checkpoint time: the clock value and the occupancy map.
struct trajectory_snapshot {
    double time = 0.0;
    std::vector<occupancy> sites;
};

struct competition_run_result {
    bool completed = true;  // false when the event cap fired
    std::vector<trajectory_snapshot> snapshots;
    std::size_t red_count = 0;
    std::size_t blue_count = 0;
};

inline competition_run_result run_competition(competition_state& state, double horizon,
                                              std::uint64_t max_events, std::uint64_t seed,
                                              const std::vector<double>& checkpoints = {}) {
    counter_rng rng(derive_stream(seed, "competition", 0));
    competition_run_result result;
    double last = 0.0;
    for (double cp : checkpoints) {
        if (cp < last || cp > horizon) throw error("run_competition: bad checkpoint grid");
        last = cp;
        if (!state.run(cp, max_events, rng)) {
            result.completed = false;
            break;
        }
        result.snapshots.push_back({state.clock(), state.sites()});
    }
    if (result.completed) result.completed = state.run(horizon, max_events, rng);
    result.red_count = state.count(occupancy::red);
    result.blue_count = state.count(occupancy::blue);
    return result;
}

/// Fraction of replicas in which both species are alive at the horizon
/// (finite-horizon stand-in for coexistence), with a 95% Wilson interval.
struct coexistence_estimate {
    double probability = 0.0;
    interval ci;
    std::size_t replicas = 0;
    std::size_t red_extinct = 0;
    std::size_t blue_extinct = 0;
};

inline coexistence_estimate estimate_coexistence(const sim_config& config,
                                                 const std::vector<std::vector<double>>& red_sites,
                                                 const std::vector<std::vector<double>>& blue_sites,
                                                 double horizon, std::size_t replicas,
                                                 std::size_t workers = 0,
                                                 std::uint64_t max_events = 100'000'000) {
    if (replicas < 100) throw error("estimate_coexistence: need >= 100 replicas");
    std::vector<std::uint8_t> both_alive(replicas, 0);
    std::vector<std::uint8_t> red_dead(replicas, 0);
    std::vector<std::uint8_t> blue_dead(replicas, 0);
    for_each_replica(replicas, workers, [&](std::size_t rep) {
        const geo_graph graph = build_replica_graph(config, rep);
        competition_state state(graph, red_sites, blue_sites, overlap_rule::red_wins);
        const auto run = run_competition(state, horizon, max_events,
                                         derive_stream(config.master_seed, "dynamics", rep));
        if (!run.completed) throw resource_error("estimate_coexistence: event cap reached");
        both_alive[rep] = run.red_count > 0 && run.blue_count > 0 ? 1 : 0;
        red_dead[rep] = run.red_count == 0 ? 1 : 0;
        blue_dead[rep] = run.blue_count == 0 ? 1 : 0;
    });
    coexistence_estimate est;
    est.replicas = replicas;
    std::size_t hits = 0;
    for (std::size_t rep = 0; rep < replicas; ++rep) {
        hits += both_alive[rep];
        est.red_extinct += red_dead[rep];
        est.blue_extinct += blue_dead[rep];
    }
    est.probability = static_cast<double>(hits) / replicas;
    est.ci = wilson_interval(hits, replicas);
    return est;
}

/// Sampled coordinates of a Euclidean ball, used to discretize the initial
/// sets of the competition witness.
inline std::vector<std::vector<double>> ball_probe_points(const std::vector<double>& center,
                                                          double radius, double spacing) {
    const int d = static_cast<int>(center.size());
    std::vector<std::vector<double>> out;
    const auto steps = static_cast<std::int64_t>(std::floor(2.0 * radius / spacing));
    std::vector<std::int64_t> idx(d, 0);
    std::vector<double> p(d);
    while (true) {
        double sq = 0.0;
        for (int k = 0; k < d; ++k) {
            p[k] = center[k] - radius + idx[k] * spacing;
            sq += (p[k] - center[k]) * (p[k] - center[k]);
        }
        if (sq <= radius * radius) out.push_back(p);
        int k = d - 1;
        while (k >= 0 && ++idx[k] > steps) {
            idx[k] = 0;
            --k;
        }
        if (k < 0) break;
    }
    return out;
}

}  // namespace shapelab
