#pragma once

#include <cmath>
#include <string>

#include "shapelab/common.hpp"
#include "shapelab/rng.hpp"

namespace shapelab {

/// Edge-weight law for passage times. All four variants have closed-form
/// inverse CDFs, so one uniform draw yields one weight.
struct weight_distribution {
    enum class kind { exponential, bernoulli_zero_one, deterministic, uniform };

    kind variant = kind::exponential;
    double param_a = 1.0;  // rate | p_zero | constant | lower bound
    double param_b = 0.0;  // upper bound (uniform only)

    static weight_distribution exponential(double rate) {
        if (!(rate > 0.0)) throw error("exponential: rate must be > 0");
        return {kind::exponential, rate, 0.0};
    }
    static weight_distribution bernoulli_zero_one(double p_zero) {
        if (!(p_zero >= 0.0 && p_zero <= 1.0)) throw error("bernoulli: p_zero must be in [0,1]");
        return {kind::bernoulli_zero_one, p_zero, 0.0};
    }
    static weight_distribution deterministic(double c) {
        if (!(c >= 0.0)) throw error("deterministic: value must be >= 0");
        return {kind::deterministic, c, 0.0};
    }
    static weight_distribution uniform(double a, double b) {
        if (!(a >= 0.0 && a < b)) throw error("uniform: need 0 <= a < b");
        return {kind::uniform, a, b};
    }

    double sample(double u) const {
        switch (variant) {
            case kind::exponential:
                return -std::log1p(-u) / param_a;
            case kind::bernoulli_zero_one:
                return u < param_a ? 0.0 : 1.0;
            case kind::deterministic:
                return param_a;
            case kind::uniform:
                return param_a + (param_b - param_a) * u;
        }
        throw error("weight_distribution: bad variant");
    }

    double sample(counter_rng& rng) const { return sample(rng.next_unit()); }

    double prob_zero() const {
        switch (variant) {
            case kind::exponential:
                return 0.0;
            case kind::bernoulli_zero_one:
                return param_a;
            case kind::deterministic:
                return param_a == 0.0 ? 1.0 : 0.0;
            case kind::uniform:
                return 0.0;  // a < b and the law is continuous
        }
        throw error("weight_distribution: bad variant");
    }

    double mean() const {
        switch (variant) {
            case kind::exponential:
                return 1.0 / param_a;
            case kind::bernoulli_zero_one:
                return 1.0 - param_a;
            case kind::deterministic:
                return param_a;
            case kind::uniform:
                return 0.5 * (param_a + param_b);
        }
        throw error("weight_distribution: bad variant");
    }

    std::string name() const {
        switch (variant) {
            case kind::exponential:
                return "exponential(" + std::to_string(param_a) + ")";
            case kind::bernoulli_zero_one:
                return "bernoulli01(" + std::to_string(param_a) + ")";
            case kind::deterministic:
                return "deterministic(" + std::to_string(param_a) + ")";
            case kind::uniform:
                return "uniform(" + std::to_string(param_a) + "," + std::to_string(param_b) + ")";
        }
        throw error("weight_distribution: bad variant");
    }
};

/// Hypothesis flags for the shape and deviation statements, computed from
/// the law and the graph parameters, never asserted by callers.
struct condition_flags {
    bool zero_mass_subcritical = false;  // P(w = 0) < 1 / (v_d r^d lambda)
    bool zero_mass_absent = false;       // P(w = 0) = 0
    bool exponential_moment = false;     // E[exp(eta w)] finite for some eta > 0
};

inline condition_flags evaluate_conditions(const weight_distribution& dist, int d, double r,
                                           double lambda) {
    condition_flags f;
    const double zero_threshold = 1.0 / (unit_ball_volume(d) * std::pow(r, d) * lambda);
    f.zero_mass_subcritical = dist.prob_zero() < zero_threshold;
    f.zero_mass_absent = dist.prob_zero() == 0.0;
    // Exponential: finite moment for eta < rate; the three other laws
    // are bounded, so every exponential moment is finite.
    f.exponential_moment = true;
    return f;
}

}  // namespace shapelab
