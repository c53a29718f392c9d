#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "shapelab/common.hpp"

namespace shapelab {

struct sample_summary {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased, 0 when count < 2
    double std_error = 0.0;
};

inline sample_summary summarize(std::span<const double> xs) {
    sample_summary s;
    s.count = xs.size();
    if (s.count == 0) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(s.count);
    if (s.count >= 2) {
        double ss = 0.0;
        for (double x : xs) {
            const double d = x - s.mean;
            ss += d * d;
        }
        s.variance = ss / static_cast<double>(s.count - 1);
        s.std_error = std::sqrt(s.variance / static_cast<double>(s.count));
    }
    return s;
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw error("median: empty sample");
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    double hi = xs[mid];
    if (xs.size() % 2 == 1) return hi;
    std::nth_element(xs.begin(), xs.begin() + mid - 1, xs.begin() + mid);
    return 0.5 * (hi + xs[mid - 1]);
}

struct interval {
    double low = 0.0;
    double high = 0.0;
    double width() const { return high - low; }
};

/// Wilson score interval for a binomial proportion (default 95%).
inline interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
    // The bound is exact at the boundary counts; rounding must not blur it.
    if (successes == 0) ci.low = 0.0;
    if (successes == trials) ci.high = 1.0;
    return ci;
}

struct linear_fit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_std_error = 0.0;
};

/// Ordinary least squares y = a + b x.
inline linear_fit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw error("fit_line: need >= 2 paired points");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw error("fit_line: degenerate abscissae");
    linear_fit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (n > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - (f.intercept + f.slope * x[i]);
            rss += r * r;
        }
        f.slope_std_error = std::sqrt(rss / ((n - 2) * sxx));
    }
    return f;
}

/// Least squares through the origin, y = b x. When every y[i] >= c * x[i]
/// with x > 0, the fitted slope is >= c, which the structure estimates rely on.
inline linear_fit fit_line_through_origin(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 1 || y.size() != n) throw error("fit_line_through_origin: need paired points");
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    if (sxx == 0.0) throw error("fit_line_through_origin: degenerate abscissae");
    linear_fit f;
    f.slope = sxy / sxx;
    if (n > 1) {
        double rss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - f.slope * x[i];
            rss += r * r;
        }
        f.slope_std_error = std::sqrt(rss / ((n - 1) * sxx));
    }
    return f;
}

/// One-sample Kolmogorov-Smirnov statistic against U[0,1].
inline double ks_statistic_uniform(std::vector<double> xs) {
    if (xs.empty()) throw error("ks_statistic_uniform: empty sample");
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double cdf = xs[i];
        d = std::max(d, std::abs((i + 1) / n - cdf));
        d = std::max(d, std::abs(cdf - i / n));
    }
    return d;
}

namespace detail {

// Regularized lower incomplete gamma P(a, x); series for x < a+1,
// continued fraction otherwise (standard Lentz method).
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw error("gamma_p: domain");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - lg) * h;
}

}  // namespace detail

/// Upper tail p-value of a chi-square statistic with df degrees of freedom.
inline double chi_square_pvalue(double statistic, double df) {
    if (statistic <= 0.0) return 1.0;
    return 1.0 - detail::gamma_p(df / 2.0, statistic / 2.0);
}

inline double poisson_pmf(std::uint64_t k, double mu) {
    return std::exp(-mu + k * std::log(mu) - std::lgamma(static_cast<double>(k) + 1.0));
}

/// Chi-square goodness-of-fit of observed counts against Poisson(mu).
/// Cells are pooled left to right until each holds expected mass >= 5;
/// the mass below the smallest and above the largest observation is
/// folded into the first and last cells.
inline double poisson_gof_pvalue(const std::vector<std::uint64_t>& observations, double mu) {
    if (observations.empty()) throw error("poisson_gof_pvalue: empty sample");
    std::map<std::uint64_t, std::size_t> histogram;
    for (auto k : observations) ++histogram[k];
    const double n = static_cast<double>(observations.size());

    const std::uint64_t k_min = histogram.begin()->first;
    const std::uint64_t k_max = histogram.rbegin()->first;
    double mass_below = 0.0;
    for (std::uint64_t k = 0; k < k_min; ++k) mass_below += poisson_pmf(k, mu);
    double mass_in = 0.0;

    std::vector<double> expected;
    std::vector<double> observed;
    double exp_acc = n * mass_below;
    double obs_acc = 0.0;
    for (std::uint64_t k = k_min; k <= k_max; ++k) {
        const double pk = poisson_pmf(k, mu);
        mass_in += pk;
        exp_acc += n * pk;
        auto it = histogram.find(k);
        obs_acc += it == histogram.end() ? 0.0 : static_cast<double>(it->second);
        if (exp_acc >= 5.0) {
            expected.push_back(exp_acc);
            observed.push_back(obs_acc);
            exp_acc = obs_acc = 0.0;
        }
    }
    exp_acc += n * std::max(1.0 - mass_below - mass_in, 0.0);
    if (expected.empty()) {
        expected.push_back(std::max(exp_acc, 1e-12));
        observed.push_back(obs_acc);
    } else {
        expected.back() += exp_acc;
        observed.back() += obs_acc;
    }
    if (expected.size() < 2) return 1.0;
    double stat = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const double d = observed[i] - expected[i];
        stat += d * d / expected[i];
    }
    return chi_square_pvalue(stat, static_cast<double>(expected.size() - 1));
}

}  // namespace shapelab
