#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

/// theta_i = max_{j <= i} min_{k >= i} weighted mean of v_j..v_k.
inline std::vector<double> isotonic_maxmin(std::span<const double> v, std::span<const double> w) {
    const std::size_t n = v.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double best = -INFINITY;
        for (std::size_t j = 0; j <= i; ++j) {
            double inner = INFINITY;
            double sv = 0.0, sw = 0.0;
            for (std::size_t k = j; k < n; ++k) {
                sv += w[k] * v[k];
                sw += w[k];
                if (k >= i) inner = std::min(inner, sv / sw);
            }
            best = std::max(best, inner);
        }
        out[i] = best;
    }
    return out;
}

/// Least concave majorant at each knot: max over chords j <= i <= k.
inline std::vector<double> concave_majorant_at_knots(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    std::vector<double> out(y.begin(), y.end());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            for (std::size_t k = i; k < n; ++k) {
                if (j == k) continue;
                const double t = (x[i] - x[j]) / (x[k] - x[j]);
                out[i] = std::max(out[i], y[j] + t * (y[k] - y[j]));
            }
    return out;
}

/// Generalized inverse of a continuous CDF by bisection on [lo, hi].
inline double quantile_bisect(const std::function<double(double)>& cdf, double p, double lo, double hi) {
    for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Composite Simpson rule with `panels` (even) subintervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

inline double normal_cdf(double x, double mean = 0.0, double sd = 1.0) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

inline double normal_pdf(double x, double mean = 0.0, double sd = 1.0) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

/// Asymptotic 1% critical value of sqrt(n) * KS is about 1.63.
inline double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

/// gamma * d_n(naive, isotonized) recomputed from scratch with the max-min
/// isotonic formula, for sorted distinct xs.
inline double criterion_bruteforce(std::span<const double> sorted_x, const std::function<double(double)>& fb,
                                   double gamma) {
    const std::size_t n = sorted_x.size();
    std::vector<double> v(n), w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double fn = static_cast<double>(i + 1) / n;
        v[i] = gamma == 0.0 ? fn - fb(sorted_x[i]) : (fn - (1.0 - gamma) * fb(sorted_x[i])) / gamma;
    }
    if (gamma == 0.0) {
        double s = 0.0;
        for (double d : v) s += d * d;
        return std::sqrt(s / n);
    }
    auto theta = isotonic_maxmin(v, w);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = std::clamp(theta[i], 0.0, 1.0);
        s += (v[i] - t) * (v[i] - t);
    }
    return gamma * std::sqrt(s / n);
}

}  // namespace oracle
