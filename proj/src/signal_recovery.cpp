#include "mixsep/signal_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mixsep {

StepDensity::StepDensity(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.size() < 2 || values_.size() + 1 != knots_.size())
        throw std::invalid_argument("step density needs k+1 knots for k values, k >= 1");
}

double StepDensity::operator()(double x) const {
    if (x > knots_.back()) return 0.0;
    if (x <= knots_[1]) return values_.front();
    const auto it = std::lower_bound(knots_.begin(), knots_.end(), x);
    return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepDensity::total_mass() const {
    double total = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) total += values_[i] * (knots_[i + 1] - knots_[i]);
    return total;
}

StepCdf estimate_fs(const SortedSample& s, const KnownCdf& fb, double alpha) {
    if (alpha == 0.0) throw std::invalid_argument("signal proportion zero");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
    return isotonized_cdf(s, fb, alpha);
}

PiecewiseLinearConcaveFn concavify(const StepCdf& fs_step) {
    const auto& jumps = fs_step.jumps();
    const auto& values = fs_step.values();
    if (jumps.empty()) throw std::invalid_argument("cannot concavify an empty step function");
    if (jumps.front() < 0.0)
        throw std::invalid_argument("concavification requires non-negative support");

    std::vector<double> kx, ky;
    kx.reserve(jumps.size() + 1);
    ky.reserve(jumps.size() + 1);
    if (jumps.front() > 0.0) {
        kx.push_back(0.0);
        ky.push_back(0.0);
    }
    kx.insert(kx.end(), jumps.begin(), jumps.end());
    ky.insert(ky.end(), values.begin(), values.end());
    return least_concave_majorant(kx, ky);
}

StepDensity density_estimate(const PiecewiseLinearConcaveFn& f) {
    if (f.knots().size() < 2) throw std::invalid_argument("density of a single-point majorant is undefined");
    std::vector<double> slopes = f.slopes();
    for (double& s : slopes) s = std::max(s, 0.0);
    return StepDensity(f.knots(), std::move(slopes));
}

LfdrCurve lfdr(std::span<const double> points, double alpha, const StepDensity& dens, const KnownCdf& fb) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0,1)");
    if (!fb.has_density()) throw std::invalid_argument("lfdr needs a background with a density");
    LfdrCurve out;
    out.points.assign(points.begin(), points.end());
    out.values.reserve(points.size());
    for (double x : points) {
        const double null_part = (1.0 - alpha) * fb.density(x);
        const double total = alpha * dens(x) + null_part;
        out.values.push_back(total > 0.0 ? std::clamp(null_part / total, 0.0, 1.0) : 1.0);
    }
    return out;
}

SignalEstimate recover_signal(const SortedSample& s, const KnownCdf& fb, double alpha) {
    StepCdf step = estimate_fs(s, fb, alpha);
    PiecewiseLinearConcaveFn concave = concavify(step);
    StepDensity dens = density_estimate(concave);
    return SignalEstimate{alpha, std::move(step), std::move(concave), std::move(dens)};
}

NormalFit fit_closest_normal(const StepCdf& fs_step, const SortedSample& s) {
    const auto x = s.values();
    std::vector<double> target(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) target[i] = fs_step(x[i]);

    auto loss = [&](double mean, double sd) {
        double sum = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = target[i] - 0.5 * std::erfc(-(x[i] - mean) / (sd * std::sqrt(2.0)));
            sum += d * d;
        }
        return sum / static_cast<double>(x.size());
    };

    const double lo = x.front();
    const double hi = x.back();
    const double span = std::max(hi - lo, 1e-8);
    NormalFit best{lo, span, loss(lo, span)};
    for (int i = 0; i <= 40; ++i) {
        const double mean = lo + span * i / 40.0;
        for (int j = 0; j <= 30; ++j) {
            const double sd = span * std::pow(10.0, -2.5 + 2.5 * j / 30.0);
            const double l = loss(mean, sd);
            if (l < best.distance) best = {mean, sd, l};
        }
    }

    double step_mean = span / 40.0;
    double step_log_sd = std::log(10.0) * 2.5 / 30.0;
    while (step_mean > 1e-9 * span) {
        bool improved = false;
        for (int dm = -1; dm <= 1; ++dm)
            for (int ds = -1; ds <= 1; ++ds) {
                if (dm == 0 && ds == 0) continue;
                const double mean = best.mean + dm * step_mean;
                const double sd = best.sd * std::exp(ds * step_log_sd);
                const double l = loss(mean, sd);
                if (l < best.distance) {
                    best = {mean, sd, l};
                    improved = true;
                }
            }
        if (!improved) {
            step_mean *= 0.5;
            step_log_sd *= 0.5;
        }
    }
    best.distance = std::sqrt(best.distance);
    return best;
}

}  // namespace mixsep
