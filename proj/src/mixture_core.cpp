#include "mixsep/mixture_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mixsep/parallel.hpp"
#include "mixsep/shape_restricted.hpp"

namespace mixsep {

namespace {

void check_gamma(double gamma, bool allow_zero) {
    const bool ok = allow_zero ? (gamma >= 0.0 && gamma <= 1.0) : (gamma > 0.0 && gamma <= 1.0);
    if (!ok)
        throw std::invalid_argument("gamma must lie in " + std::string(allow_zero ? "[0,1]" : "(0,1]") +
                                    ", got " + std::to_string(gamma));
}

}  // namespace

SortedSample::SortedSample(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("empty sample");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("sample contains a non-finite value");
    std::sort(values_.begin(), values_.end());
    const double n = static_cast<double>(values_.size());
    ecdf_.resize(values_.size());
    // Walk backwards so each tied block takes the count at its last index.
    for (std::size_t i = values_.size(); i-- > 0;) {
        if (i + 1 < values_.size() && values_[i] == values_[i + 1])
            ecdf_[i] = ecdf_[i + 1];
        else
            ecdf_[i] = static_cast<double>(i + 1) / n;
    }
}

double SortedSample::ecdf_at(double x) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

StepCdf::StepCdf(std::vector<double> jumps, std::vector<double> values)
    : jumps_(std::move(jumps)), values_(std::move(values)) {
    if (jumps_.size() != values_.size())
        throw std::invalid_argument("step cdf jumps and values differ in length");
    for (std::size_t i = 0; i < jumps_.size(); ++i) {
        if (values_[i] < 0.0 || values_[i] > 1.0)
            throw std::invalid_argument("step cdf values must lie in [0,1]");
        if (i > 0 && (!(jumps_[i] > jumps_[i - 1]) || values_[i] < values_[i - 1]))
            throw std::invalid_argument("step cdf must have increasing jumps and non-decreasing values");
    }
}

double StepCdf::operator()(double x) const {
    const auto it = std::upper_bound(jumps_.begin(), jumps_.end(), x);
    if (it == jumps_.begin()) return 0.0;
    return values_[static_cast<std::size_t>(it - jumps_.begin()) - 1];
}

CriterionFunction::CriterionFunction(const SortedSample& sample, const KnownCdf& background)
    : ecdf_(sample.ecdf().begin(), sample.ecdf().end()) {
    background_.reserve(sample.size());
    for (double x : sample.values()) background_.push_back(background.cdf(x));
}

std::vector<double> CriterionFunction::naive_values(double gamma) const {
    check_gamma(gamma, false);
    std::vector<double> v(ecdf_.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = (ecdf_[i] - (1.0 - gamma) * background_[i]) / gamma;
    return v;
}

std::vector<double> CriterionFunction::isotonized_values(double gamma) const {
    const std::vector<double> v = naive_values(gamma);
    const std::vector<double> w(v.size(), 1.0);
    return clip_unit(isotonic_regression(v, w));
}

double CriterionFunction::operator()(double gamma) const {
    check_gamma(gamma, true);
    const double n = static_cast<double>(ecdf_.size());
    double sum = 0.0;
    if (gamma == 0.0) {
        for (std::size_t i = 0; i < ecdf_.size(); ++i) {
            const double d = ecdf_[i] - background_[i];
            sum += d * d;
        }
        return std::sqrt(sum / n);
    }
    const std::vector<double> v = naive_values(gamma);
    const std::vector<double> w(v.size(), 1.0);
    const std::vector<double> fit = isotonic_regression(v, w);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - std::clamp(fit[i], 0.0, 1.0);
        sum += d * d;
    }
    return gamma * std::sqrt(sum / n);
}

std::vector<double> naive_component_values(const SortedSample& s, const KnownCdf& fb, double gamma) {
    check_gamma(gamma, false);
    return CriterionFunction(s, fb).naive_values(gamma);
}

StepCdf isotonized_cdf(const SortedSample& s, const KnownCdf& fb, double gamma) {
    check_gamma(gamma, false);
    const std::vector<double> fitted = CriterionFunction(s, fb).isotonized_values(gamma);
    const auto x = s.values();
    std::vector<double> jumps, values;
    for (std::size_t i = 0; i < x.size(); ++i) {
        // Ties: keep the value at the last index of each block.
        if (i + 1 < x.size() && x[i] == x[i + 1]) continue;
        jumps.push_back(x[i]);
        values.push_back(fitted[i]);
    }
    // The fit within a tied block is constant only up to rounding; enforce monotonicity.
    for (std::size_t i = 1; i < values.size(); ++i) values[i] = std::max(values[i], values[i - 1]);
    return StepCdf(std::move(jumps), std::move(values));
}

double criterion(const SortedSample& s, const KnownCdf& fb, double gamma) {
    check_gamma(gamma, true);
    return CriterionFunction(s, fb)(gamma);
}

CriterionCurve criterion_curve(const CriterionFunction& crit, std::size_t grid_size, unsigned threads) {
    if (grid_size < 10) throw std::invalid_argument("criterion curve needs a grid of at least 10 points");
    CriterionCurve curve;
    curve.gammas.resize(grid_size);
    curve.values.resize(grid_size);
    for (std::size_t k = 0; k < grid_size; ++k)
        curve.gammas[k] = static_cast<double>(k + 1) / static_cast<double>(grid_size);
    parallel_for(grid_size, threads, [&](std::size_t k) { curve.values[k] = crit(curve.gammas[k]); });

    const double h = 1.0 / static_cast<double>(grid_size);
    curve.second_differences.resize(grid_size - 2);
    for (std::size_t k = 1; k + 1 < grid_size; ++k)
        curve.second_differences[k - 1] =
            (curve.values[k - 1] - 2.0 * curve.values[k] + curve.values[k + 1]) / (h * h);
    return curve;
}

CriterionCurve criterion_curve(const SortedSample& s, const KnownCdf& fb, std::size_t grid_size,
                               unsigned threads) {
    return criterion_curve(CriterionFunction(s, fb), grid_size, threads);
}

double estimate_alpha_cn(const CriterionFunction& crit, double c_n) {
    if (!(c_n > 0.0)) throw std::invalid_argument("c_n must be positive");
    const double scale = std::sqrt(static_cast<double>(crit.size()));
    auto feasible = [&](double gamma) { return scale * crit(gamma) <= c_n; };
    if (feasible(0.0)) return 0.0;
    double lo = 0.0;  // infeasible
    double hi = 1.0;  // criterion(1) = 0, always feasible
    for (int iter = 0; iter < 60 && hi - lo > 1e-6; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double estimate_alpha_cn(const SortedSample& s, const KnownCdf& fb, double c_n) {
    return estimate_alpha_cn(CriterionFunction(s, fb), c_n);
}

double default_cn(std::size_t n, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("cn undefined: tau must be positive");
    const double ln = std::log(static_cast<double>(n));
    if (!(ln > 1.0)) throw std::invalid_argument("cn undefined: log(log(n)) requires n > e");
    return tau * std::log(ln);
}

ElbowEstimate elbow_estimate(const CriterionCurve& curve) {
    const auto& d2 = curve.second_differences;
    if (curve.gammas.size() < 3 || d2.size() + 2 != curve.gammas.size())
        throw std::invalid_argument("elbow estimate needs a curve with at least 3 grid points");

    std::size_t best = 0;
    for (std::size_t k = 1; k < d2.size(); ++k)
        if (d2[k] > d2[best]) best = k;  // strict: ties stay at the smaller gamma
    if (!(d2[best] > 1e-12)) throw std::domain_error("no elbow detected");

    ElbowEstimate out;
    out.max_second_difference = d2[best];
    out.argmax = curve.gammas[best + 1];
    const double cutoff = 0.95 * d2[best];
    for (std::size_t k = 0; k < d2.size(); ++k) {
        const bool left_ok = k == 0 || d2[k] >= d2[k - 1];
        const bool right_ok = k + 1 == d2.size() || d2[k] >= d2[k + 1];
        if (d2[k] >= cutoff && left_ok && right_ok) out.peaks.push_back(curve.gammas[k + 1]);
    }
    out.alpha = out.peaks.empty() ? out.argmax : std::min(out.argmax, out.peaks.front());
    return out;
}

}  // namespace mixsep
