#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mixsep/distributions.hpp"

namespace mixsep {

/// Observations sorted ascending together with the empirical CDF at each of
/// them. Tied observations share the value at the last index of their block.
class SortedSample {
public:
    /// Sorts the values. Throws std::invalid_argument when empty or non-finite.
    explicit SortedSample(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<const double> ecdf() const { return ecdf_; }

    /// Empirical CDF at an arbitrary point.
    double ecdf_at(double x) const;

private:
    std::vector<double> values_;
    std::vector<double> ecdf_;
};

/// Right-continuous step CDF: 0 before the first jump, values[i] on
/// [jumps[i], jumps[i+1]), and the last value after the last jump.
class StepCdf {
public:
    StepCdf(std::vector<double> jumps, std::vector<double> values);

    const std::vector<double>& jumps() const { return jumps_; }
    const std::vector<double>& values() const { return values_; }

    double operator()(double x) const;

private:
    std::vector<double> jumps_;
    std::vector<double> values_;
};

/// The distance gamma * d_n(naive, isotonized) as a function of gamma, with
/// the background CDF evaluated once at the order statistics.
///
/// At gamma = 0 the limit d_n(F_n, F_b) is returned.
class CriterionFunction {
public:
    CriterionFunction(const SortedSample& sample, const KnownCdf& background);

    std::size_t size() const { return ecdf_.size(); }
    std::span<const double> ecdf() const { return ecdf_; }
    std::span<const double> background() const { return background_; }

    /// (F_n - (1 - gamma) F_b) / gamma at the order statistics; 0 < gamma <= 1.
    std::vector<double> naive_values(double gamma) const;
    /// clip_unit(isotonic_regression(naive_values(gamma))).
    std::vector<double> isotonized_values(double gamma) const;

    double operator()(double gamma) const;

private:
    std::vector<double> ecdf_;
    std::vector<double> background_;
};

std::vector<double> naive_component_values(const SortedSample& s, const KnownCdf& fb, double gamma);

/// Least-squares CDF fit to the naive values, placed as a step function with
/// jumps at the distinct order statistics.
StepCdf isotonized_cdf(const SortedSample& s, const KnownCdf& fb, double gamma);

double criterion(const SortedSample& s, const KnownCdf& fb, double gamma);

struct CriterionCurve {
    std::vector<double> gammas;  ///< k / grid_size for k = 1..grid_size
    std::vector<double> values;
    /// Central second differences for gammas[1] .. gammas[size-2].
    std::vector<double> second_differences;

    double step() const { return gammas.size() > 1 ? gammas[1] - gammas[0] : 0.0; }
};

CriterionCurve criterion_curve(const CriterionFunction& crit, std::size_t grid_size = 200,
                               unsigned threads = 1);
CriterionCurve criterion_curve(const SortedSample& s, const KnownCdf& fb,
                               std::size_t grid_size = 200, unsigned threads = 1);

/// Smallest gamma with sqrt(n) * criterion(gamma) <= c_n, found by bisection
/// (the feasible set is an interval ending at 1). Returns 0 when gamma = 0 is
/// already feasible.
double estimate_alpha_cn(const CriterionFunction& crit, double c_n);
double estimate_alpha_cn(const SortedSample& s, const KnownCdf& fb, double c_n);

/// tau * log(log(n)). Throws for n <= e or tau <= 0 ("cn undefined").
double default_cn(std::size_t n, double tau = 0.1);

struct ElbowEstimate {
    double alpha = 0.0;               ///< smallest gamma among the near-maximal peaks
    double argmax = 0.0;              ///< gamma of the largest second difference
    double max_second_difference = 0.0;
    /// Local maxima of the second differences within 5% of the largest one,
    /// in increasing gamma.
    std::vector<double> peaks;
};

/// Point of maximum curvature of the criterion curve. Throws
/// std::domain_error("no elbow detected") on a flat curve.
ElbowEstimate elbow_estimate(const CriterionCurve& curve);

}  // namespace mixsep
