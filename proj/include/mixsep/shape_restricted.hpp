#pragma once

#include <span>
#include <vector>

namespace mixsep {

/// Values with strictly positive weights, the input of a weighted isotonic fit.
struct WeightedVector {
    std::vector<double> values;
    std::vector<double> weights;

    /// Unit weights for every value.
    static WeightedVector unit(std::vector<double> values);

    /// Throws std::invalid_argument on empty input, length mismatch,
    /// non-positive weights or non-finite values.
    void validate() const;
};

/// Weighted least-squares projection onto non-decreasing sequences
/// (pool-adjacent-violators, single pass with back-merging).
std::vector<double> isotonic_regression(std::span<const double> values,
                                        std::span<const double> weights);
std::vector<double> isotonic_regression(const WeightedVector& v);

/// Element-wise min(max(x, 0), 1).
std::vector<double> clip_unit(std::span<const double> seq);

/// A concave piecewise-linear function given by its knots. Between knots the
/// function is the linear interpolant; outside [front, back] it is extended
/// by its end values.
class PiecewiseLinearConcaveFn {
public:
    PiecewiseLinearConcaveFn(std::vector<double> knots, std::vector<double> values);

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }

    /// Slope of segment i, i.e. between knots i and i+1.
    std::vector<double> slopes() const;

    double operator()(double x) const;

private:
    std::vector<double> knots_;
    std::vector<double> values_;
};

/// Smallest concave function lying above the points (knots[i], values[i]).
/// Knots must be strictly increasing; tied x-coordinates are rejected.
PiecewiseLinearConcaveFn least_concave_majorant(std::span<const double> knots,
                                                std::span<const double> values);

/// Slope of the segment immediately left of x. Requires front < x <= back.
double left_derivative(const PiecewiseLinearConcaveFn& f, double x);

}  // namespace mixsep
