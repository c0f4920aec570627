#pragma once

#include <span>
#include <vector>

#include "mixsep/distributions.hpp"
#include "mixsep/mixture_core.hpp"
#include "mixsep/shape_restricted.hpp"

namespace mixsep {

/// Non-increasing piecewise-constant density. values[i] holds on
/// (knots[i], knots[i+1]]; left of knots[1] the first value applies and past
/// the last knot the density is 0.
class StepDensity {
public:
    StepDensity(std::vector<double> knots, std::vector<double> values);

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }

    double operator()(double x) const;
    /// Integral over [knots.front(), knots.back()].
    double total_mass() const;

private:
    std::vector<double> knots_;
    std::vector<double> values_;
};

struct SignalEstimate {
    double alpha_used = 0.0;
    StepCdf fs_step;
    PiecewiseLinearConcaveFn fs_concave;
    StepDensity density;
};

struct LfdrCurve {
    std::vector<double> points;
    std::vector<double> values;
};

/// Isotonized estimate of the unknown component at a plugged-in proportion.
/// Throws for alpha = 0 ("signal proportion zero").
StepCdf estimate_fs(const SortedSample& s, const KnownCdf& fb, double alpha);

/// Least concave majorant of a step CDF supported on [0, inf), anchored at (0, 0).
PiecewiseLinearConcaveFn concavify(const StepCdf& fs_step);

/// Left derivative of a concave CDF majorant (Grenander-type density).
StepDensity density_estimate(const PiecewiseLinearConcaveFn& f);

/// Estimated local false discovery rate
/// (1 - alpha) f_b / (alpha f_s + (1 - alpha) f_b) at each point.
LfdrCurve lfdr(std::span<const double> points, double alpha, const StepDensity& dens,
               const KnownCdf& fb);

/// estimate_fs + concavify + density_estimate in one go.
SignalEstimate recover_signal(const SortedSample& s, const KnownCdf& fb, double alpha);

struct NormalFit {
    double mean = 0.0;
    double sd = 1.0;
    double distance = 0.0;  ///< L2(F_n) distance to the step estimate
};

/// Normal CDF closest to a step estimate in L2 over the sample points.
/// Coarse grid followed by pattern-search refinement; a convenience for
/// summarising the recovered component, not part of the estimation method.
NormalFit fit_closest_normal(const StepCdf& fs_step, const SortedSample& s);

}  // namespace mixsep
