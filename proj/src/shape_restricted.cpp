#include "mixsep/shape_restricted.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mixsep {

namespace {

struct Block {
    double weighted_sum;
    double weight;
    std::size_t count;

    double mean() const { return weighted_sum / weight; }
};

}  // namespace

WeightedVector WeightedVector::unit(std::vector<double> values) {
    WeightedVector v;
    v.weights.assign(values.size(), 1.0);
    v.values = std::move(values);
    return v;
}

void WeightedVector::validate() const {
    if (values.empty()) throw std::invalid_argument("empty sample");
    if (values.size() != weights.size())
        throw std::invalid_argument("values and weights differ in length");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw std::invalid_argument("non-finite value at index " + std::to_string(i));
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
            throw std::invalid_argument("weight at index " + std::to_string(i) +
                                        " is not a positive finite number");
    }
}

std::vector<double> isotonic_regression(std::span<const double> values,
                                        std::span<const double> weights) {
    if (values.empty()) throw std::invalid_argument("empty sample");
    if (values.size() != weights.size())
        throw std::invalid_argument("values and weights differ in length");

    std::vector<Block> blocks;
    blocks.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double w = weights[i];
        if (!(w > 0.0) || !std::isfinite(w))
            throw std::invalid_argument("weight at index " + std::to_string(i) +
                                        " is not a positive finite number");
        if (!std::isfinite(values[i]))
            throw std::invalid_argument("non-finite value at index " + std::to_string(i));
        blocks.push_back({w * values[i], w, 1});
        // Pool backwards while the last two blocks violate monotonicity.
        while (blocks.size() > 1) {
            const Block& last = blocks.back();
            Block& prev = blocks[blocks.size() - 2];
            if (prev.mean() <= last.mean()) break;
            prev.weighted_sum += last.weighted_sum;
            prev.weight += last.weight;
            prev.count += last.count;
            blocks.pop_back();
        }
    }

    std::vector<double> fitted;
    fitted.reserve(values.size());
    for (const Block& b : blocks) fitted.insert(fitted.end(), b.count, b.mean());
    return fitted;
}

std::vector<double> isotonic_regression(const WeightedVector& v) {
    v.validate();
    return isotonic_regression(v.values, v.weights);
}

std::vector<double> clip_unit(std::span<const double> seq) {
    std::vector<double> out(seq.size());
    std::transform(seq.begin(), seq.end(), out.begin(),
                   [](double x) { return std::clamp(x, 0.0, 1.0); });
    return out;
}

PiecewiseLinearConcaveFn::PiecewiseLinearConcaveFn(std::vector<double> knots,
                                                   std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.empty()) throw std::invalid_argument("concave function needs at least one knot");
    if (knots_.size() != values_.size())
        throw std::invalid_argument("knots and values differ in length");
    for (std::size_t i = 1; i < knots_.size(); ++i)
        if (!(knots_[i] > knots_[i - 1]))
            throw std::invalid_argument("knots must be strictly increasing");
}

std::vector<double> PiecewiseLinearConcaveFn::slopes() const {
    std::vector<double> s;
    if (knots_.size() < 2) return s;
    s.reserve(knots_.size() - 1);
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
        s.push_back((values_[i + 1] - values_[i]) / (knots_[i + 1] - knots_[i]));
    return s;
}

double PiecewiseLinearConcaveFn::operator()(double x) const {
    if (x <= knots_.front()) return values_.front();
    if (x >= knots_.back()) return values_.back();
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - knots_.begin());
    const std::size_t lo = hi - 1;
    const double t = (x - knots_[lo]) / (knots_[hi] - knots_[lo]);
    return values_[lo] + t * (values_[hi] - values_[lo]);
}

PiecewiseLinearConcaveFn least_concave_majorant(std::span<const double> knots,
                                                std::span<const double> values) {
    if (knots.size() != values.size())
        throw std::invalid_argument("knots and values differ in length");
    if (knots.empty()) throw std::invalid_argument("concave majorant of an empty point set");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i] > knots[i - 1]))
            throw std::invalid_argument(
                "least concave majorant requires strictly increasing knots (collapse ties first)");

    // Upper hull by a monotone-chain scan: a point is dropped when it lies on
    // or below the chord joining its neighbours.
    std::vector<std::size_t> hull;
    hull.reserve(knots.size());
    for (std::size_t i = 0; i < knots.size(); ++i) {
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2];
            const std::size_t b = hull.back();
            const double cross = (knots[b] - knots[a]) * (values[i] - values[a]) -
                                 (values[b] - values[a]) * (knots[i] - knots[a]);
            if (cross < 0.0) break;
            hull.pop_back();
        }
        hull.push_back(i);
    }

    std::vector<double> hx, hy;
    hx.reserve(hull.size());
    hy.reserve(hull.size());
    for (std::size_t i : hull) {
        hx.push_back(knots[i]);
        hy.push_back(values[i]);
    }
    return PiecewiseLinearConcaveFn(std::move(hx), std::move(hy));
}

double left_derivative(const PiecewiseLinearConcaveFn& f, double x) {
    const auto& k = f.knots();
    if (!(x > k.front()) || x > k.back())
        throw std::out_of_range("left derivative requested outside (first knot, last knot]");
    // First knot >= x; the segment ending there is the one left of x.
    const auto it = std::lower_bound(k.begin(), k.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - k.begin());
    const std::size_t lo = hi - 1;
    return (f.values()[hi] - f.values()[lo]) / (k[hi] - k[lo]);
}

}  // namespace mixsep
