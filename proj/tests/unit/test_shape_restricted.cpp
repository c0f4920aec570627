#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "../support/generators.hpp"
#include "../support/oracles.hpp"
#include "mixsep/shape_restricted.hpp"

using namespace mixsep;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

TEST_CASE("isotonic regression examples") {
    CHECK(isotonic_regression(WeightedVector::unit({0.1, 0.4, 0.9})) == std::vector<double>{0.1, 0.4, 0.9});

    const std::vector<double> v1{0.5, 0.2, 0.8}, w1{1, 1, 1};
    const auto r1 = isotonic_regression(v1, w1);
    CHECK(max_abs_diff(r1, oracle::isotonic_maxmin(v1, w1)) < 1e-15);
    CHECK(max_abs_diff(r1, {0.35, 0.35, 0.8}) < 1e-15);

    const std::vector<double> v2{3, 2, 1}, w2{1, 1, 1};
    CHECK(max_abs_diff(isotonic_regression(v2, w2), oracle::isotonic_maxmin(v2, w2)) < 1e-15);
    CHECK(max_abs_diff(isotonic_regression(v2, w2), {2, 2, 2}) < 1e-15);
}

TEST_CASE("isotonic regression rejects invalid input") {
    CHECK_THROWS_WITH_AS(isotonic_regression(WeightedVector{}), "empty sample", std::invalid_argument);
    const std::vector<double> v{1, 2}, w{1};
    CHECK_THROWS_AS(isotonic_regression(v, w), std::invalid_argument);
    const std::vector<double> w0{1, 0};
    CHECK_THROWS_AS(isotonic_regression(v, w0), std::invalid_argument);
    const std::vector<double> vn{1, NAN}, w2{1, 1};
    CHECK_THROWS_AS(isotonic_regression(vn, w2), std::invalid_argument);
}

TEST_CASE("isotonic regression matches the max-min oracle on random weighted vectors") {
    Rng rng(11);
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t n = gen::size(rng, 1, 50);
        const auto v = gen::values(rng, n);
        const auto w = gen::weights(rng, n);
        const auto fit = isotonic_regression(v, w);
        REQUIRE(max_abs_diff(fit, oracle::isotonic_maxmin(v, w)) <= 1e-12);
    }
}

TEST_CASE("isotonic regression properties") {
    Rng rng(12);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = gen::size(rng, 1, 80);
        const auto v = gen::values(rng, n);
        const auto w = gen::weights(rng, n);
        const auto fit = isotonic_regression(v, w);

        for (std::size_t i = 1; i < n; ++i) REQUIRE(fit[i] >= fit[i - 1] - 1e-12);
        // Idempotence.
        REQUIRE(max_abs_diff(isotonic_regression(fit, w), fit) <= 1e-12);
        // Pooling keeps the weighted total.
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            a += w[i] * v[i];
            b += w[i] * fit[i];
        }
        REQUIRE(std::abs(a - b) <= 1e-10 * (1.0 + std::abs(a)));
    }
}

TEST_CASE("clipped isotonic fit beats every feasible competitor") {
    Rng rng(13);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = gen::size(rng, 1, 30);
        const auto v = gen::values(rng, n, -0.5, 1.5);
        const auto w = gen::weights(rng, n);
        const auto proj = clip_unit(isotonic_regression(v, w));
        auto loss = [&](const std::vector<double>& t) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += w[i] * (t[i] - v[i]) * (t[i] - v[i]);
            return s;
        };
        const double best = loss(proj);
        for (int k = 0; k < 20; ++k) {
            auto comp = gen::values(rng, n, 0.0, 1.0);
            std::sort(comp.begin(), comp.end());
            REQUIRE(best <= loss(comp) + 1e-12);
        }
    }
}

TEST_CASE("clip_unit") {
    CHECK(clip_unit(std::vector<double>{-0.2, 0.5, 1.3}) == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(clip_unit(std::vector<double>{0.1, 0.9}) == std::vector<double>{0.1, 0.9});
    CHECK(clip_unit(std::vector<double>{}).empty());
}

TEST_CASE("least concave majorant examples") {
    const std::vector<double> x2{0, 1}, y2{0, 1};
    const auto seg = least_concave_majorant(x2, y2);
    CHECK(seg.knots() == x2);
    CHECK(seg(0.3) == doctest::Approx(0.3));

    const std::vector<double> x{0, 0.5, 1}, low{0, 0.2, 1};
    const auto h1 = least_concave_majorant(x, low);
    CHECK(h1(0.5) == doctest::Approx(oracle::concave_majorant_at_knots(x, low)[1]));
    CHECK(h1(0.5) == doctest::Approx(0.5));
    CHECK(h1.knots().size() == 2);

    const std::vector<double> high{0, 0.8, 1};
    const auto h2 = least_concave_majorant(x, high);
    CHECK(h2.knots().size() == 3);
    CHECK(left_derivative(h2, 0.4) == doctest::Approx(0.8 / 0.5));
    CHECK(left_derivative(h2, 0.5) == doctest::Approx(1.6));  // at a knot: left segment
    CHECK(left_derivative(seg, 0.7) == doctest::Approx(1.0));
}

TEST_CASE("least concave majorant rejects bad input") {
    const std::vector<double> x{0, 1}, y{0};
    CHECK_THROWS_AS(least_concave_majorant(x, y), std::invalid_argument);
    const std::vector<double> tied{0, 0}, y2{0, 1};
    CHECK_THROWS_AS(least_concave_majorant(tied, y2), std::invalid_argument);
    const std::vector<double> none;
    CHECK_THROWS_AS(least_concave_majorant(none, none), std::invalid_argument);
    const auto f = least_concave_majorant(std::vector<double>{0, 1}, std::vector<double>{0, 1});
    CHECK_THROWS_AS(left_derivative(f, 0.0), std::out_of_range);
    CHECK_THROWS_AS(left_derivative(f, 1.5), std::out_of_range);
}

TEST_CASE("least concave majorant matches the chord oracle") {
    Rng rng(14);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = gen::size(rng, 1, 25);
        std::vector<double> x(n);
        double t = rng.uniform();
        for (auto& xi : x) xi = (t += 0.01 + rng.uniform());
        const auto y = gen::values(rng, n);
        const auto f = least_concave_majorant(x, y);
        const auto ref = oracle::concave_majorant_at_knots(x, y);
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(f(x[i]) == doctest::Approx(ref[i]).epsilon(1e-12).scale(1.0));
            REQUIRE(f(x[i]) >= y[i] - 1e-12);
        }
        const auto s = f.slopes();
        for (std::size_t i = 1; i < s.size(); ++i) REQUIRE(s[i] <= s[i - 1] + 1e-12);

        // Left derivative is non-increasing along increasing queries.
        if (n >= 2) {
            double prev = INFINITY;
            for (int k = 1; k <= 50; ++k) {
                const double q = k == 50 ? x.back() : x.front() + (x.back() - x.front()) * k / 50.0;
                const double d = left_derivative(f, q);
                REQUIRE(d <= prev + 1e-12);
                prev = d;
            }
        }
    }
}
