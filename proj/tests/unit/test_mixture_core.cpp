#include <doctest.h>

#include <cmath>

#include "../support/generators.hpp"
#include "../support/oracles.hpp"
#include "mixsep/mixture_core.hpp"

using namespace mixsep;

namespace {

double uniform_cdf(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

TEST_CASE("sorted sample and empirical cdf") {
    const SortedSample s({0.3, 0.1, 0.3, 0.2});
    CHECK(std::vector<double>(s.values().begin(), s.values().end()) == std::vector<double>{0.1, 0.2, 0.3, 0.3});
    CHECK(std::vector<double>(s.ecdf().begin(), s.ecdf().end()) == std::vector<double>{0.25, 0.5, 1.0, 1.0});
    CHECK(s.ecdf_at(0.05) == 0.0);
    CHECK(s.ecdf_at(0.2) == 0.5);
    CHECK(s.ecdf_at(0.25) == 0.5);
    CHECK(s.ecdf_at(5) == 1.0);
    CHECK_THROWS_WITH_AS(SortedSample({}), "empty sample", std::invalid_argument);
    CHECK_THROWS_AS(SortedSample({1.0, NAN}), std::invalid_argument);
}

TEST_CASE("step cdf conventions") {
    const StepCdf f({1.0, 2.0}, {0.4, 1.0});
    CHECK(f(0.999) == 0.0);
    CHECK(f(1.0) == 0.4);
    CHECK(f(1.5) == 0.4);
    CHECK(f(2.0) == 1.0);
    CHECK(f(9.0) == 1.0);
    CHECK_THROWS_AS(StepCdf({1.0, 2.0}, {0.5, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(StepCdf({1.0}, {1.5}), std::invalid_argument);
}

TEST_CASE("naive component values") {
    const auto fb = KnownCdf::uniform();
    const SortedSample s({0.5});
    CHECK(naive_component_values(s, fb, 0.5)[0] == doctest::Approx((1.0 - 0.5 * 0.5) / 0.5));

    Rng rng(31);
    const SortedSample t(gen::beta_uniform_mixture(rng, 200, 0.2));
    const auto v1 = naive_component_values(t, fb, 1.0);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(v1[i] == t.ecdf()[i]);

    CHECK_THROWS_AS(naive_component_values(t, fb, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(naive_component_values(t, fb, 1.1), std::invalid_argument);

    // Background equal to the empirical cdf at the data: V is fixed for every gamma.
    const std::vector<double> x{0.1, 0.35, 0.6, 0.9};
    const auto tab = KnownCdf::tabulated({0.0, 0.1, 0.35, 0.6, 0.9, 1.0}, {0.0, 0.25, 0.5, 0.75, 1.0, 1.0});
    const SortedSample fixed(x);
    for (double g : {0.1, 0.5, 0.9}) {
        const auto v = naive_component_values(fixed, tab, g);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(v[i] == doctest::Approx(fixed.ecdf()[i]));
    }
}

TEST_CASE("isotonized cdf") {
    const auto fb = KnownCdf::uniform();
    Rng rng(32);
    const SortedSample s(gen::beta_uniform_mixture(rng, 300, 0.3));
    const StepCdf at1 = isotonized_cdf(s, fb, 1.0);
    for (double x : s.values()) CHECK(at1(x) == doctest::Approx(s.ecdf_at(x)).epsilon(1e-15));
    CHECK(at1(s.values().front() - 1e-9) == 0.0);

    for (double g : {0.05, 0.2, 0.5, 0.8}) {
        const StepCdf f = isotonized_cdf(s, fb, g);
        double prev = 0.0;
        for (double v : f.values()) {
            REQUIRE(v >= prev);
            REQUIRE(v <= 1.0);
            prev = v;
        }
    }
}

TEST_CASE("criterion special values") {
    const auto fb = KnownCdf::uniform();
    Rng rng(33);
    const SortedSample s(gen::beta_uniform_mixture(rng, 400, 0.1));
    CHECK(criterion(s, fb, 1.0) == 0.0);
    double d0 = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) d0 += std::pow(s.ecdf()[i] - s.values()[i], 2);
    CHECK(criterion(s, fb, 0.0) == doctest::Approx(std::sqrt(d0 / s.size())).epsilon(1e-14));
    CHECK_THROWS_AS(criterion(s, fb, -0.1), std::invalid_argument);

    // Naive values already a CDF: zero criterion.
    const SortedSample grid({0.2, 0.4, 0.6, 0.8, 1.0});
    CHECK(criterion(grid, fb, 0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
}

TEST_CASE("criterion matches the brute-force oracle") {
    Rng rng(34);
    const auto fb = KnownCdf::uniform();
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = gen::size(rng, 1, 40);
        const SortedSample s(gen::beta_uniform_mixture(rng, n, rng.uniform()));
        for (double g : {0.0, 0.01, 0.1, 0.33, 0.7, 1.0}) {
            const double ref = oracle::criterion_bruteforce(s.values(), uniform_cdf, g);
            REQUIRE(criterion(s, fb, g) == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("distance identity for the fitted mixture") {
    Rng rng(35);
    const auto fb = KnownCdf::uniform();
    for (int rep = 0; rep < 30; ++rep) {
        const SortedSample s(gen::beta_uniform_mixture(rng, 500, 0.15));
        for (double g : {0.05, 0.1, 0.4, 0.9}) {
            const StepCdf f = isotonized_cdf(s, fb, g);
            double sum = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                const double x = s.values()[i];
                const double d = s.ecdf()[i] - (g * f(x) + (1.0 - g) * fb.cdf(x));
                sum += d * d;
            }
            REQUIRE(std::sqrt(sum / s.size()) == doctest::Approx(criterion(s, fb, g)).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("criterion curve is non-increasing and convex") {
    Rng rng(36);
    for (int rep = 0; rep < 40; ++rep) {
        const SortedSample s(gen::beta_uniform_mixture(rng, 300, 0.3 * rng.uniform()));
        const auto c = criterion_curve(s, KnownCdf::uniform(), 100);
        REQUIRE(c.gammas.size() == 100);
        REQUIRE(c.second_differences.size() == 98);
        CHECK(c.gammas.back() == 1.0);
        CHECK(c.values.back() == 0.0);
        for (std::size_t k = 1; k < c.values.size(); ++k) REQUIRE(c.values[k] <= c.values[k - 1] + 1e-10);
        for (std::size_t k = 1; k + 1 < c.values.size(); ++k)
            REQUIRE(c.values[k - 1] - 2.0 * c.values[k] + c.values[k + 1] >= -1e-10);
    }
    const SortedSample s(gen::beta_uniform_mixture(rng, 50, 0.1));
    CHECK_THROWS_AS(criterion_curve(s, KnownCdf::uniform(), 9), std::invalid_argument);
}

TEST_CASE("criterion curve does not depend on the thread count") {
    Rng rng(37);
    const SortedSample s(gen::beta_uniform_mixture(rng, 2000, 0.1));
    const CriterionFunction crit(s, KnownCdf::uniform());
    const auto a = criterion_curve(crit, 200, 1);
    const auto b = criterion_curve(crit, 200, 4);
    CHECK(a.values == b.values);
    CHECK(a.second_differences == b.second_differences);
}

TEST_CASE("criterion stays below the distance to the true mixture above alpha0") {
    Rng rng(38);
    const double alpha = 0.2;
    auto mix = [&](double x) {
        const double u = std::clamp(x, 0.0, 1.0);
        return alpha * (1.0 - std::pow(1.0 - u, 10)) + (1.0 - alpha) * u;
    };
    for (int rep = 0; rep < 30; ++rep) {
        const SortedSample s(gen::beta_uniform_mixture(rng, 1000, alpha));
        double sum = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) sum += std::pow(s.ecdf()[i] - mix(s.values()[i]), 2);
        const double dist = std::sqrt(sum / s.size());
        for (double g : {0.2, 0.3, 0.6, 1.0}) REQUIRE(criterion(s, KnownCdf::uniform(), g) <= dist + 1e-12);
    }
}

TEST_CASE("criterion is invariant under a quantile transform") {
    Rng rng(39);
    for (int rep = 0; rep < 10; ++rep) {
        const auto x = gen::beta_uniform_mixture(rng, 500, 0.1);
        const auto y = push_through_quantile(x, KnownCdf::normal());
        const SortedSample sx(x), sy(y);
        const CriterionFunction cx(sx, KnownCdf::uniform()), cy(sy, KnownCdf::normal());
        for (int k = 0; k <= 100; ++k)
            REQUIRE(std::abs(cx(k / 100.0) - cy(k / 100.0)) <= 1e-12);
    }
}

TEST_CASE("default c_n") {
    CHECK(default_cn(5000, 0.1) == doctest::Approx(0.1 * std::log(std::log(5000.0))).epsilon(1e-15));
    CHECK(default_cn(5000, 0.1) == doctest::Approx(0.21421).epsilon(1e-4));
    CHECK(default_cn(3, 1.0) == doctest::Approx(0.0940478276).epsilon(1e-9));
    CHECK_THROWS_WITH_AS(default_cn(5000, 0.0), doctest::Contains("cn undefined"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(default_cn(2, 0.1), doctest::Contains("cn undefined"), std::invalid_argument);
}

TEST_CASE("thresholded estimator") {
    Rng rng(40);
    const auto fb = KnownCdf::uniform();
    const SortedSample s(gen::beta_uniform_mixture(rng, 2000, 0.15));
    const CriterionFunction crit(s, fb);
    const double root_n = std::sqrt(2000.0);

    CHECK(estimate_alpha_cn(crit, 1e3) == 0.0);
    CHECK(estimate_alpha_cn(crit, root_n * crit(0.0)) == 0.0);
    CHECK_THROWS_AS(estimate_alpha_cn(crit, 0.0), std::invalid_argument);

    for (double cn : {0.05, 0.2141, 0.6792, 2.0}) {
        const double a = estimate_alpha_cn(crit, cn);
        // Smallest feasible point of a fine scan.
        double scan = 1.0;
        for (int k = 0; k <= 10000; ++k)
            if (root_n * crit(k / 10000.0) <= cn) {
                scan = k / 10000.0;
                break;
            }
        CHECK(std::abs(a - scan) <= 1e-4 + 1e-6);
        CHECK(root_n * crit(std::min(1.0, a + 1e-6)) <= cn + 1e-12);
    }
}

TEST_CASE("elbow estimate") {
    // Piecewise linear curve with a single kink at 0.3.
    CriterionCurve c;
    for (int k = 1; k <= 100; ++k) {
        const double g = k / 100.0;
        c.gammas.push_back(g);
        c.values.push_back(g < 0.3 ? 1.0 - 2.0 * g : 0.4 - 0.4 * (g - 0.3) / 0.7);
    }
    const double h = 0.01;
    for (std::size_t k = 1; k + 1 < c.values.size(); ++k)
        c.second_differences.push_back((c.values[k - 1] - 2 * c.values[k] + c.values[k + 1]) / (h * h));
    const auto e = elbow_estimate(c);
    CHECK(e.alpha == doctest::Approx(0.3));
    CHECK(e.peaks.size() == 1);

    // Two near-equal peaks: the smaller gamma is returned, both are reported.
    auto two = c;
    std::fill(two.second_differences.begin(), two.second_differences.end(), 0.0);
    two.second_differences[20] = 9.8;
    two.second_differences[50] = 10.0;
    const auto e2 = elbow_estimate(two);
    CHECK(e2.argmax == doctest::Approx(0.52));
    CHECK(e2.alpha == doctest::Approx(0.22));
    CHECK(e2.peaks.size() == 2);

    auto flat = c;
    std::fill(flat.second_differences.begin(), flat.second_differences.end(), 0.0);
    CHECK_THROWS_WITH_AS(elbow_estimate(flat), "no elbow detected", std::domain_error);
}

TEST_CASE("elbow estimate on setting II data lands near the mixing proportion") {
    double sum = 0.0;
    int inside = 0;
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng(100 + seed);
        const SortedSample s(gen::beta_uniform_mixture(rng, 5000, 0.1));
        const double a = elbow_estimate(criterion_curve(s, KnownCdf::uniform())).alpha;
        inside += a >= 0.06 && a <= 0.14;
        sum += a;
    }
    CHECK(inside >= 90);
    CHECK(std::abs(sum / 100 - 0.1) < 0.02);
}
