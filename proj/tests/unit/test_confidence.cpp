#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "../support/generators.hpp"
#include "mixsep/confidence.hpp"

using namespace mixsep;

TEST_CASE("uniform distance statistic") {
    const std::vector<double> u{0.25, 0.5, 0.75};
    const double expected = std::sqrt(std::pow(1.0 / 3 - 0.25, 2) + std::pow(2.0 / 3 - 0.5, 2) + std::pow(1.0 - 0.75, 2));
    CHECK(uniform_distance_statistic(u) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("simulated quantile is deterministic and thread independent") {
    const double a = simulate_hn_quantile(200, 0.05, 2000, 9, 1);
    CHECK(a == simulate_hn_quantile(200, 0.05, 2000, 9, 1));
    CHECK(a == simulate_hn_quantile(200, 0.05, 2000, 9, 3));
    CHECK(a != simulate_hn_quantile(200, 0.05, 2000, 10, 1));
    // beta near 1 picks the smallest replicate, which is tiny but positive.
    const double lowest = simulate_hn_quantile(200, 0.9999, 2000, 9, 1);
    CHECK(lowest > 0.0);
    CHECK(lowest < simulate_hn_quantile(200, 0.5, 2000, 9, 1));
    CHECK(lowest < 0.15);
}

TEST_CASE("limit distribution of the Cramer-von Mises statistic") {
    // Classical upper percentage points of W^2.
    CHECK(cvm_limit_cdf(0.34730) == doctest::Approx(0.90).epsilon(2e-4));
    CHECK(cvm_limit_cdf(0.46136) == doctest::Approx(0.95).epsilon(2e-4));
    CHECK(cvm_limit_cdf(0.74346) == doctest::Approx(0.99).epsilon(2e-4));
    CHECK(cvm_limit_cdf(0.0) == 0.0);
    double prev = 0.0;
    for (int k = 1; k <= 300; ++k) {
        const double c = cvm_limit_cdf(k / 100.0);
        REQUIRE(c >= prev - 1e-12);
        prev = c;
    }
}

TEST_CASE("asymptotic quantiles") {
    CHECK(asymptotic_cvm_quantile(0.05) == 0.6792);
    CHECK(asymptotic_cvm_quantile(0.10) == 0.5893);
    CHECK(asymptotic_cvm_quantile(0.01) == 0.8622);
    CHECK_THROWS_AS(asymptotic_cvm_quantile(0.5), std::invalid_argument);
    // Solving the series reproduces the table.
    CHECK(asymptotic_cvm_quantile(0.0500000001, true) == doctest::Approx(0.6792).epsilon(2e-4));
    CHECK(asymptotic_cvm_quantile(0.0100000001, true) == doctest::Approx(0.8622).epsilon(2e-4));
    const double median = asymptotic_cvm_quantile(0.5, true);
    CHECK(cvm_limit_cdf(median * median) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("asymptotic quantile agrees with simulation at n = 5000") {
    const double mc = simulate_hn_quantile(5000, 0.05, 10000, 77, 0);
    CHECK(std::abs(mc - asymptotic_cvm_quantile(0.05)) < 0.02);
}

TEST_CASE("quantiles do not depend on the background") {
    // sqrt(n) d_n(F_n, Phi) for normal samples, compared with the uniform route.
    const std::size_t n = 300, reps = 4000;
    std::vector<double> stats(reps);
    const auto normal = KnownCdf::normal();
    for (std::size_t r = 0; r < reps; ++r) {
        Rng rng = Rng(5).split(r);
        std::vector<double> x(n);
        for (auto& v : x) v = rng.normal();
        std::sort(x.begin(), x.end());
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::pow((i + 1.0) / n - normal.cdf(x[i]), 2);
        stats[r] = std::sqrt(s);
    }
    std::sort(stats.begin(), stats.end());
    const double q_normal = stats[static_cast<std::size_t>(std::ceil(0.95 * reps)) - 1];
    const double q_uniform = simulate_hn_quantile(n, 0.05, reps, 6);
    // Two standard errors of a 95% quantile estimate from 4000 draws, twice.
    CHECK(std::abs(q_normal - q_uniform) < 2.0 * std::sqrt(2.0) * 0.012);
}

TEST_CASE("critical value spec validation") {
    CriticalValueSpec s;
    s.n = 100;
    s.beta = 1.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.beta = 0.05;
    s.method = CriticalValueMethod::monte_carlo;
    s.replications = 999;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.replications = 1000;
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("critical values and the quantile cache") {
    const auto dir = std::filesystem::temp_directory_path() / "mixsep_cache_test";
    std::filesystem::remove_all(dir);
    QuantileCache cache(dir / "q.csv");
    CHECK_FALSE(cache.lookup(100, 0.05, 1000, 1).has_value());

    CriticalValueSpec spec;
    spec.method = CriticalValueMethod::monte_carlo;
    spec.n = 100;
    spec.replications = 1000;
    spec.seed = 1;
    const double q = critical_value(spec, &cache);
    CHECK(q == simulate_hn_quantile(100, 0.05, 1000, 1));
    REQUIRE(cache.lookup(100, 0.05, 1000, 1).has_value());
    CHECK(*cache.lookup(100, 0.05, 1000, 1) == q);

    // A stored entry is served without simulating.
    cache.store(100, 0.05, 1000, 2, 0.123);
    spec.seed = 2;
    CHECK(critical_value(spec, &cache) == 0.123);

    // Asymptotic method: tabulated levels, simulation for the rest.
    spec.method = CriticalValueMethod::asymptotic_cvm;
    CHECK(critical_value(spec) == 0.6792);
    spec.beta = 0.2;
    spec.seed = 3;
    CHECK(critical_value(spec) == simulate_hn_quantile(100, 0.2, 1000, 3));
    std::filesystem::remove_all(dir);
}

TEST_CASE("cache location honours MIXSEP_CACHE_DIR") {
    const char* old = std::getenv("MIXSEP_CACHE_DIR");
    const std::string saved = old ? old : "";
    setenv("MIXSEP_CACHE_DIR", "/tmp/mixsep_elsewhere", 1);
    CHECK(QuantileCache::default_path() == std::filesystem::path("/tmp/mixsep_elsewhere/hn_quantiles.csv"));
    if (old)
        setenv("MIXSEP_CACHE_DIR", saved.c_str(), 1);
    else
        unsetenv("MIXSEP_CACHE_DIR");
}

TEST_CASE("lower bound monotonicity") {
    Rng rng(51);
    for (int rep = 0; rep < 20; ++rep) {
        const SortedSample s(gen::beta_uniform_mixture(rng, 1000, 0.1));
        const CriterionFunction crit(s, KnownCdf::uniform());
        const double b10 = lower_bound(crit, asymptotic_cvm_quantile(0.10));
        const double b05 = lower_bound(crit, asymptotic_cvm_quantile(0.05));
        const double b01 = lower_bound(crit, asymptotic_cvm_quantile(0.01));
        CHECK(b10 >= b05);
        CHECK(b05 >= b01);
        CHECK(b05 <= estimate_alpha_cn(crit, default_cn(1000, 0.1)));
    }
}

TEST_CASE("lower bound is zero exactly when the background already fits") {
    Rng rng(52);
    for (int rep = 0; rep < 50; ++rep) {
        const SortedSample s(gen::beta_uniform_mixture(rng, 400, rep % 2 ? 0.0 : 0.1));
        const CriterionFunction crit(s, KnownCdf::uniform());
        const double cn = asymptotic_cvm_quantile(0.05);
        CHECK((lower_bound(crit, cn) == 0.0) == (std::sqrt(400.0) * crit(0.0) <= cn));
    }
}

TEST_CASE("homogeneity test") {
    Rng rng(53);
    const SortedSample strong(gen::beta_uniform_mixture(rng, 2000, 0.3));
    const auto d = homogeneity_test(strong, KnownCdf::uniform(), CriticalValueSpec{});
    CHECK(d.reject);
    CHECK(d.lower_bound > 0.0);
    CHECK(d.c_n == 0.6792);
    CHECK_FALSE(homogeneity_test(CriterionFunction(strong, KnownCdf::uniform()), 1e9).reject);

    // Null rejection rate near beta with simulated critical values.
    const double cn = simulate_hn_quantile(200, 0.05, 10000, 54);
    int rejections = 0;
    for (int r = 0; r < 1000; ++r) {
        const SortedSample s(KnownCdf::uniform().sample(200, 1000 + r));
        rejections += homogeneity_test(CriterionFunction(s, KnownCdf::uniform()), cn).reject;
    }
    CHECK(rejections >= 30);
    CHECK(rejections <= 72);
}
