#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mixsep/distributions.hpp"
#include "mixsep/mixture_core.hpp"

namespace mixsep {

enum class CriticalValueMethod { monte_carlo, asymptotic_cvm };

/// How the threshold c_n of the lower confidence bound is obtained.
struct CriticalValueSpec {
    CriticalValueMethod method = CriticalValueMethod::asymptotic_cvm;
    double beta = 0.05;
    std::size_t n = 0;
    std::size_t replications = 10000;  ///< Monte Carlo only, >= 1000
    std::uint64_t seed = 20140101;     ///< Monte Carlo only
    unsigned threads = 1;

    void validate() const;
};

/// Empirical (1 - beta) quantile of sqrt(n) * d_n(F_n, F) over `replications`
/// uniform samples of size n (order statistic ceil(B (1 - beta))).
/// Deterministic for a given seed regardless of thread count.
double simulate_hn_quantile(std::size_t n, double beta, std::size_t replications,
                            std::uint64_t seed, unsigned threads = 1);

/// sqrt(n) * d_n(F_n, U(0,1)) for one sorted uniform sample.
double uniform_distance_statistic(std::span<const double> sorted_uniforms);

/// CDF of the limiting Cramer-von Mises statistic W^2 (series in Bessel K_{1/4}).
double cvm_limit_cdf(double w2);

/// (1 - beta) quantile of sqrt(W^2). The levels 0.10, 0.05 and 0.01 come from
/// the classical table; other levels are solved from the series when
/// `allow_untabulated` is set and rejected otherwise.
double asymptotic_cvm_quantile(double beta, bool allow_untabulated = false);

/// On-disk table of simulated quantiles, CSV with columns n,beta,B,seed,quantile.
class QuantileCache {
public:
    explicit QuantileCache(std::filesystem::path file);

    /// $MIXSEP_CACHE_DIR/hn_quantiles.csv, else ~/.cache/mixsep/hn_quantiles.csv.
    static std::filesystem::path default_path();

    std::optional<double> lookup(std::size_t n, double beta, std::size_t replications,
                                 std::uint64_t seed) const;
    void store(std::size_t n, double beta, std::size_t replications, std::uint64_t seed,
               double quantile);

    const std::filesystem::path& path() const { return file_; }

private:
    std::filesystem::path file_;
};

/// c_n described by a CriticalValueSpec; Monte Carlo results go through the cache when one is given.
double critical_value(const CriticalValueSpec& spec, QuantileCache* cache = nullptr);

/// Lower confidence bound: the thresholded estimator with c_n = H_n^{-1}(1 - beta).
double lower_bound(const CriterionFunction& crit, double c_n);
double lower_bound(const SortedSample& s, const KnownCdf& fb, const CriticalValueSpec& spec,
                   QuantileCache* cache = nullptr);

struct HomogeneityDecision {
    bool reject = false;
    double lower_bound = 0.0;
    double c_n = 0.0;
};

/// Tests F = F_b by rejecting when the lower confidence bound is positive.
HomogeneityDecision homogeneity_test(const CriterionFunction& crit, double c_n);
HomogeneityDecision homogeneity_test(const SortedSample& s, const KnownCdf& fb,
                                     const CriticalValueSpec& spec, QuantileCache* cache = nullptr);

}  // namespace mixsep
