#include "mixsep/confidence.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/bessel.hpp>

#include "mixsep/parallel.hpp"
#include "mixsep/random.hpp"

namespace mixsep {

namespace {

struct TabulatedLevel {
    double beta;
    double quantile;  // of sqrt(W^2)
};

// Upper percentage points of the limiting W^2 distribution (0.34730, 0.46136,
// 0.74346), reported on the square-root scale.
constexpr std::array<TabulatedLevel, 3> kCvmTable{{
    {0.10, 0.5893},
    {0.05, 0.6792},
    {0.01, 0.8622},
}};

std::optional<double> tabulated_quantile(double beta) {
    for (const auto& level : kCvmTable)
        if (std::abs(level.beta - beta) < 1e-12) return level.quantile;
    return std::nullopt;
}

std::string format_key(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

void CriticalValueSpec::validate() const {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
    if (method == CriticalValueMethod::monte_carlo) {
        if (replications < 1000)
            throw std::invalid_argument("Monte Carlo critical values need at least 1000 replications");
        if (n == 0) throw std::invalid_argument("Monte Carlo critical values need the sample size n");
    }
}

double uniform_distance_statistic(std::span<const double> sorted_uniforms) {
    const double n = static_cast<double>(sorted_uniforms.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < sorted_uniforms.size(); ++i) {
        const double d = static_cast<double>(i + 1) / n - sorted_uniforms[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double simulate_hn_quantile(std::size_t n, double beta, std::size_t replications, std::uint64_t seed,
                            unsigned threads) {
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
    if (replications == 0) throw std::invalid_argument("need at least one replication");

    std::vector<double> stats(replications);
    const Rng root(seed);
    parallel_for(replications, threads, [&](std::size_t r) {
        Rng rng = root.split(r);
        std::vector<double> u(n);
        for (double& x : u) x = rng.uniform();
        std::sort(u.begin(), u.end());
        stats[r] = uniform_distance_statistic(u);
    });
    std::sort(stats.begin(), stats.end());
    const double target = std::ceil(static_cast<double>(replications) * (1.0 - beta) - 1e-9);
    const std::size_t rank = std::clamp<std::size_t>(static_cast<std::size_t>(target), 1, replications);
    return stats[rank - 1];
}

double cvm_limit_cdf(double w2) {
    if (!(w2 > 0.0)) return 0.0;
    if (w2 > 50.0) return 1.0;
    double total = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double y = 4.0 * k + 1.0;
        const double q = y * y / (16.0 * w2);
        if (q > 700.0) break;
        const double coef = std::exp(std::lgamma(k + 0.5) - std::lgamma(k + 1.0)) /
                            (std::pow(std::numbers::pi, 1.5) * std::sqrt(w2));
        const double term = coef * std::sqrt(y) * std::exp(-q) * boost::math::cyl_bessel_k(0.25, q);
        total += term;
        if (term < 1e-17) break;
    }
    return std::clamp(total, 0.0, 1.0);
}

double asymptotic_cvm_quantile(double beta, bool allow_untabulated) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
    if (auto q = tabulated_quantile(beta)) return *q;
    if (!allow_untabulated)
        throw std::invalid_argument("no tabulated asymptotic quantile for beta = " + format_key(beta));
    double lo = 1e-4, hi = 50.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cvm_limit_cdf(mid) >= 1.0 - beta)
            hi = mid;
        else
            lo = mid;
    }
    return std::sqrt(hi);
}

QuantileCache::QuantileCache(std::filesystem::path file) : file_(std::move(file)) {}

std::filesystem::path QuantileCache::default_path() {
    if (const char* dir = std::getenv("MIXSEP_CACHE_DIR"); dir && *dir)
        return std::filesystem::path(dir) / "hn_quantiles.csv";
    if (const char* home = std::getenv("HOME"); home && *home)
        return std::filesystem::path(home) / ".cache" / "mixsep" / "hn_quantiles.csv";
    return std::filesystem::temp_directory_path() / "mixsep" / "hn_quantiles.csv";
}

std::optional<double> QuantileCache::lookup(std::size_t n, double beta, std::size_t replications,
                                            std::uint64_t seed) const {
    std::ifstream in(file_);
    if (!in) return std::nullopt;
    std::string line;
    std::optional<double> found;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string f[5];
        for (auto& field : f)
            if (!std::getline(row, field, ',')) break;
        try {
            if (std::stoull(f[0]) == n && std::abs(std::stod(f[1]) - beta) < 1e-12 &&
                std::stoull(f[2]) == replications && std::stoull(f[3]) == seed)
                found = std::stod(f[4]);
        } catch (const std::exception&) {
            continue;  // header or damaged row
        }
    }
    return found;
}

void QuantileCache::store(std::size_t n, double beta, std::size_t replications, std::uint64_t seed,
                          double quantile) {
    if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
    const bool fresh = !std::filesystem::exists(file_) || std::filesystem::file_size(file_) == 0;
    std::ofstream out(file_, std::ios::app);
    if (!out) throw std::runtime_error("cannot write quantile cache " + file_.string());
    if (fresh) out << "n,beta,B,seed,quantile\n";
    out << n << ',' << format_key(beta) << ',' << replications << ',' << seed << ','
        << format_key(quantile) << '\n';
}

double critical_value(const CriticalValueSpec& spec, QuantileCache* cache) {
    spec.validate();
    if (spec.method == CriticalValueMethod::asymptotic_cvm) {
        if (auto q = tabulated_quantile(spec.beta)) return *q;
        if (spec.n == 0)
            throw std::invalid_argument("beta has no tabulated asymptotic quantile and n is unknown");
        // Untabulated levels fall back to simulation.
    }
    if (cache)
        if (auto q = cache->lookup(spec.n, spec.beta, spec.replications, spec.seed)) return *q;
    const double q = simulate_hn_quantile(spec.n, spec.beta, spec.replications, spec.seed, spec.threads);
    if (cache) cache->store(spec.n, spec.beta, spec.replications, spec.seed, q);
    return q;
}

double lower_bound(const CriterionFunction& crit, double c_n) { return estimate_alpha_cn(crit, c_n); }

double lower_bound(const SortedSample& s, const KnownCdf& fb, const CriticalValueSpec& spec,
                   QuantileCache* cache) {
    CriticalValueSpec resolved = spec;
    resolved.n = s.size();
    return lower_bound(CriterionFunction(s, fb), critical_value(resolved, cache));
}

HomogeneityDecision homogeneity_test(const CriterionFunction& crit, double c_n) {
    HomogeneityDecision d;
    d.c_n = c_n;
    d.lower_bound = lower_bound(crit, c_n);
    d.reject = d.lower_bound > 0.0;
    return d;
}

HomogeneityDecision homogeneity_test(const SortedSample& s, const KnownCdf& fb,
                                     const CriticalValueSpec& spec, QuantileCache* cache) {
    CriticalValueSpec resolved = spec;
    resolved.n = s.size();
    return homogeneity_test(CriterionFunction(s, fb), critical_value(resolved, cache));
}

}  // namespace mixsep
