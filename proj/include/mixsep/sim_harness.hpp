#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mixsep/confidence.hpp"
#include "mixsep/distributions.hpp"
#include "mixsep/random.hpp"

namespace mixsep {

namespace scenario {

/// n units with J normal replicates each, tested by one-sample t-tests.
/// Noise is compound-symmetric with correlation rho inside blocks of block_size units.
struct A {
    std::size_t n = 5000;
    int J = 10;
    double alpha = 0.1;
    double rho = 0.0;
    std::size_t block_size = 100;
};

/// Moving-average normal scores (window L + 1) shifted by +-Uniform(m*, m* + 1)
/// for the alternatives.
struct B {
    std::size_t n = 50000;
    std::size_t L = 0;
    double m_star = 1.0;
    double alpha = 0.1;
};

/// i.i.d. alpha N(2,1) + (1 - alpha) N(0,1).
struct SettingI {
    std::size_t n = 5000;
    double alpha = 0.1;
};

/// i.i.d. alpha Beta(1,10) + (1 - alpha) Uniform(0,1).
struct SettingII {
    std::size_t n = 5000;
    double alpha = 0.1;
};

}  // namespace scenario

using Scenario = std::variant<scenario::A, scenario::B, scenario::SettingI, scenario::SettingII>;

struct EstimatorSelection {
    std::vector<double> taus{0.05, 0.1};  ///< one thresholded estimator per tau, c_n = tau log log n
    bool elbow = true;
    bool lower_bound = true;
    double beta = 0.05;
    std::size_t grid = 200;
    /// Unset: asymptotic quantile for n >= 500, Monte Carlo below.
    std::optional<CriticalValueMethod> critical_value;
    std::size_t mc_replications = 10000;
};

struct ScenarioConfig {
    Scenario scenario;
    std::size_t replications = 200;
    std::uint64_t base_seed = 1;
    EstimatorSelection estimators;
    unsigned threads = 0;

    void validate() const;
};

/// Sample size of a scenario.
std::size_t scenario_size(const Scenario& s);
std::string scenario_name(const Scenario& s);
/// The known component F_b the estimators are run against.
KnownCdf scenario_background(const Scenario& s);
/// Identifiable proportion implied by the generating mixture.
double scenario_alpha0(const Scenario& s);

/// Symmetric bi-triangular law: a triangular density on [a, b] peaked at
/// (a + b) / 2, mirrored onto [-b, -a] with probability 1/2.
double draw_bitriangular(double a, double b, Rng& rng);
std::vector<double> bitriangular_sample(double a, double b, std::size_t count, std::uint64_t seed);

/// Scenario A replicates: J rows of n observations N(mu_i, 1) with the block
/// correlation. Advances rng exactly as gen_scenario_a does.
std::vector<std::vector<double>> scenario_a_observations(const scenario::A& cfg, Rng& rng);
/// Two-sided t-test p-values for scenario A.
std::vector<double> gen_scenario_a(const scenario::A& cfg, Rng& rng);
/// Observations X_i = z_i + m_i for scenario B.
std::vector<double> gen_scenario_b(const scenario::B& cfg, Rng& rng);
std::vector<double> gen_setting_i(const scenario::SettingI& cfg, Rng& rng);
std::vector<double> gen_setting_ii(const scenario::SettingII& cfg, Rng& rng);

/// Data of replication `index` (stream derived from base_seed and index).
std::vector<double> generate(const ScenarioConfig& cfg, std::size_t index);

struct ReplicationEstimates {
    std::vector<double> alpha_cn;  ///< aligned with EstimatorSelection::taus
    std::optional<double> elbow;   ///< empty when no elbow was detected
    std::optional<double> lower_bound;
};

/// Runs the selected estimators on replication `index`; lower_cn is the
/// confidence threshold (ignored when the bound is not selected).
ReplicationEstimates run_replication(const ScenarioConfig& cfg, std::size_t index, double lower_cn);

/// Threshold used for the lower bound of a configuration.
double config_lower_cn(const ScenarioConfig& cfg);

struct MetricsRow {
    std::string estimator;
    double alpha = 0.0;
    double alpha0 = 0.0;
    double mean = 0.0;
    double rmse = 0.0;
    std::optional<double> coverage;
    std::size_t reps = 0;
};

struct MetricsTable {
    std::string scenario;
    std::uint64_t base_seed = 0;
    std::size_t n = 0;
    std::vector<MetricsRow> rows;
};

MetricsTable run_replications(const ScenarioConfig& cfg);

/// CSV with header estimator,alpha,alpha0,mean,rmse,coverage,reps.
std::string to_csv(const MetricsTable& table);
std::string to_json(const MetricsTable& table);

/// Reads a JSON simulation config, e.g.
/// {"scenario": {"type": "A", "n": 5000, "alpha": 0.1}, "replications": 200}.
ScenarioConfig parse_scenario_config(std::string_view json_text);

}  // namespace mixsep
