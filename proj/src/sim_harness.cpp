#include "mixsep/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "mixsep/identifiability.hpp"
#include "mixsep/mixture_core.hpp"
#include "mixsep/parallel.hpp"

namespace mixsep {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

/// Marks round(alpha * n) randomly chosen units as alternatives.
std::vector<char> choose_alternatives(std::size_t n, double alpha, Rng& rng) {
    const auto count = static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<char> is_alt(n, 0);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
        is_alt[idx[i]] = 1;
    }
    return is_alt;
}

std::vector<double> iid_mixture(std::size_t n, double alpha, const KnownCdf& fs, const KnownCdf& fb, Rng& rng) {
    std::vector<double> out(n);
    for (double& x : out) x = rng.uniform() < alpha ? fs.draw(rng) : fb.draw(rng);
    return out;
}

void check_alpha(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("scenario alpha must lie in [0,1]");
}

std::string format(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

void ScenarioConfig::validate() const {
    if (replications < 1) throw std::invalid_argument("need at least one replication");
    std::visit(Overloaded{
                   [](const scenario::A& a) {
                       check_alpha(a.alpha);
                       if (a.n < 1) throw std::invalid_argument("scenario A needs n >= 1");
                       if (a.J < 2) throw std::invalid_argument("scenario A needs J >= 2");
                       if (!(a.rho >= 0.0 && a.rho < 1.0)) throw std::invalid_argument("rho must lie in [0,1)");
                       if (a.block_size < 1) throw std::invalid_argument("block size must be positive");
                   },
                   [](const scenario::B& b) {
                       check_alpha(b.alpha);
                       if (b.n < 1) throw std::invalid_argument("scenario B needs n >= 1");
                       if (!(b.m_star >= 0.0)) throw std::invalid_argument("m* must be non-negative");
                   },
                   [](const scenario::SettingI& s) {
                       check_alpha(s.alpha);
                       if (s.n < 1) throw std::invalid_argument("setting I needs n >= 1");
                   },
                   [](const scenario::SettingII& s) {
                       check_alpha(s.alpha);
                       if (s.n < 1) throw std::invalid_argument("setting II needs n >= 1");
                   },
               },
               scenario);
    for (double tau : estimators.taus)
        if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    if (!(estimators.beta > 0.0 && estimators.beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
}

std::size_t scenario_size(const Scenario& s) {
    return std::visit([](const auto& c) { return c.n; }, s);
}

std::string scenario_name(const Scenario& s) {
    return std::visit(Overloaded{
                          [](const scenario::A&) { return std::string("A"); },
                          [](const scenario::B&) { return std::string("B"); },
                          [](const scenario::SettingI&) { return std::string("setting_I"); },
                          [](const scenario::SettingII&) { return std::string("setting_II"); },
                      },
                      s);
}

KnownCdf scenario_background(const Scenario& s) {
    return std::visit(Overloaded{
                          [](const scenario::A&) { return KnownCdf::uniform(); },
                          [](const scenario::B&) { return KnownCdf::normal(); },
                          [](const scenario::SettingI&) { return KnownCdf::normal(); },
                          [](const scenario::SettingII&) { return KnownCdf::uniform(); },
                      },
                      s);
}

double scenario_alpha0(const Scenario& s) {
    return std::visit(
        Overloaded{
            // Reference follows the identifiable reading. The exact ess inf at p = 1
            // is E exp(-J mu^2 / 2), about 0.038 for J = 10.
            [](const scenario::A& a) { return a.alpha; },
            [](const scenario::B& b) {
                const MixtureSpec m{b.alpha, KnownCdf::shifted_normal(b.m_star, b.m_star + 1.0), KnownCdf::normal()};
                return alpha0_continuous(m, 100000, Alpha0Route::numeric);
            },
            [](const scenario::SettingI& c) { return alpha0(MixtureSpec{c.alpha, KnownCdf::normal(2.0, 1.0), KnownCdf::normal()}); },
            [](const scenario::SettingII& c) {
                return alpha0_continuous(MixtureSpec{c.alpha, KnownCdf::beta(1.0, 10.0), KnownCdf::uniform()}, 100000,
                                         Alpha0Route::numeric);
            },
        },
        s);
}

double draw_bitriangular(double a, double b, Rng& rng) {
    if (!(a > 0.0 && a < b)) throw std::invalid_argument("bi-triangular law needs 0 < a < b");
    // Mean of two uniforms is triangular on [0, 1] with mode 1/2.
    const double t = 0.5 * (rng.uniform() + rng.uniform());
    const double magnitude = a + (b - a) * t;
    return (rng.next() >> 63) ? magnitude : -magnitude;
}

std::vector<double> bitriangular_sample(double a, double b, std::size_t count, std::uint64_t seed) {
    if (!(a > 0.0 && a < b)) throw std::invalid_argument("bi-triangular law needs 0 < a < b");
    Rng rng(seed);
    std::vector<double> out(count);
    for (double& x : out) x = draw_bitriangular(a, b, rng);
    return out;
}

std::vector<std::vector<double>> scenario_a_observations(const scenario::A& cfg, Rng& rng) {
    static const double kA = std::log2(1.2);
    static const double kB = std::log2(4.0);
    const std::size_t n = cfg.n;

    const std::vector<char> is_alt = choose_alternatives(n, cfg.alpha, rng);
    std::vector<double> mu(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (is_alt[i]) mu[i] = draw_bitriangular(kA, kB, rng);

    const double shared = std::sqrt(cfg.rho);
    const double own = std::sqrt(1.0 - cfg.rho);
    std::vector<std::vector<double>> x(static_cast<std::size_t>(cfg.J), std::vector<double>(n));
    for (auto& row : x) {
        double factor = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i % cfg.block_size == 0) factor = cfg.rho > 0.0 ? rng.normal() : 0.0;
            row[i] = mu[i] + shared * factor + own * rng.normal();
        }
    }
    return x;
}

std::vector<double> gen_scenario_a(const scenario::A& cfg, Rng& rng) {
    const auto x = scenario_a_observations(cfg, rng);
    const int J = cfg.J;
    const boost::math::students_t_distribution<> t_dist(J - 1);
    std::vector<double> p(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        double sum = 0.0;
        for (const auto& row : x) sum += row[i];
        const double mean = sum / J;
        double ss = 0.0;
        for (const auto& row : x) ss += (row[i] - mean) * (row[i] - mean);
        const double var = ss / (J - 1);
        const double t = var > 0.0 ? mean / std::sqrt(var / J) : 0.0;
        p[i] = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(t_dist, std::abs(t))));
    }
    return p;
}

std::vector<double> gen_scenario_b(const scenario::B& cfg, Rng& rng) {
    const std::size_t n = cfg.n;
    const std::size_t window = cfg.L + 1;
    std::vector<double> w(n + cfg.L);
    for (double& v : w) v = rng.normal();

    const std::vector<char> is_alt = choose_alternatives(n, cfg.alpha, rng);
    const double scale = 1.0 / std::sqrt(static_cast<double>(window));
    std::vector<double> x(n);
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // Restart the moving sum now and then so rounding does not accumulate.
        if (i % 1024 == 0)
            running = std::accumulate(w.begin() + static_cast<std::ptrdiff_t>(i),
                                      w.begin() + static_cast<std::ptrdiff_t>(i + window), 0.0);
        else
            running += w[i + cfg.L] - w[i - 1];
        x[i] = running * scale;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_alt[i]) continue;
        const double magnitude = cfg.m_star + rng.uniform();
        x[i] += (rng.next() >> 63) ? magnitude : -magnitude;
    }
    return x;
}

std::vector<double> gen_setting_i(const scenario::SettingI& cfg, Rng& rng) {
    return iid_mixture(cfg.n, cfg.alpha, KnownCdf::normal(2.0, 1.0), KnownCdf::normal(), rng);
}

std::vector<double> gen_setting_ii(const scenario::SettingII& cfg, Rng& rng) {
    return iid_mixture(cfg.n, cfg.alpha, KnownCdf::beta(1.0, 10.0), KnownCdf::uniform(), rng);
}

std::vector<double> generate(const ScenarioConfig& cfg, std::size_t index) {
    Rng rng = Rng(cfg.base_seed).split(index);
    return std::visit(Overloaded{
                          [&](const scenario::A& a) { return gen_scenario_a(a, rng); },
                          [&](const scenario::B& b) { return gen_scenario_b(b, rng); },
                          [&](const scenario::SettingI& s) { return gen_setting_i(s, rng); },
                          [&](const scenario::SettingII& s) { return gen_setting_ii(s, rng); },
                      },
                      cfg.scenario);
}

double config_lower_cn(const ScenarioConfig& cfg) {
    CriticalValueSpec spec;
    spec.n = scenario_size(cfg.scenario);
    spec.beta = cfg.estimators.beta;
    spec.replications = cfg.estimators.mc_replications;
    // Keep the threshold's stream apart from the data streams.
    spec.seed = cfg.base_seed ^ 0x5bd1e9955bd1e995ULL;
    spec.threads = cfg.threads;
    spec.method = cfg.estimators.critical_value.value_or(spec.n >= 500 ? CriticalValueMethod::asymptotic_cvm
                                                                       : CriticalValueMethod::monte_carlo);
    return critical_value(spec);
}

ReplicationEstimates run_replication(const ScenarioConfig& cfg, std::size_t index, double lower_cn) {
    const SortedSample sample(generate(cfg, index));
    const CriterionFunction crit(sample, scenario_background(cfg.scenario));
    ReplicationEstimates out;
    for (double tau : cfg.estimators.taus) out.alpha_cn.push_back(estimate_alpha_cn(crit, default_cn(sample.size(), tau)));
    if (cfg.estimators.elbow) {
        try {
            out.elbow = elbow_estimate(criterion_curve(crit, cfg.estimators.grid)).alpha;
        } catch (const std::domain_error&) {
            out.elbow.reset();
        }
    }
    if (cfg.estimators.lower_bound) out.lower_bound = lower_bound(crit, lower_cn);
    return out;
}

MetricsTable run_replications(const ScenarioConfig& cfg) {
    cfg.validate();
    const double lower_cn = cfg.estimators.lower_bound ? config_lower_cn(cfg) : 0.0;
    std::vector<ReplicationEstimates> results(cfg.replications);
    parallel_for(cfg.replications, cfg.threads,
                 [&](std::size_t r) { results[r] = run_replication(cfg, r, lower_cn); });

    const double alpha = std::visit([](const auto& c) { return c.alpha; }, cfg.scenario);
    const double a0 = scenario_alpha0(cfg.scenario);
    MetricsTable table;
    table.scenario = scenario_name(cfg.scenario);
    table.base_seed = cfg.base_seed;
    table.n = scenario_size(cfg.scenario);

    auto summarize = [&](std::string name, const std::vector<double>& values, bool with_coverage) {
        MetricsRow row;
        row.estimator = std::move(name);
        row.alpha = alpha;
        row.alpha0 = a0;
        row.reps = values.size();
        if (!values.empty()) {
            double sum = 0.0, sq = 0.0, covered = 0.0;
            for (double v : values) {
                sum += v;
                sq += (v - a0) * (v - a0);
                covered += v <= a0 ? 1.0 : 0.0;
            }
            const double k = static_cast<double>(values.size());
            row.mean = sum / k;
            row.rmse = std::sqrt(sq / k);
            if (with_coverage) row.coverage = covered / k;
        }
        table.rows.push_back(std::move(row));
    };

    for (std::size_t t = 0; t < cfg.estimators.taus.size(); ++t) {
        std::vector<double> v;
        for (const auto& r : results) v.push_back(r.alpha_cn[t]);
        summarize("alpha_hat_cn(tau=" + format(cfg.estimators.taus[t]) + ")", v, false);
    }
    if (cfg.estimators.elbow) {
        std::vector<double> v;
        for (const auto& r : results)
            if (r.elbow) v.push_back(*r.elbow);
        summarize("alpha_tilde_elbow", v, false);
    }
    if (cfg.estimators.lower_bound) {
        std::vector<double> v;
        for (const auto& r : results) v.push_back(*r.lower_bound);
        summarize("alpha_lower_bound(beta=" + format(cfg.estimators.beta) + ")", v, true);
    }
    return table;
}

std::string to_csv(const MetricsTable& table) {
    std::ostringstream os;
    os.precision(10);
    os << "estimator,alpha,alpha0,mean,rmse,coverage,reps\r\n";
    for (const auto& r : table.rows) {
        os << '"' << r.estimator << "\"," << r.alpha << ',' << r.alpha0 << ',' << r.mean << ',' << r.rmse << ',';
        if (r.coverage) os << *r.coverage;
        os << ',' << r.reps << "\r\n";
    }
    return os.str();
}

std::string to_json(const MetricsTable& table) {
    nlohmann::ordered_json j;
    j["scenario"] = table.scenario;
    j["n"] = table.n;
    j["base_seed"] = table.base_seed;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : table.rows) {
        nlohmann::ordered_json row;
        row["estimator"] = r.estimator;
        row["alpha"] = r.alpha;
        row["alpha0"] = r.alpha0;
        row["mean"] = r.mean;
        row["rmse"] = r.rmse;
        row["coverage"] = r.coverage ? nlohmann::ordered_json(*r.coverage) : nlohmann::ordered_json(nullptr);
        row["reps"] = r.reps;
        j["rows"].push_back(std::move(row));
    }
    return j.dump(2);
}

ScenarioConfig parse_scenario_config(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("simulation config is not valid JSON: ") + e.what());
    }
    try {
        const auto& s = j.at("scenario");
        const std::string type = s.at("type").get<std::string>();
        ScenarioConfig cfg;
        if (type == "A") {
            scenario::A a;
            a.n = s.value("n", a.n);
            a.J = s.value("J", a.J);
            a.alpha = s.value("alpha", a.alpha);
            a.rho = s.value("rho", a.rho);
            a.block_size = s.value("block_size", a.block_size);
            cfg.scenario = a;
        } else if (type == "B") {
            scenario::B b;
            b.n = s.value("n", b.n);
            b.L = s.value("L", b.L);
            b.m_star = s.value("m_star", b.m_star);
            b.alpha = s.value("alpha", b.alpha);
            cfg.scenario = b;
        } else if (type == "setting_I") {
            scenario::SettingI c;
            c.n = s.value("n", c.n);
            c.alpha = s.value("alpha", c.alpha);
            cfg.scenario = c;
        } else if (type == "setting_II") {
            scenario::SettingII c;
            c.n = s.value("n", c.n);
            c.alpha = s.value("alpha", c.alpha);
            cfg.scenario = c;
        } else {
            throw std::invalid_argument("unknown scenario type '" + type + "'");
        }
        cfg.replications = j.value("replications", cfg.replications);
        cfg.base_seed = j.value("base_seed", cfg.base_seed);
        cfg.threads = j.value("threads", cfg.threads);
        if (j.contains("estimators")) {
            const auto& e = j.at("estimators");
            auto& sel = cfg.estimators;
            sel.taus = e.value("taus", sel.taus);
            sel.elbow = e.value("elbow", sel.elbow);
            sel.lower_bound = e.value("lower_bound", sel.lower_bound);
            sel.beta = e.value("beta", sel.beta);
            sel.grid = e.value("grid", sel.grid);
            sel.mc_replications = e.value("mc_replications", sel.mc_replications);
            const std::string cv = e.value("critical_value", std::string("auto"));
            if (cv == "asymptotic")
                sel.critical_value = CriticalValueMethod::asymptotic_cvm;
            else if (cv == "monte_carlo")
                sel.critical_value = CriticalValueMethod::monte_carlo;
            else if (cv != "auto")
                throw std::invalid_argument("critical_value must be auto, asymptotic or monte_carlo");
        }
        cfg.validate();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed simulation config: ") + e.what());
    }
}

}  // namespace mixsep
