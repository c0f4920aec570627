#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "csv_input.hpp"
#include "mixsep/confidence.hpp"
#include "mixsep/distributions.hpp"
#include "mixsep/identifiability.hpp"
#include "mixsep/mixture_core.hpp"
#include "mixsep/signal_recovery.hpp"
#include "mixsep/sim_harness.hpp"

#ifndef MIXSEP_VERSION
#define MIXSEP_VERSION "0.0.0"
#endif

namespace {

using namespace mixsep;
using cli::InputError;
using Json = nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSeed = 20140101;
constexpr int kInputError = 2;
constexpr int kNumericalError = 3;

/// A numerical procedure failed on valid input; exit status 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataOptions {
    std::string input;
    std::string column;
    std::string background = "uniform:0,1";
};

void add_data_options(CLI::App* cmd, DataOptions& o) {
    cmd->add_option("input", o.input, "CSV file with one observation per row")->required();
    cmd->add_option("--column", o.column, "column name or 0-based index (default: first column)");
    cmd->add_option("--background", o.background,
                    "known component: family:p1,p2 (uniform, normal, t, beta, poisson, binomial, exponential, "
                    "shifted_normal) or table:path.csv / table-step:path.csv")
        ->capture_default_str();
}

struct LoadedData {
    SortedSample sample;
    KnownCdf fb;
};

LoadedData load(const DataOptions& o) {
    KnownCdf fb = [&] {
        try {
            return parse_known_cdf(o.background);
        } catch (const std::exception& e) {
            throw InputError(std::string("--background: ") + e.what());
        }
    }();
    std::vector<double> values = cli::read_numeric_column(o.input, o.column);
    if (const auto* u = std::get_if<family::Uniform>(&fb.family())) {
        const auto outside = std::count_if(values.begin(), values.end(),
                                           [&](double x) { return x < u->lo || x > u->hi; });
        if (outside > 0)
            std::cerr << "warning: " << outside << " observation(s) outside [" << u->lo << ", " << u->hi
                      << "], the support of the uniform background\n";
    }
    return {SortedSample(std::move(values)), std::move(fb)};
}

std::string curve_csv(const CriterionCurve& c) {
    std::ostringstream os;
    os.precision(17);
    os << "gamma,criterion,second_difference\r\n";
    for (std::size_t k = 0; k < c.gammas.size(); ++k) {
        os << c.gammas[k] << ',' << c.values[k] << ',';
        if (k > 0 && k + 1 < c.gammas.size()) os << c.second_differences[k - 1];
        os << "\r\n";
    }
    return os.str();
}

Json elbow_json(const CriterionCurve& curve) {
    try {
        const ElbowEstimate e = elbow_estimate(curve);
        return Json{{"value", e.alpha},
                    {"argmax", e.argmax},
                    {"max_second_difference", e.max_second_difference},
                    {"peaks", e.peaks}};
    } catch (const std::domain_error&) {
        return nullptr;
    }
}

struct CriticalOptions {
    double beta = 0.05;
    std::string method = "auto";
    std::size_t replications = 10000;
    std::uint64_t seed = kDefaultSeed;
    bool no_cache = false;
};

void add_critical_options(CLI::App* cmd, CriticalOptions& o) {
    cmd->add_option("--beta", o.beta, "level of the lower confidence bound")->capture_default_str();
    cmd->add_option("--critical-value", o.method,
                    "auto (asymptotic for n >= 500), asymptotic or monte-carlo")
        ->check(CLI::IsMember({"auto", "asymptotic", "monte-carlo"}))
        ->capture_default_str();
    cmd->add_option("--mc-replications", o.replications, "Monte Carlo replications")->capture_default_str();
    cmd->add_option("--seed", o.seed, "seed of every randomized step")->capture_default_str();
    cmd->add_flag("--no-cache", o.no_cache, "do not read or write the quantile cache");
}

std::pair<CriticalValueSpec, double> resolve_critical(const CriticalOptions& o, std::size_t n, unsigned threads) {
    CriticalValueSpec spec;
    spec.n = n;
    spec.beta = o.beta;
    spec.replications = o.replications;
    spec.seed = o.seed;
    spec.threads = threads;
    if (o.method == "asymptotic")
        spec.method = CriticalValueMethod::asymptotic_cvm;
    else if (o.method == "monte-carlo")
        spec.method = CriticalValueMethod::monte_carlo;
    else
        spec.method = n >= 500 ? CriticalValueMethod::asymptotic_cvm : CriticalValueMethod::monte_carlo;
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    std::optional<QuantileCache> cache;
    if (!o.no_cache) cache.emplace(QuantileCache::default_path());
    const double c = critical_value(spec, cache ? &*cache : nullptr);
    // Untabulated levels are answered by simulation.
    if (spec.method == CriticalValueMethod::asymptotic_cvm && o.beta != 0.10 && o.beta != 0.05 && o.beta != 0.01)
        spec.method = CriticalValueMethod::monte_carlo;
    return {spec, c};
}

std::string method_name(CriticalValueMethod m) {
    return m == CriticalValueMethod::asymptotic_cvm ? "asymptotic" : "monte-carlo";
}

Json provenance(const std::string& command, const DataOptions& d, std::uint64_t seed) {
    return Json{{"tool", "mixsep"},
                {"version", MIXSEP_VERSION},
                {"command", command},
                {"input", d.input},
                {"column", d.column},
                {"seed", seed}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// estimate ------------------------------------------------------------------

struct EstimateOptions {
    DataOptions data;
    CriticalOptions critical;
    double tau = 0.1;
    std::size_t grid = 200;
    unsigned threads = 0;
    std::string output = "-";
    std::string curve_output;
    bool signal = false;
};

void cmd_estimate(const EstimateOptions& o) {
    if (!(o.tau > 0.0)) throw InputError("--tau must be positive");
    if (o.grid < 10) throw InputError("--grid must be at least 10");
    const auto [sample, fb] = load(o.data);
    const CriterionFunction crit(sample, fb);
    const std::size_t n = sample.size();

    double cn = 0.0;
    try {
        cn = default_cn(n, o.tau);
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("sample too small for c_n = tau log log n: ") + e.what());
    }
    const double alpha_hat = estimate_alpha_cn(crit, cn);
    const CriterionCurve curve = criterion_curve(crit, o.grid, o.threads);
    const auto [spec, lower_cn] = resolve_critical(o.critical, n, o.threads);
    const double lb = lower_bound(crit, lower_cn);

    Json report;
    report["n"] = n;
    report["background"] = fb.describe();
    report["tau"] = o.tau;
    report["c_n"] = cn;
    report["alpha_hat_cn"] = alpha_hat;
    report["alpha_tilde_elbow"] = elbow_json(curve);
    Json bound{{"value", lb}, {"beta", spec.beta}, {"c_n", lower_cn}, {"method", method_name(spec.method)}};
    if (spec.method == CriticalValueMethod::monte_carlo) {
        bound["replications"] = spec.replications;
        bound["seed"] = spec.seed;
    }
    report["alpha_lower_bound"] = bound;
    report["criterion_curve"] = Json{{"grid", o.grid},
                                     {"path", o.curve_output.empty() ? Json(nullptr) : Json(o.curve_output)}};
    if (!o.curve_output.empty()) cli::write_text(o.curve_output, curve_csv(curve));

    if (o.signal) {
        const Json& elbow = report["alpha_tilde_elbow"];
        if (elbow.is_null() || elbow["value"].get<double>() <= 0.0) {
            report["signal"] = nullptr;
        } else {
            const double a = elbow["value"].get<double>();
            const StepCdf step = estimate_fs(sample, fb, a);
            Json sig{{"alpha_used", a}, {"alpha_source", "elbow"}, {"fs_jumps", step.jumps().size()}};
            if (sample.values().front() >= 0.0) {
                const StepDensity dens = density_estimate(concavify(step));
                sig["density_at_zero"] = dens(0.0);
                sig["density_pieces"] = dens.values().size();
            }
            report["signal"] = sig;
        }
    }
    report["provenance"] = provenance("estimate", o.data, o.critical.seed);
    cli::write_text(o.output, dump(report));
}

// curve ---------------------------------------------------------------------

struct CurveOptions {
    DataOptions data;
    std::size_t grid = 200;
    unsigned threads = 0;
    std::string output = "-";
};

void cmd_curve(const CurveOptions& o) {
    if (o.grid < 10) throw InputError("--grid must be at least 10");
    const auto [sample, fb] = load(o.data);
    cli::write_text(o.output, curve_csv(criterion_curve(CriterionFunction(sample, fb), o.grid, o.threads)));
}

// signal --------------------------------------------------------------------

struct SignalOptions {
    DataOptions data;
    std::string alpha_source = "elbow";
    double alpha = -1.0;
    double tau = 0.1;
    std::size_t grid = 200;
    unsigned threads = 0;
    std::string out_dir = ".";
    std::string prefix = "signal";
    std::string output = "-";
    bool lfdr_all = false;
    bool fit_normal = false;
};

std::string two_column_csv(const char* a, const char* b, const std::vector<double>& x, const std::vector<double>& y) {
    std::ostringstream os;
    os.precision(17);
    os << a << ',' << b << "\r\n";
    for (std::size_t i = 0; i < x.size(); ++i) os << x[i] << ',' << y[i] << "\r\n";
    return os.str();
}

void cmd_signal(const SignalOptions& o) {
    const auto [sample, fb] = load(o.data);
    const CriterionFunction crit(sample, fb);

    double a = 0.0;
    if (o.alpha_source == "value") {
        if (!(o.alpha > 0.0 && o.alpha <= 1.0)) throw InputError("--alpha-source value needs --alpha in (0,1]");
        a = o.alpha;
    } else if (o.alpha_source == "cn") {
        a = estimate_alpha_cn(crit, default_cn(sample.size(), o.tau));
    } else {
        try {
            a = elbow_estimate(criterion_curve(crit, o.grid, o.threads)).alpha;
        } catch (const std::domain_error& e) {
            throw NumericalError(e.what());
        }
    }
    if (a <= 0.0) throw NumericalError("signal proportion zero: the estimated alpha is 0, nothing to recover");

    namespace fs = std::filesystem;
    const fs::path dir(o.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    auto file = [&](const char* what) { return dir / (o.prefix + "_" + what + ".csv"); };

    const StepCdf step = estimate_fs(sample, fb, a);
    cli::write_text(file("fs_step"), two_column_csv("x", "fs_step", step.jumps(), step.values()));

    Json report;
    report["n"] = sample.size();
    report["background"] = fb.describe();
    report["alpha_source"] = o.alpha_source;
    report["alpha_used"] = a;
    Json files{{"fs_step", file("fs_step").string()}};

    if (sample.values().front() >= 0.0) {
        const PiecewiseLinearConcaveFn concave = concavify(step);
        const StepDensity dens = density_estimate(concave);
        cli::write_text(file("fs_concave"), two_column_csv("x", "fs_concave", concave.knots(), concave.values()));
        {
            std::ostringstream os;
            os.precision(17);
            os << "x_left,x_right,density\r\n";
            for (std::size_t i = 0; i < dens.values().size(); ++i)
                os << dens.knots()[i] << ',' << dens.knots()[i + 1] << ',' << dens.values()[i] << "\r\n";
            cli::write_text(file("density"), os.str());
        }
        files["fs_concave"] = file("fs_concave").string();
        files["density"] = file("density").string();
        report["concave_knots"] = concave.knots().size();
        report["density_at_zero"] = dens(0.0);

        if (fb.has_density() && a < 1.0) {
            const bool p_values = std::holds_alternative<family::Uniform>(fb.family()) &&
                                  std::get<family::Uniform>(fb.family()).lo == 0.0 &&
                                  std::get<family::Uniform>(fb.family()).hi == 1.0;
            std::vector<double> pts;
            for (double x : sample.values())
                if ((o.lfdr_all || !p_values || x <= 0.05) && (pts.empty() || x != pts.back())) pts.push_back(x);
            const LfdrCurve l = lfdr(pts, a, dens, fb);
            cli::write_text(file("lfdr"), two_column_csv("x", "lfdr", l.points, l.values));
            files["lfdr"] = file("lfdr").string();
            report["lfdr_points"] = l.points.size();
        } else {
            report["lfdr_points"] = nullptr;
        }
    } else {
        std::cerr << "note: sample has negative values; skipping the concave majorant, density and lfdr\n";
        report["concave_knots"] = nullptr;
        report["density_at_zero"] = nullptr;
        report["lfdr_points"] = nullptr;
    }
    if (o.fit_normal) {
        const NormalFit f = fit_closest_normal(step, sample);
        report["normal_fit"] = Json{{"mean", f.mean}, {"sd", f.sd}, {"distance", f.distance}};
    }
    report["files"] = files;
    report["provenance"] = provenance("signal", o.data, kDefaultSeed);
    cli::write_text(o.output, dump(report));
}

// simulate ------------------------------------------------------------------

struct SimulateOptions {
    std::string config;
    std::string output_prefix = "metrics";
    std::optional<std::size_t> replications;
    std::optional<unsigned> threads;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ScenarioConfig load_config(const std::string& path) {
    try {
        return parse_scenario_config(read_file(path));
    } catch (const std::invalid_argument& e) {
        throw InputError(path + ": " + e.what());
    }
}

void cmd_simulate(const SimulateOptions& o) {
    ScenarioConfig cfg = load_config(o.config);
    if (o.replications) cfg.replications = *o.replications;
    if (o.threads) cfg.threads = *o.threads;
    const MetricsTable table = run_replications(cfg);
    cli::write_text(o.output_prefix + ".csv", to_csv(table));
    cli::write_text(o.output_prefix + ".json", to_json(table) + "\n");
    std::cout << to_csv(table);
}

// generate ------------------------------------------------------------------

struct GenerateOptions {
    std::string config;
    std::size_t replication = 0;
    std::string output = "-";
};

void cmd_generate(const GenerateOptions& o) {
    const ScenarioConfig cfg = load_config(o.config);
    std::ostringstream os;
    os.precision(17);
    os << "x\r\n";
    for (double x : generate(cfg, o.replication)) os << x << "\r\n";
    cli::write_text(o.output, os.str());
}

// identifiability -----------------------------------------------------------

struct IdentOptions {
    double alpha = 0.0;
    std::string fs;
    std::string fb;
    std::string fs_discrete;
    std::string fb_discrete;
    std::optional<double> kappa_s;
    std::optional<double> kappa_b;
    std::size_t grid = 100000;
    bool numeric = false;
};

KnownCdf parse_component(const std::string& flag, const std::string& text) {
    try {
        return parse_known_cdf(text);
    } catch (const std::exception& e) {
        throw InputError(flag + ": " + e.what());
    }
}

void cmd_identifiability(const IdentOptions& o) {
    if (!(o.alpha >= 0.0 && o.alpha <= 1.0)) throw InputError("--alpha must lie in [0,1]");
    Json out;
    out["alpha"] = o.alpha;
    double a0 = 0.0;
    try {
        if (o.kappa_s || o.kappa_b) {
            MixedComponents m;
            m.alpha = o.alpha;
            m.kappa_s = o.kappa_s.value_or(1.0);
            m.kappa_b = o.kappa_b.value_or(1.0);
            if (!o.fs.empty()) m.fs_continuous = parse_component("--fs", o.fs);
            if (!o.fb.empty()) m.fb_continuous = parse_component("--fb", o.fb);
            if (!o.fs_discrete.empty()) m.fs_discrete = parse_component("--fs-discrete", o.fs_discrete);
            if (!o.fb_discrete.empty()) m.fb_discrete = parse_component("--fb-discrete", o.fb_discrete);
            a0 = alpha0_mixed(m, o.grid);
            out["method"] = "mixed";
            out["kappa_s"] = m.kappa_s;
            out["kappa_b"] = m.kappa_b;
        } else {
            if (o.fs.empty() || o.fb.empty()) throw InputError("--fs and --fb are required");
            const MixtureSpec m{o.alpha, parse_component("--fs", o.fs), parse_component("--fb", o.fb)};
            const auto route = o.numeric ? Alpha0Route::numeric : Alpha0Route::closed_form_when_available;
            const bool closed = !o.numeric && closed_form_ratio(m.fs, m.fb).has_value();
            if (m.fs.is_discrete() && m.fb.is_discrete())
                a0 = alpha0_discrete(m, route);
            else if (m.fs.is_continuous() && m.fb.is_continuous())
                a0 = alpha0_continuous(m, o.grid, route);
            else
                throw InputError("one component is discrete and the other continuous; use --kappa-s/--kappa-b");
            out["method"] = closed ? "closed_form" : "numeric";
            out["fs"] = m.fs.describe();
            out["fb"] = m.fb.describe();
        }
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    out["alpha0"] = a0;
    out["identifiable"] = std::abs(a0 - o.alpha) <= 1e-9 * std::max(1.0, o.alpha);
    std::cout << dump(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Estimate the signal proportion of a two-component mixture with a known background"};
    app.set_version_flag("--version", MIXSEP_VERSION);
    app.require_subcommand(1);

    EstimateOptions est;
    auto* c_est = app.add_subcommand("estimate", "point estimates and lower confidence bound (JSON report)");
    add_data_options(c_est, est.data);
    add_critical_options(c_est, est.critical);
    c_est->add_option("--tau", est.tau, "c_n = tau log log n")->capture_default_str();
    c_est->add_option("--grid", est.grid, "criterion curve grid size")->capture_default_str();
    c_est->add_option("--threads", est.threads, "worker threads (0: all cores)")->capture_default_str();
    c_est->add_option("-o,--output", est.output, "report path ('-' for stdout)")->capture_default_str();
    c_est->add_option("--curve-output", est.curve_output, "also write the criterion curve CSV here");
    c_est->add_flag("--signal", est.signal, "add a signal-recovery summary at the elbow estimate");

    CurveOptions cur;
    auto* c_cur = app.add_subcommand("curve", "criterion curve as CSV (gamma, criterion, second_difference)");
    add_data_options(c_cur, cur.data);
    c_cur->add_option("--grid", cur.grid, "number of grid points")->capture_default_str();
    c_cur->add_option("--threads", cur.threads, "worker threads (0: all cores)")->capture_default_str();
    c_cur->add_option("-o,--output", cur.output, "CSV path ('-' for stdout)")->capture_default_str();

    SignalOptions sig;
    auto* c_sig = app.add_subcommand("signal", "recover the signal CDF, its density and the local fdr");
    add_data_options(c_sig, sig.data);
    c_sig->add_option("--alpha-source", sig.alpha_source, "elbow, cn or value")
        ->check(CLI::IsMember({"elbow", "cn", "value"}))
        ->capture_default_str();
    c_sig->add_option("--alpha", sig.alpha, "proportion for --alpha-source value");
    c_sig->add_option("--tau", sig.tau, "c_n = tau log log n for --alpha-source cn")->capture_default_str();
    c_sig->add_option("--grid", sig.grid, "criterion curve grid size")->capture_default_str();
    c_sig->add_option("--threads", sig.threads, "worker threads (0: all cores)")->capture_default_str();
    c_sig->add_option("--out-dir", sig.out_dir, "directory for the CSV files")->capture_default_str();
    c_sig->add_option("--prefix", sig.prefix, "CSV file name prefix")->capture_default_str();
    c_sig->add_option("-o,--output", sig.output, "JSON summary path ('-' for stdout)")->capture_default_str();
    c_sig->add_flag("--lfdr-all", sig.lfdr_all, "evaluate the lfdr at every observation, not only p <= 0.05");
    c_sig->add_flag("--fit-normal", sig.fit_normal, "report the closest normal CDF to the signal estimate");

    SimulateOptions sim;
    auto* c_sim = app.add_subcommand("simulate", "run a simulation config; writes <prefix>.csv and <prefix>.json");
    c_sim->add_option("config", sim.config, "JSON simulation config")->required();
    c_sim->add_option("--output-prefix", sim.output_prefix, "output path prefix")->capture_default_str();
    c_sim->add_option("--replications", sim.replications, "override the config's replication count");
    c_sim->add_option("--threads", sim.threads, "override the config's thread count");

    GenerateOptions gen;
    auto* c_gen = app.add_subcommand("generate", "write the data of one simulation replication as CSV");
    c_gen->add_option("config", gen.config, "JSON simulation config")->required();
    c_gen->add_option("--replication", gen.replication, "replication index")->capture_default_str();
    c_gen->add_option("-o,--output", gen.output, "CSV path ('-' for stdout)")->capture_default_str();

    IdentOptions idf;
    auto* c_idf = app.add_subcommand("identifiability", "identifiable proportion alpha0 of a specified mixture");
    c_idf->add_option("--alpha", idf.alpha, "mixing proportion")->required();
    c_idf->add_option("--fs", idf.fs, "signal component, e.g. poisson:2 (continuous part when mixed)");
    c_idf->add_option("--fb", idf.fb, "background component, e.g. poisson:1 (continuous part when mixed)");
    c_idf->add_option("--fs-discrete", idf.fs_discrete, "discrete part of the signal (mixed case)");
    c_idf->add_option("--fb-discrete", idf.fb_discrete, "discrete part of the background (mixed case)");
    c_idf->add_option("--kappa-s", idf.kappa_s, "weight of the signal's continuous part");
    c_idf->add_option("--kappa-b", idf.kappa_b, "weight of the background's continuous part");
    c_idf->add_option("--grid", idf.grid, "density-ratio grid size")->capture_default_str();
    c_idf->add_flag("--numeric", idf.numeric, "skip closed forms and use the numeric route");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }

    try {
        if (*c_est) cmd_estimate(est);
        else if (*c_cur) cmd_curve(cur);
        else if (*c_sig) cmd_signal(sig);
        else if (*c_sim) cmd_simulate(sim);
        else if (*c_gen) cmd_generate(gen);
        else if (*c_idf) cmd_identifiability(idf);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    }
    return 0;
}
