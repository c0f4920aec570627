#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "mixsep/confidence.hpp"
#include "mixsep/distributions.hpp"
#include "mixsep/identifiability.hpp"
#include "mixsep/mixture_core.hpp"
#include "mixsep/shape_restricted.hpp"
#include "mixsep/signal_recovery.hpp"
#include "mixsep/sim_harness.hpp"

namespace py = pybind11;
using namespace mixsep;

namespace {

CriticalValueSpec make_spec(std::size_t n, double beta, const std::string& method, std::size_t replications,
                            std::uint64_t seed) {
    CriticalValueSpec spec;
    spec.n = n;
    spec.beta = beta;
    spec.replications = replications;
    spec.seed = seed;
    if (method == "asymptotic")
        spec.method = CriticalValueMethod::asymptotic_cvm;
    else if (method == "monte_carlo")
        spec.method = CriticalValueMethod::monte_carlo;
    else
        throw std::invalid_argument("method must be 'asymptotic' or 'monte_carlo'");
    return spec;
}

py::dict curve_dict(const CriterionCurve& c) {
    py::dict d;
    d["gammas"] = c.gammas;
    d["values"] = c.values;
    d["second_differences"] = c.second_differences;
    return d;
}

py::dict elbow_dict(const ElbowEstimate& e) {
    py::dict d;
    d["alpha"] = e.alpha;
    d["argmax"] = e.argmax;
    d["max_second_difference"] = e.max_second_difference;
    d["peaks"] = e.peaks;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Estimation of the unknown component of a two-component mixture with a known background";

    py::class_<KnownCdf>(m, "Distribution")
        .def(py::init([](const std::string& spec) { return parse_known_cdf(spec); }), py::arg("spec"),
             "Parse a family spec such as 'uniform:0,1', 'normal:0,1', 'poisson:2' or 'table:path.csv'.")
        .def("cdf", &KnownCdf::cdf)
        .def("quantile", &KnownCdf::quantile)
        .def("density", &KnownCdf::density)
        .def("sample", &KnownCdf::sample, py::arg("n"), py::arg("seed"))
        .def_property_readonly("is_discrete", &KnownCdf::is_discrete)
        .def("__repr__", [](const KnownCdf& d) { return "Distribution('" + d.describe() + "')"; })
        .def("__str__", &KnownCdf::describe);
    py::implicitly_convertible<py::str, KnownCdf>();

    m.def(
        "isotonic_regression",
        [](const std::vector<double>& values, std::optional<std::vector<double>> weights) {
            if (!weights) return isotonic_regression(WeightedVector::unit(values));
            return isotonic_regression(values, *weights);
        },
        py::arg("values"), py::arg("weights") = py::none());

    m.def("default_cn", &default_cn, py::arg("n"), py::arg("tau") = 0.1);

    m.def(
        "criterion",
        [](const std::vector<double>& x, double gamma, const KnownCdf& fb) {
            return criterion(SortedSample(x), fb, gamma);
        },
        py::arg("x"), py::arg("gamma"), py::arg("background") = KnownCdf::uniform());

    m.def(
        "criterion_curve",
        [](const std::vector<double>& x, const KnownCdf& fb, std::size_t grid) {
            return curve_dict(criterion_curve(SortedSample(x), fb, grid));
        },
        py::arg("x"), py::arg("background") = KnownCdf::uniform(), py::arg("grid") = 200);

    m.def(
        "estimate_alpha",
        [](const std::vector<double>& x, const KnownCdf& fb, std::optional<double> c_n, double tau) {
            const SortedSample s(x);
            return estimate_alpha_cn(s, fb, c_n ? *c_n : default_cn(s.size(), tau));
        },
        py::arg("x"), py::arg("background") = KnownCdf::uniform(), py::arg("c_n") = py::none(),
        py::arg("tau") = 0.1, "Thresholded estimator; c_n defaults to tau * log(log(n)).");

    m.def(
        "elbow_estimate",
        [](const std::vector<double>& x, const KnownCdf& fb, std::size_t grid) {
            return elbow_dict(elbow_estimate(criterion_curve(SortedSample(x), fb, grid)));
        },
        py::arg("x"), py::arg("background") = KnownCdf::uniform(), py::arg("grid") = 200);

    m.def(
        "lower_bound",
        [](const std::vector<double>& x, const KnownCdf& fb, double beta, const std::string& method,
           std::size_t replications, std::uint64_t seed) {
            const SortedSample s(x);
            return lower_bound(s, fb, make_spec(s.size(), beta, method, replications, seed));
        },
        py::arg("x"), py::arg("background") = KnownCdf::uniform(), py::arg("beta") = 0.05,
        py::arg("method") = "asymptotic", py::arg("replications") = 10000, py::arg("seed") = 20140101);

    m.def(
        "homogeneity_test",
        [](const std::vector<double>& x, const KnownCdf& fb, double beta, const std::string& method,
           std::size_t replications, std::uint64_t seed) {
            const SortedSample s(x);
            const auto r = homogeneity_test(s, fb, make_spec(s.size(), beta, method, replications, seed));
            py::dict d;
            d["reject"] = r.reject;
            d["lower_bound"] = r.lower_bound;
            d["c_n"] = r.c_n;
            return d;
        },
        py::arg("x"), py::arg("background") = KnownCdf::uniform(), py::arg("beta") = 0.05,
        py::arg("method") = "asymptotic", py::arg("replications") = 10000, py::arg("seed") = 20140101);

    m.def("simulate_hn_quantile", &simulate_hn_quantile, py::arg("n"), py::arg("beta"),
          py::arg("replications") = 10000, py::arg("seed") = 20140101, py::arg("threads") = 1,
          py::call_guard<py::gil_scoped_release>());
    m.def("asymptotic_cvm_quantile", &asymptotic_cvm_quantile, py::arg("beta"),
          py::arg("allow_untabulated") = false);

    m.def(
        "recover_signal",
        [](const std::vector<double>& x, const KnownCdf& fb, double alpha) {
            const SortedSample s(x);
            py::dict d;
            const StepCdf step = estimate_fs(s, fb, alpha);
            d["alpha"] = alpha;
            d["step_jumps"] = step.jumps();
            d["step_values"] = step.values();
            if (!s.values().empty() && s.values().front() >= 0.0) {
                const auto conc = concavify(step);
                const auto dens = density_estimate(conc);
                d["concave_knots"] = conc.knots();
                d["concave_values"] = conc.values();
                d["density_knots"] = dens.knots();
                d["density_values"] = dens.values();
            }
            return d;
        },
        py::arg("x"), py::arg("background"), py::arg("alpha"),
        "Step estimate of F_s; for non-negative samples also the concave majorant and its density.");

    m.def(
        "lfdr",
        [](const std::vector<double>& points, const std::vector<double>& x, const KnownCdf& fb, double alpha) {
            const auto est = recover_signal(SortedSample(x), fb, alpha);
            return lfdr(points, alpha, est.density, fb).values;
        },
        py::arg("points"), py::arg("x"), py::arg("background"), py::arg("alpha"));

    m.def(
        "alpha0",
        [](double alpha, const KnownCdf& fs, const KnownCdf& fb, std::size_t grid) {
            return mixsep::alpha0(MixtureSpec{alpha, fs, fb}, grid);
        },
        py::arg("alpha"), py::arg("fs"), py::arg("fb"), py::arg("grid") = 100000);

    m.def(
        "generate",
        [](const std::string& config_json, std::size_t replication) {
            return generate(parse_scenario_config(config_json), replication);
        },
        py::arg("config_json"), py::arg("replication") = 0);

    m.def(
        "run_simulation",
        [](const std::string& config_json) {
            const auto cfg = parse_scenario_config(config_json);
            std::string out;
            {
                py::gil_scoped_release release;
                out = to_json(run_replications(cfg));
            }
            return out;
        },
        py::arg("config_json"), "Runs a simulation config and returns the metrics table as JSON text.");
}
