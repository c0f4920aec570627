#include "mixsep/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace mixsep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z - kLogSqrt2Pi); }

// Integral of Phi: G(t) = t * Phi(t) + phi(t).
double normal_cdf_integral(double t) { return t * std_normal_cdf(t) + std_normal_pdf(t); }

// Shortest text that parses back to v.
std::string format_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double poisson_log_pmf(double rate, double k) {
    return k * std::log(rate) - rate - std::lgamma(k + 1.0);
}

double binomial_log_pmf(int n, double p, int k) {
    if (p == 0.0) return k == 0 ? 0.0 : -kInf;
    if (p == 1.0) return k == n ? 0.0 : -kInf;
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
           k * std::log(p) + (n - k) * std::log1p(-p);
}

bool is_integer(double x) { return std::isfinite(x) && x == std::floor(x); }

double tabulated_cdf(const family::Tabulated& t, double x) {
    if (x < t.x.front()) return 0.0;
    if (x >= t.x.back()) return 1.0;
    const auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - t.x.begin());
    const std::size_t lo = hi - 1;
    if (t.mode == Interpolation::step) return t.cdf[lo];
    const double w = (x - t.x[lo]) / (t.x[hi] - t.x[lo]);
    return t.cdf[lo] + w * (t.cdf[hi] - t.cdf[lo]);
}

double tabulated_quantile(const family::Tabulated& t, double p) {
    // First grid index whose value reaches p.
    const auto it = std::lower_bound(t.cdf.begin(), t.cdf.end(), p);
    const std::size_t hi = static_cast<std::size_t>(it - t.cdf.begin());
    if (t.mode == Interpolation::step || hi == 0) return t.x[hi];
    const std::size_t lo = hi - 1;
    const double rise = t.cdf[hi] - t.cdf[lo];
    return t.x[lo] + (p - t.cdf[lo]) / rise * (t.x[hi] - t.x[lo]);
}

double bisect_quantile(const KnownCdf& d, double p, double lo, double hi) {
    while (d.cdf(lo) >= p) lo -= 2.0 * (hi - lo);
    while (d.cdf(hi) < p) hi += 2.0 * (hi - lo);
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (d.cdf(mid) >= p)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

void validate(const KnownCdf::Family& f) {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    };
    std::visit(Overloaded{
                   [&](const family::Uniform& u) {
                       require(std::isfinite(u.lo) && std::isfinite(u.hi) && u.lo < u.hi,
                               "uniform requires lo < hi");
                   },
                   [&](const family::Normal& n) {
                       require(std::isfinite(n.mean) && n.sd > 0 && std::isfinite(n.sd),
                               "normal requires sd > 0");
                   },
                   [&](const family::StudentT& t) {
                       require(t.df > 0 && std::isfinite(t.df), "student-t requires df > 0");
                   },
                   [&](const family::Beta& b) {
                       require(b.a > 0 && b.b > 0 && std::isfinite(b.a) && std::isfinite(b.b),
                               "beta requires a > 0 and b > 0");
                   },
                   [&](const family::Poisson& p) {
                       require(p.rate > 0 && std::isfinite(p.rate), "poisson requires rate > 0");
                   },
                   [&](const family::Binomial& b) {
                       require(b.trials >= 1, "binomial requires trials >= 1");
                       require(b.prob >= 0 && b.prob <= 1, "binomial requires prob in [0,1]");
                   },
                   [&](const family::Exponential& e) {
                       require(std::isfinite(e.location) && e.scale > 0 && std::isfinite(e.scale),
                               "exponential requires scale > 0");
                   },
                   [&](const family::ShiftedNormal& s) {
                       require(std::isfinite(s.shift_lo) && std::isfinite(s.shift_hi) &&
                                   0 <= s.shift_lo && s.shift_lo < s.shift_hi,
                               "shifted normal requires 0 <= shift_lo < shift_hi");
                   },
                   [&](const family::Tabulated& t) {
                       require(!t.x.empty(), "tabulated cdf needs at least one grid point");
                       require(t.x.size() == t.cdf.size(), "tabulated x and cdf differ in length");
                       for (std::size_t i = 0; i < t.x.size(); ++i) {
                           require(std::isfinite(t.x[i]) && std::isfinite(t.cdf[i]),
                                   "tabulated cdf contains non-finite entries");
                           if (i > 0) {
                               require(t.x[i] > t.x[i - 1], "tabulated x grid must be strictly increasing");
                               require(t.cdf[i] >= t.cdf[i - 1], "tabulated cdf must be non-decreasing");
                           }
                       }
                       require(t.cdf.front() >= 0.0, "tabulated cdf must start at a value >= 0");
                       require(std::abs(t.cdf.back() - 1.0) <= 1e-9, "tabulated cdf must reach 1");
                   },
               },
               f);
}

std::vector<double> parse_params(std::string_view text) {
    std::vector<double> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        std::string_view tok = text.substr(0, comma);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        double v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size())
            throw std::invalid_argument("cannot parse distribution parameter '" + std::string(tok) + "'");
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

}  // namespace

double normal_interval(double a, double b) {
    if (!(b > a)) return 0.0;
    // Work in the tail where the complementary function is small.
    if (a >= 0.0) return 0.5 * (std::erfc(a / std::numbers::sqrt2) - std::erfc(b / std::numbers::sqrt2));
    if (b <= 0.0) return 0.5 * (std::erfc(-b / std::numbers::sqrt2) - std::erfc(-a / std::numbers::sqrt2));
    return 1.0 - std_normal_cdf(a) - (1.0 - std_normal_cdf(b));
}

KnownCdf::KnownCdf(Family f) : family_(std::move(f)) {
    validate(family_);
    if (auto* t = std::get_if<family::Tabulated>(&family_)) t->cdf.back() = 1.0;
}

KnownCdf KnownCdf::uniform(double lo, double hi) { return KnownCdf(family::Uniform{lo, hi}); }
KnownCdf KnownCdf::normal(double mean, double sd) { return KnownCdf(family::Normal{mean, sd}); }
KnownCdf KnownCdf::student_t(double df) { return KnownCdf(family::StudentT{df}); }
KnownCdf KnownCdf::beta(double a, double b) { return KnownCdf(family::Beta{a, b}); }
KnownCdf KnownCdf::poisson(double rate) { return KnownCdf(family::Poisson{rate}); }
KnownCdf KnownCdf::binomial(int trials, double prob) { return KnownCdf(family::Binomial{trials, prob}); }
KnownCdf KnownCdf::exponential(double location, double scale) {
    return KnownCdf(family::Exponential{location, scale});
}
KnownCdf KnownCdf::shifted_normal(double shift_lo, double shift_hi) {
    return KnownCdf(family::ShiftedNormal{shift_lo, shift_hi});
}
KnownCdf KnownCdf::tabulated(std::vector<double> x, std::vector<double> cdf, Interpolation mode) {
    return KnownCdf(family::Tabulated{std::move(x), std::move(cdf), mode});
}

KnownCdf KnownCdf::from_csv(const std::filesystem::path& path, Interpolation mode) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open tabulated cdf file " + path.string());
    std::vector<double> xs, fs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                        ": expected two comma-separated columns");
        std::vector<double> row;
        try {
            row = parse_params(line);
        } catch (const std::invalid_argument&) {
            if (line_no == 1 && xs.empty()) continue;  // header
            throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                        ": non-numeric entry");
        }
        if (row.size() != 2)
            throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                        ": expected two columns");
        xs.push_back(row[0]);
        fs.push_back(row[1]);
    }
    return tabulated(std::move(xs), std::move(fs), mode);
}

double KnownCdf::cdf(double x) const {
    if (std::isnan(x)) throw std::invalid_argument("cdf evaluated at NaN");
    return std::visit(
        Overloaded{
            [&](const family::Uniform& u) { return std::clamp((x - u.lo) / (u.hi - u.lo), 0.0, 1.0); },
            [&](const family::Normal& n) { return std_normal_cdf((x - n.mean) / n.sd); },
            [&](const family::StudentT& t) {
                if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
                return boost::math::cdf(boost::math::students_t_distribution<>(t.df), x);
            },
            [&](const family::Beta& b) {
                if (x <= 0.0) return 0.0;
                if (x >= 1.0) return 1.0;
                return boost::math::ibeta(b.a, b.b, x);
            },
            [&](const family::Poisson& p) {
                if (x < 0.0) return 0.0;
                if (std::isinf(x)) return 1.0;
                return boost::math::gamma_q(std::floor(x) + 1.0, p.rate);
            },
            [&](const family::Binomial& b) {
                if (x < 0.0) return 0.0;
                if (x >= b.trials) return 1.0;
                return boost::math::cdf(boost::math::binomial_distribution<>(b.trials, b.prob),
                                        std::floor(x));
            },
            [&](const family::Exponential& e) {
                if (x <= e.location) return 0.0;
                return -std::expm1(-(x - e.location) / e.scale);
            },
            [&](const family::ShiftedNormal& s) {
                if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
                // Symmetric law: evaluate the left tail only, where nothing cancels near 1.
                const double y = -std::abs(x);
                const double w = s.shift_hi - s.shift_lo;
                const double left = (normal_cdf_integral(y - s.shift_lo) - normal_cdf_integral(y - s.shift_hi) +
                                     normal_cdf_integral(y + s.shift_hi) - normal_cdf_integral(y + s.shift_lo)) /
                                    (2.0 * w);
                const double v = std::clamp(left, 0.0, 0.5);
                return x > 0.0 ? 1.0 - v : v;
            },
            [&](const family::Tabulated& t) { return tabulated_cdf(t, x); },
        },
        family_);
}

double KnownCdf::log_density(double x) const {
    return std::visit(
        Overloaded{
            [&](const family::Uniform& u) {
                return (x >= u.lo && x <= u.hi) ? -std::log(u.hi - u.lo) : -kInf;
            },
            [&](const family::Normal& n) {
                const double z = (x - n.mean) / n.sd;
                return -0.5 * z * z - kLogSqrt2Pi - std::log(n.sd);
            },
            [&](const family::StudentT& t) {
                const double v = t.df;
                return std::lgamma(0.5 * (v + 1)) - std::lgamma(0.5 * v) -
                       0.5 * std::log(v * std::numbers::pi) - 0.5 * (v + 1) * std::log1p(x * x / v);
            },
            [&](const family::Beta& b) {
                if (x < 0.0 || x > 1.0) return -kInf;
                const double lbeta = std::lgamma(b.a) + std::lgamma(b.b) - std::lgamma(b.a + b.b);
                const double left = b.a == 1.0 ? 0.0 : (b.a - 1.0) * std::log(x);
                const double right = b.b == 1.0 ? 0.0 : (b.b - 1.0) * std::log1p(-x);
                return left + right - lbeta;
            },
            [&](const family::Poisson& p) {
                if (x < 0.0 || !is_integer(x)) return -kInf;
                return poisson_log_pmf(p.rate, x);
            },
            [&](const family::Binomial& b) {
                if (x < 0.0 || x > b.trials || !is_integer(x)) return -kInf;
                return binomial_log_pmf(b.trials, b.prob, static_cast<int>(x));
            },
            [&](const family::Exponential& e) {
                if (x < e.location) return -kInf;
                return -(x - e.location) / e.scale - std::log(e.scale);
            },
            [&](const family::ShiftedNormal& s) {
                const double w = s.shift_hi - s.shift_lo;
                const double mass = normal_interval(x - s.shift_hi, x - s.shift_lo) +
                                    normal_interval(x + s.shift_lo, x + s.shift_hi);
                return std::log(mass) - std::log(2.0 * w);
            },
            [&](const family::Tabulated&) -> double {
                throw std::invalid_argument("no density");
            },
        },
        family_);
}

double KnownCdf::density(double x) const {
    if (std::isnan(x)) throw std::invalid_argument("density evaluated at NaN");
    if (const auto* b = std::get_if<family::Beta>(&family_)) {
        if (x < 0.0 || x > 1.0) return 0.0;
        return boost::math::pdf(boost::math::beta_distribution<>(b->a, b->b), x);
    }
    return std::exp(log_density(x));
}

double KnownCdf::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile level must lie in (0,1)");
    return std::visit(
        Overloaded{
            [&](const family::Uniform& u) { return u.lo + p * (u.hi - u.lo); },
            [&](const family::Normal& n) {
                return boost::math::quantile(boost::math::normal_distribution<>(n.mean, n.sd), p);
            },
            [&](const family::StudentT& t) {
                return boost::math::quantile(boost::math::students_t_distribution<>(t.df), p);
            },
            [&](const family::Beta& b) { return boost::math::ibeta_inv(b.a, b.b, p); },
            [&](const family::Poisson&) {
                double k = 0.0;
                while (cdf(k) < p) k += 1.0;
                return k;
            },
            [&](const family::Binomial& b) {
                int k = 0;
                while (k < b.trials && cdf(k) < p) ++k;
                return static_cast<double>(k);
            },
            [&](const family::Exponential& e) { return e.location - e.scale * std::log1p(-p); },
            [&](const family::ShiftedNormal& s) {
                return bisect_quantile(*this, p, -s.shift_hi - 10.0, s.shift_hi + 10.0);
            },
            [&](const family::Tabulated& t) { return tabulated_quantile(t, p); },
        },
        family_);
}

double KnownCdf::draw(Rng& rng) const {
    return std::visit(
        Overloaded{
            [&](const family::Uniform& u) { return u.lo + rng.uniform() * (u.hi - u.lo); },
            [&](const family::Normal& n) { return n.mean + n.sd * rng.normal(); },
            [&](const family::Beta& b) {
                const double u = rng.uniform();
                if (b.a == 1.0) return -std::expm1(std::log(u) / b.b);
                if (b.b == 1.0) return std::pow(u, 1.0 / b.a);
                return boost::math::ibeta_inv(b.a, b.b, u);
            },
            [&](const family::Exponential& e) { return e.location - e.scale * std::log(rng.uniform()); },
            [&](const family::ShiftedNormal& s) {
                const double z = rng.normal();
                const double m = s.shift_lo + rng.uniform() * (s.shift_hi - s.shift_lo);
                return (rng.next() >> 63) ? z + m : z - m;
            },
            [&](const auto&) { return quantile(rng.uniform()); },
        },
        family_);
}

std::vector<double> KnownCdf::sample(std::size_t n, std::uint64_t seed) const {
    Rng rng(seed);
    std::vector<double> out(n);
    for (double& v : out) v = draw(rng);
    return out;
}

bool KnownCdf::is_discrete() const {
    if (std::holds_alternative<family::Poisson>(family_) || std::holds_alternative<family::Binomial>(family_))
        return true;
    if (const auto* t = std::get_if<family::Tabulated>(&family_)) return t->mode == Interpolation::step;
    return false;
}

bool KnownCdf::has_density() const { return !std::holds_alternative<family::Tabulated>(family_); }

std::vector<Atom> KnownCdf::atoms(double min_log_mass) const {
    std::vector<Atom> out;
    if (const auto* p = std::get_if<family::Poisson>(&family_)) {
        const double mode = std::floor(p->rate);
        for (double k = 0.0;; k += 1.0) {
            const double lm = poisson_log_pmf(p->rate, k);
            if (k > mode && lm < min_log_mass) break;
            out.push_back({k, std::exp(lm), lm});
        }
    } else if (const auto* b = std::get_if<family::Binomial>(&family_)) {
        for (int k = 0; k <= b->trials; ++k) {
            const double lm = binomial_log_pmf(b->trials, b->prob, k);
            if (lm == -kInf) continue;
            out.push_back({static_cast<double>(k), std::exp(lm), lm});
        }
    } else if (const auto* t = std::get_if<family::Tabulated>(&family_);
               t && t->mode == Interpolation::step) {
        double prev = 0.0;
        for (std::size_t i = 0; i < t->x.size(); ++i) {
            const double jump = t->cdf[i] - prev;
            prev = t->cdf[i];
            if (jump > 0.0) out.push_back({t->x[i], jump, std::log(jump)});
        }
    } else {
        throw std::invalid_argument("atoms requested for a distribution without point masses");
    }
    return out;
}

std::string KnownCdf::describe() const {
    return std::visit(
        Overloaded{
            [](const family::Uniform& u) { return "uniform:" + format_number(u.lo) + "," + format_number(u.hi); },
            [](const family::Normal& n) { return "normal:" + format_number(n.mean) + "," + format_number(n.sd); },
            [](const family::StudentT& t) { return "t:" + format_number(t.df); },
            [](const family::Beta& b) { return "beta:" + format_number(b.a) + "," + format_number(b.b); },
            [](const family::Poisson& p) { return "poisson:" + format_number(p.rate); },
            [](const family::Binomial& b) {
                return "binomial:" + std::to_string(b.trials) + "," + format_number(b.prob);
            },
            [](const family::Exponential& e) {
                return "exponential:" + format_number(e.location) + "," + format_number(e.scale);
            },
            [](const family::ShiftedNormal& s) {
                return "shifted_normal:" + format_number(s.shift_lo) + "," + format_number(s.shift_hi);
            },
            [](const family::Tabulated& t) {
                return std::string(t.mode == Interpolation::step ? "table-step" : "table") + "[" +
                       std::to_string(t.x.size()) + " points]";
            },
        },
        family_);
}

KnownCdf parse_known_cdf(std::string_view spec) {
    const auto colon = spec.find(':');
    std::string name(spec.substr(0, colon));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);

    if (name == "table" || name == "table-step")
        return KnownCdf::from_csv(std::string(rest), name == "table" ? Interpolation::linear : Interpolation::step);

    const std::vector<double> p = parse_params(rest);
    auto arity = [&](std::size_t lo, std::size_t hi) {
        if (p.size() < lo || p.size() > hi)
            throw std::invalid_argument("wrong number of parameters for '" + name + "'");
    };
    if (name == "uniform") {
        arity(0, 2);
        if (p.empty()) return KnownCdf::uniform();
        arity(2, 2);
        return KnownCdf::uniform(p[0], p[1]);
    }
    if (name == "normal") {
        arity(0, 2);
        if (p.empty()) return KnownCdf::normal();
        arity(2, 2);
        return KnownCdf::normal(p[0], p[1]);
    }
    if (name == "t" || name == "student_t") {
        arity(1, 1);
        return KnownCdf::student_t(p[0]);
    }
    if (name == "beta") {
        arity(2, 2);
        return KnownCdf::beta(p[0], p[1]);
    }
    if (name == "poisson") {
        arity(1, 1);
        return KnownCdf::poisson(p[0]);
    }
    if (name == "binomial") {
        arity(2, 2);
        if (!is_integer(p[0])) throw std::invalid_argument("binomial trials must be an integer");
        return KnownCdf::binomial(static_cast<int>(p[0]), p[1]);
    }
    if (name == "exponential") {
        arity(2, 2);
        return KnownCdf::exponential(p[0], p[1]);
    }
    if (name == "shifted_normal") {
        arity(2, 2);
        return KnownCdf::shifted_normal(p[0], p[1]);
    }
    throw std::invalid_argument("unknown distribution family '" + name + "'");
}

std::vector<double> push_through_quantile(std::span<const double> xs, const KnownCdf& d) {
    if (d.is_discrete()) throw std::invalid_argument("non-invertible transform");
    std::vector<double> out(xs.size());
    std::transform(xs.begin(), xs.end(), out.begin(), [&](double x) { return d.quantile(x); });
    return out;
}

}  // namespace mixsep
