#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mixsep/random.hpp"

namespace mixsep {

enum class Interpolation { linear, step };

namespace family {

struct Uniform {
    double lo = 0.0;
    double hi = 1.0;
};
struct Normal {
    double mean = 0.0;
    double sd = 1.0;
};
struct StudentT {
    double df = 1.0;
};
struct Beta {
    double a = 1.0;
    double b = 1.0;
};
struct Poisson {
    double rate = 1.0;
};
struct Binomial {
    int trials = 1;
    double prob = 0.5;
};
/// Density exp(-(x - location)/scale)/scale on (location, inf).
struct Exponential {
    double location = 0.0;
    double scale = 1.0;
};
/// Law of Z + S*M with Z ~ N(0,1), M ~ Uniform(shift_lo, shift_hi) and an
/// independent fair sign S. Alternative z-scores with |mean| spread over an interval.
struct ShiftedNormal {
    double shift_lo = 1.0;
    double shift_hi = 2.0;
};
/// CDF given on a grid. Linear mode interpolates between grid points
/// (continuous surrogate); step mode is right-continuous with jumps at the grid.
struct Tabulated {
    std::vector<double> x;
    std::vector<double> cdf;
    Interpolation mode = Interpolation::linear;
};

}  // namespace family

/// A point mass of a discrete distribution.
struct Atom {
    double x;
    double mass;
    double log_mass;
};

/// A fully specified distribution on the real line. Immutable after construction.
class KnownCdf {
public:
    using Family = std::variant<family::Uniform, family::Normal, family::StudentT, family::Beta,
                                family::Poisson, family::Binomial, family::Exponential,
                                family::ShiftedNormal, family::Tabulated>;

    /// Validates parameters; throws std::invalid_argument.
    explicit KnownCdf(Family f);

    static KnownCdf uniform(double lo = 0.0, double hi = 1.0);
    static KnownCdf normal(double mean = 0.0, double sd = 1.0);
    static KnownCdf student_t(double df);
    static KnownCdf beta(double a, double b);
    static KnownCdf poisson(double rate);
    static KnownCdf binomial(int trials, double prob);
    static KnownCdf exponential(double location, double scale);
    static KnownCdf shifted_normal(double shift_lo, double shift_hi);
    static KnownCdf tabulated(std::vector<double> x, std::vector<double> cdf,
                              Interpolation mode = Interpolation::linear);
    /// Two-column CSV (x, F(x)); header optional.
    static KnownCdf from_csv(const std::filesystem::path& path,
                             Interpolation mode = Interpolation::linear);

    const Family& family() const { return family_; }

    double cdf(double x) const;
    /// Density for continuous families, probability mass for discrete ones.
    /// Tabulated tables have none.
    double density(double x) const;
    double log_density(double x) const;
    /// Generalized inverse inf{t : p <= F(t)} for p in (0, 1).
    double quantile(double p) const;

    double draw(Rng& rng) const;
    std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

    bool is_discrete() const;
    bool is_continuous() const { return !is_discrete(); }
    bool has_density() const;

    /// Atoms of a discrete law. Infinite supports are cut once the per-atom
    /// log-mass falls below min_log_mass past the mode.
    std::vector<Atom> atoms(double min_log_mass = -700.0) const;

    /// Round-trippable text form, e.g. "normal:0,1" or "beta:1,10".
    std::string describe() const;

private:
    Family family_;
};

/// Parses "family:p1,p2", "table:path.csv" or "table-step:path.csv".
KnownCdf parse_known_cdf(std::string_view spec);

/// Y_i = Psi^{-1}(X_i) where Psi is the CDF of d (generalized inverse).
/// Discrete and step-tabulated laws have no continuous inverse and are rejected.
std::vector<double> push_through_quantile(std::span<const double> xs, const KnownCdf& d);

/// P(a < Z <= b) for standard normal Z, accurate in both tails.
double normal_interval(double a, double b);

}  // namespace mixsep
