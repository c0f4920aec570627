#pragma once

#include <cstddef>
#include <optional>

#include "mixsep/distributions.hpp"

namespace mixsep {

/// A fully specified two-component mixture alpha * F_s + (1 - alpha) * F_b.
struct MixtureSpec {
    double alpha = 0.0;
    KnownCdf fs;
    KnownCdf fb;

    void validate() const;
};

/// Closed-form shortcuts where a family pair has one, or always the generic
/// numeric route (atom enumeration / density-ratio grid).
enum class Alpha0Route { closed_form_when_available, numeric };

/// inf over atoms x of F_b of J_s(x) / J_b(x); 0 when F_b has an atom that F_s lacks.
double inf_jump_ratio(const KnownCdf& fs, const KnownCdf& fb);

/// Grid approximation of ess inf f_s / f_b over the support of f_b. The grid
/// is F_b quantiles at k / (grid + 1), extended geometrically into both tails
/// until the background log-density drops below -5000 or leaves its support.
double essinf_density_ratio(const KnownCdf& fs, const KnownCdf& fb, std::size_t grid = 100000);

/// Closed-form infimum ratio for Poisson, same-size binomial, normal and
/// exponential pairs; nullopt for any other pair.
std::optional<double> closed_form_ratio(const KnownCdf& fs, const KnownCdf& fb);

double alpha0_discrete(const MixtureSpec& m, Alpha0Route route = Alpha0Route::closed_form_when_available);
double alpha0_continuous(const MixtureSpec& m, std::size_t grid = 100000,
                         Alpha0Route route = Alpha0Route::closed_form_when_available);

/// Discrete or continuous according to the component types; mixed-type pairs
/// must go through alpha0_mixed.
double alpha0(const MixtureSpec& m, std::size_t grid = 100000);

/// Components written as kappa * (absolutely continuous part) +
/// (1 - kappa) * (discrete part). A part may be absent only when its weight is 0.
struct MixedComponents {
    double alpha = 0.0;
    double kappa_s = 1.0;
    double kappa_b = 1.0;
    std::optional<KnownCdf> fs_continuous;
    std::optional<KnownCdf> fb_continuous;
    std::optional<KnownCdf> fs_discrete;
    std::optional<KnownCdf> fb_discrete;
};

/// alpha - min{(alpha kappa_s - alpha0_a kappa) / kappa_b,
///             (alpha (1 - kappa_s) - alpha0_d (1 - kappa)) / (1 - kappa_b)}
/// with kappa = alpha kappa_s + (1 - alpha) kappa_b. A term whose denominator
/// vanishes is dropped.
double alpha0_mixed(const MixedComponents& m, std::size_t grid = 100000);

}  // namespace mixsep
