#include "mixsep/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>

namespace mixsep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_mass_at(const KnownCdf& d, double x) {
    if (const auto* t = std::get_if<family::Tabulated>(&d.family())) {
        const auto it = std::find(t->x.begin(), t->x.end(), x);
        if (it == t->x.end()) return -kInf;
        const std::size_t i = static_cast<std::size_t>(it - t->x.begin());
        const double jump = t->cdf[i] - (i == 0 ? 0.0 : t->cdf[i - 1]);
        return jump > 0.0 ? std::log(jump) : -kInf;
    }
    return d.log_density(x);
}

double clamp_alpha0(double alpha, double ratio) {
    return std::clamp(alpha * (1.0 - std::clamp(ratio, 0.0, 1.0)), 0.0, alpha);
}

void require_density(const KnownCdf& d) {
    if (!d.has_density() || d.is_discrete())
        throw std::invalid_argument("density unavailable for " + d.describe());
}

}  // namespace

void MixtureSpec::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
}

double inf_jump_ratio(const KnownCdf& fs, const KnownCdf& fb) {
    if (!fs.is_discrete() || !fb.is_discrete())
        throw std::invalid_argument("jump ratio needs two discrete distributions");
    double best = kInf;
    for (const Atom& atom : fb.atoms()) {
        const double ls = log_mass_at(fs, atom.x);
        if (ls == -kInf) return 0.0;
        best = std::min(best, std::exp(ls - atom.log_mass));
    }
    return best;
}

double essinf_density_ratio(const KnownCdf& fs, const KnownCdf& fb, std::size_t grid) {
    require_density(fs);
    require_density(fb);
    if (grid < 2) throw std::invalid_argument("density-ratio grid needs at least 2 points");

    double best = kInf;
    auto visit = [&](double x) {
        const double lb = fb.log_density(x);
        if (lb == -kInf || std::isnan(lb)) return false;
        const double ls = fs.log_density(x);
        if (ls != -kInf)
            best = std::min(best, std::exp(ls - lb));
        else if (lb > -700.0)  // below that an underflowing f_s says nothing
            best = 0.0;
        return lb > -5000.0;
    };

    const double denom = static_cast<double>(grid) + 1.0;
    const double first = fb.quantile(1.0 / denom);
    const double last = fb.quantile(static_cast<double>(grid) / denom);
    for (std::size_t k = 1; k <= grid; ++k) visit(fb.quantile(static_cast<double>(k) / denom));

    const double width = std::max(last - first, 1e-8);
    for (int k = 0; k < 60; ++k)
        if (!visit(first - width * std::ldexp(1.0, k) / 64.0)) break;
    for (int k = 0; k < 60; ++k)
        if (!visit(last + width * std::ldexp(1.0, k) / 64.0)) break;
    return best;
}

std::optional<double> closed_form_ratio(const KnownCdf& fs, const KnownCdf& fb) {
    const auto& s = fs.family();
    const auto& b = fb.family();

    if (const auto* ps = std::get_if<family::Poisson>(&s))
        if (const auto* pb = std::get_if<family::Poisson>(&b)) {
            if (ps->rate < pb->rate) return 0.0;
            return std::exp(pb->rate - ps->rate);
        }

    if (const auto* bs = std::get_if<family::Binomial>(&s))
        if (const auto* bb = std::get_if<family::Binomial>(&b)) {
            if (bs->trials != bb->trials || bb->prob <= 0.0 || bb->prob >= 1.0) return std::nullopt;
            const double n = bs->trials;
            if (bs->prob >= bb->prob) return std::pow((1.0 - bs->prob) / (1.0 - bb->prob), n);
            return std::pow(bs->prob / bb->prob, n);
        }

    if (const auto* ns = std::get_if<family::Normal>(&s))
        if (const auto* nb = std::get_if<family::Normal>(&b)) {
            if (ns->sd < nb->sd) return 0.0;
            if (ns->sd == nb->sd) return ns->mean == nb->mean ? 1.0 : 0.0;
            // Log ratio is a quadratic opening upwards; evaluate at its vertex.
            const double delta = ns->mean - nb->mean;
            const double vs = ns->sd * ns->sd;
            const double vb = nb->sd * nb->sd;
            return nb->sd / ns->sd * std::exp(-delta * delta / (2.0 * (vs - vb)));
        }

    if (const auto* es = std::get_if<family::Exponential>(&s))
        if (const auto* eb = std::get_if<family::Exponential>(&b)) {
            if (es->location > eb->location) return 0.0;  // support of f_s strictly inside
            if (es->scale < eb->scale) return 0.0;        // ratio decays in the right tail
            // Non-decreasing ratio on (a_b, inf): infimum at the left end.
            return eb->scale / es->scale * std::exp(-(eb->location - es->location) / es->scale);
        }

    return std::nullopt;
}

double alpha0_discrete(const MixtureSpec& m, Alpha0Route route) {
    m.validate();
    if (!m.fs.is_discrete() || !m.fb.is_discrete())
        throw std::invalid_argument("alpha0_discrete needs two discrete components");
    if (route == Alpha0Route::closed_form_when_available)
        if (auto r = closed_form_ratio(m.fs, m.fb)) return clamp_alpha0(m.alpha, *r);
    return clamp_alpha0(m.alpha, inf_jump_ratio(m.fs, m.fb));
}

double alpha0_continuous(const MixtureSpec& m, std::size_t grid, Alpha0Route route) {
    m.validate();
    require_density(m.fs);
    require_density(m.fb);
    if (route == Alpha0Route::closed_form_when_available)
        if (auto r = closed_form_ratio(m.fs, m.fb)) return clamp_alpha0(m.alpha, *r);
    return clamp_alpha0(m.alpha, essinf_density_ratio(m.fs, m.fb, grid));
}

double alpha0(const MixtureSpec& m, std::size_t grid) {
    if (m.fs.is_discrete() && m.fb.is_discrete()) return alpha0_discrete(m);
    if (m.fs.is_continuous() && m.fb.is_continuous()) return alpha0_continuous(m, grid);
    throw std::invalid_argument("components of different type; describe them with alpha0_mixed");
}

double alpha0_mixed(const MixedComponents& m, std::size_t grid) {
    const double a = m.alpha;
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
    for (double k : {m.kappa_s, m.kappa_b})
        if (!(k >= 0.0 && k <= 1.0)) throw std::invalid_argument("kappa must lie in [0,1]");
    auto need = [](const std::optional<KnownCdf>& part, double weight, const char* name) {
        if (weight > 0.0 && !part) throw std::invalid_argument(std::string("missing component part: ") + name);
    };
    need(m.fs_continuous, m.kappa_s, "fs continuous");
    need(m.fb_continuous, m.kappa_b, "fb continuous");
    need(m.fs_discrete, 1.0 - m.kappa_s, "fs discrete");
    need(m.fb_discrete, 1.0 - m.kappa_b, "fb discrete");

    const double kappa = a * m.kappa_s + (1.0 - a) * m.kappa_b;
    double eps = kInf;

    if (m.kappa_b > 0.0) {
        double alpha0_a = 0.0;
        if (m.kappa_s > 0.0) {
            const double alpha_a = a * m.kappa_s / kappa;
            alpha0_a = alpha_a * (1.0 - std::clamp(essinf_density_ratio(*m.fs_continuous, *m.fb_continuous, grid),
                                                   0.0, 1.0));
        }
        eps = std::min(eps, (a * m.kappa_s - alpha0_a * kappa) / m.kappa_b);
    }
    if (m.kappa_b < 1.0) {
        double alpha0_d = 0.0;
        if (m.kappa_s < 1.0) {
            const double alpha_d = a * (1.0 - m.kappa_s) / (1.0 - kappa);
            alpha0_d = alpha_d * (1.0 - std::clamp(inf_jump_ratio(*m.fs_discrete, *m.fb_discrete), 0.0, 1.0));
        }
        eps = std::min(eps, (a * (1.0 - m.kappa_s) - alpha0_d * (1.0 - kappa)) / (1.0 - m.kappa_b));
    }
    return std::clamp(a - std::clamp(eps, 0.0, a), 0.0, a);
}

}  // namespace mixsep
