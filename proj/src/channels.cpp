#include "nlcap/channels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "nlcap/errors.hpp"
#include "nlcap/quadrature.hpp"

namespace nlcap {

namespace {

constexpr double kPenaltyMaxError = 1e-9;

void require_snr(double snr) {
    if (!(snr > 0.0) || !std::isfinite(snr)) throw ParameterError("snr must be positive");
}

void require_gamma(double gamma_tilde) {
    if (!(gamma_tilde >= 0.0) || !std::isfinite(gamma_tilde)) {
        throw ParameterError("gamma_tilde must be non-negative");
    }
}

const QuadratureRule& laguerre_rule(int n) {
    static std::mutex mu;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_laguerre(n)).first;
    return it->second;
}

double laguerre_penalty(double a, int n) {
    return 0.5 * laguerre_rule(n).integrate([a](double t) { return std::log1p(a * t * t); });
}

// Composite Gauss-Legendre on panels [0, e], [e, 2e], [2e, 4e], ... up to
// t = 64 with e = min(1, 1/sqrt(a)), plus a Laguerre tail. The branch points of
// the log sit at distance e from the origin, so every panel sees them at
// about its own width and converges at the same geometric rate.
double graded_penalty(double a, int n) {
    const QuadratureRule& ref = [n]() -> const QuadratureRule& {
        static std::mutex mu;
        static std::map<int, QuadratureRule> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
        return it->second;
    }();
    const auto f = [a](double t) { return std::exp(-t) * std::log1p(a * t * t); };
    constexpr double kTail = 64.0;
    double lo = 0.0;
    double hi = std::min(1.0, 1.0 / std::sqrt(a));
    double s = 0.0;
    while (lo < kTail) {
        hi = std::min(hi, kTail);
        const double h = 0.5 * (hi - lo);
        const double m = 0.5 * (hi + lo);
        double panel = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) panel += ref.weights[i] * f(m + h * ref.nodes[i]);
        s += h * panel;
        lo = hi;
        hi = 2.0 * hi;
    }
    const double tail = laguerre_rule(16).integrate([a](double t) {
        const double x = t + kTail;
        return std::log1p(a * x * x);
    });
    return 0.5 * (s + std::exp(-kTail) * tail);
}

// Adaptive Gauss-Kronrod on [0, inf). For large a the log has branch points
// at +-i/sqrt(a), so the first panel is [0, 1/sqrt(a)] and bisection does
// the rest; the tail beyond t = 40 is mapped onto a finite range by Boost.
PenaltyValue adaptive_penalty(double a, double tol) {
    using boost::math::quadrature::gauss_kronrod;
    const auto f = [a](double t) { return std::exp(-t) * std::log1p(a * t * t); };
    const double t0 = std::min(1.0, 1.0 / std::sqrt(a));
    const double rel = 1e-14;
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    const double v1 = gauss_kronrod<double, 31>::integrate(f, 0.0, t0, 20, rel, &e1);
    const double v2 = gauss_kronrod<double, 31>::integrate(f, t0, 40.0, 20, rel, &e2);
    const double v3 = gauss_kronrod<double, 31>::integrate(
        f, 40.0, std::numeric_limits<double>::infinity(), 20, rel, &e3);
    PenaltyValue out;
    out.value = 0.5 * (v1 + v2 + v3);
    out.abs_error = 0.5 * (e1 + e2 + e3);
    out.used_adaptive = true;
    if (!(out.abs_error <= std::max(tol, kPenaltyMaxError))) {
        throw QuadratureError("penalty integral did not converge", out.abs_error);
    }
    return out;
}

}  // namespace

std::string_view to_string(SEModel m) {
    switch (m) {
        case SEModel::shannon: return "shannon";
        case SEModel::dispersive_perturbative: return "dispersive";
        case SEModel::nondispersive_exact: return "nondispersive_exact";
        case SEModel::nondispersive_expansion: return "nondispersive_expansion";
    }
    return "?";
}

double shannon_se(double snr) {
    if (!(snr >= 0.0)) throw ParameterError("snr must be non-negative");
    return std::log1p(snr);
}

double dispersive_se_with_g(double snr, double gamma_tilde, double g_value) {
    require_snr(snr);
    require_gamma(gamma_tilde);
    return std::log(snr) - gamma_tilde * gamma_tilde / 3.0 * g_value;
}

double dispersive_se(double snr, double gamma_tilde, double beta_tilde, const GEvalConfig& g) {
    return dispersive_se_with_g(snr, gamma_tilde, g_eval(beta_tilde, g).value);
}

PenaltyValue nondispersive_penalty(double gamma_tilde, const QuadSpec& quad) {
    require_gamma(gamma_tilde);
    if (gamma_tilde == 0.0) return {};
    const double a = gamma_tilde * gamma_tilde / 3.0;
    const int n = quad.laguerre_points;
    if (n < 2) throw ParameterError("laguerre_points must be >= 2");

    switch (quad.method) {
        case QuadSpec::Method::adaptive:
            return adaptive_penalty(a, quad.tolerance);
        case QuadSpec::Method::laguerre: {
            PenaltyValue out;
            out.value = laguerre_penalty(a, n);
            out.abs_error = std::abs(out.value - laguerre_penalty(a, n / 2));
            return out;
        }
        case QuadSpec::Method::automatic:
            break;
    }
    PenaltyValue out;
    out.value = laguerre_penalty(a, n);
    out.abs_error = std::abs(out.value - laguerre_penalty(a, 2 * n));
    if (out.abs_error <= quad.tolerance) return out;
    out.value = graded_penalty(a, 32);
    out.abs_error = std::abs(out.value - graded_penalty(a, 16));
    if (out.abs_error <= quad.tolerance) return out;
    return adaptive_penalty(a, quad.tolerance);
}

double nondispersive_se_exact(double snr, double gamma_tilde, const QuadSpec& quad) {
    require_snr(snr);
    return std::log(snr) - nondispersive_penalty(gamma_tilde, quad).value;
}

double nondispersive_se_expansion(double snr, double gamma_tilde, bool include_quartic) {
    require_snr(snr);
    require_gamma(gamma_tilde);
    const double g2 = gamma_tilde * gamma_tilde;
    double se = std::log(snr) - g2 / 3.0;
    if (include_quartic) se += 2.0 * g2 * g2 / 3.0;
    return se;
}

SEPoint evaluate_model(SEModel model, double snr, double gamma_tilde, double beta_tilde,
                       const GEvalConfig& g) {
    SEPoint p;
    p.snr = snr;
    p.gamma_tilde = gamma_tilde;
    p.beta_tilde = beta_tilde;
    p.model = model;
    switch (model) {
        case SEModel::shannon: p.se_nats = shannon_se(snr); break;
        case SEModel::dispersive_perturbative: p.se_nats = dispersive_se(snr, gamma_tilde, beta_tilde, g); break;
        case SEModel::nondispersive_exact: p.se_nats = nondispersive_se_exact(snr, gamma_tilde); break;
        case SEModel::nondispersive_expansion: p.se_nats = nondispersive_se_expansion(snr, gamma_tilde); break;
    }
    return p;
}

Crossover crossover_snr(const PhysicalChannel& phys, const CrossoverOptions& opts) {
    phys.validate();
    if (!(phys.gamma > 0.0)) throw ParameterError("crossover needs gamma > 0");
    if (!(opts.hi_db > opts.lo_db) || !(opts.scan_step_db > 0.0) || !(opts.tol_db > 0.0)) {
        throw ParameterError("bad crossover search window");
    }
    const double beta_tilde = derive_dimensionless(phys).beta_tilde;
    const double g = g_eval(beta_tilde, opts.g).value;

    // Penalty difference; ln(snr) cancels.
    const auto diff = [&](double db) {
        const double gt = gamma_tilde_of_snr(phys, db_to_linear(db));
        return nondispersive_penalty(gt).value - gt * gt / 3.0 * g;
    };

    double a = opts.lo_db;
    double fa = diff(a);
    double b = a;
    double fb = fa;
    bool found = false;
    while (b < opts.hi_db) {
        b = std::min(a + opts.scan_step_db, opts.hi_db);
        fb = diff(b);
        if ((fa > 0.0) != (fb > 0.0)) {
            found = true;
            break;
        }
        a = b;
        fa = fb;
    }
    if (!found) {
        throw NoBracketError("dispersive and nondispersive curves do not cross in the window",
                             g >= 1.0);
    }
    while (b - a > opts.tol_db) {
        const double m = 0.5 * (a + b);
        const double fm = diff(m);
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Crossover c;
    c.snr_db = 0.5 * (a + b);
    c.snr_linear = db_to_linear(c.snr_db);
    c.g_value = g;
    return c;
}

ApplicabilityBound applicability_bound(const PhysicalChannel& phys, double ratio_max,
                                       const GEvalConfig& g) {
    phys.validate();
    if (!(ratio_max > 0.0 && ratio_max <= 1.0)) throw ParameterError("ratio_max must be in (0, 1]");
    ApplicabilityBound out;
    const double slope = gamma_tilde_of_snr(phys, 1.0);
    if (slope == 0.0) return out;
    const double gv = g_eval(derive_dimensionless(phys).beta_tilde, g).value;
    out.bounded = true;
    out.snr_linear = std::sqrt(ratio_max / (3.0 * gv)) / std::abs(slope);
    out.snr_db = linear_to_db(out.snr_linear);
    return out;
}

}  // namespace nlcap
