#include "nlcap/specfun.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "nlcap/errors.hpp"
#include "nlcap/quadrature.hpp"

namespace nlcap {

std::string_view to_string(GMethod m) {
    switch (m) {
        case GMethod::series: return "series";
        case GMethod::cubature: return "cubature";
        case GMethod::discrete_riemann: return "discrete_riemann";
        case GMethod::discrete_sine_grid: return "discrete_sine_grid";
        case GMethod::asymptotic: return "asymptotic";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// F kernel

double f_kernel_series(double mu, int terms) {
    // 4! sum_s (-1)^s (2mu)^{2s} / (2s+4)!, accumulated from the smallest term
    const double x = 4.0 * mu * mu;
    std::vector<double> t(static_cast<std::size_t>(terms));
    double term = 1.0;  // (2mu)^0 * 4!/4!
    for (int s = 0; s < terms; ++s) {
        t[s] = term;
        term *= -x / ((2.0 * s + 5.0) * (2.0 * s + 6.0));
    }
    double sum = 0.0;
    for (int s = terms - 1; s >= 0; --s) sum += t[s];
    return sum;
}

double f_kernel_closed(double mu) {
    const double s = std::sin(mu);
    const double m2 = mu * mu;
    return 3.0 * (m2 - s * s) / (m2 * m2);
}

double f_kernel(double mu) {
    if (std::abs(mu) < kFKernelSwitch) return f_kernel_series(mu, 12);
    return f_kernel_closed(mu);
}

double green0(double z1, double z2) {
    if (!(z1 >= 0.0 && z1 <= 1.0 && z2 >= 0.0 && z2 <= 1.0)) {
        throw DomainError("green0: arguments must lie in [0,1]");
    }
    return z1 <= z2 ? z1 * (z2 - 1.0) : z2 * (z1 - 1.0);
}

namespace {

// Partial derivatives of G0 away from the diagonal.
double green0_d1(double z1, double z2) { return z1 < z2 ? z2 - 1.0 : z2; }
double green0_d2(double z1, double z2) { return z1 < z2 ? z1 : z1 - 1.0; }

}  // namespace

double f_kernel_oracle(double mu, int order) {
    if (order < 8) throw ParameterError("f_kernel_oracle: order must be >= 8");
    const QuadratureRule outer = gauss_legendre(order, 0.0, 1.0);
    std::complex<double> acc{0.0, 0.0};
    auto integrand = [mu](double z1, double z2) {
        const double d = green0_d1(z1, z2) * green0_d2(z1, z2);
        return d * std::exp(std::complex<double>(0.0, -2.0 * mu * (z1 - z2)));
    };
    for (std::size_t a = 0; a < outer.size(); ++a) {
        const double s = outer.nodes[a];
        const QuadratureRule inner = gauss_legendre(order, 0.0, s);
        for (std::size_t b = 0; b < inner.size(); ++b) {
            const double t = inner.nodes[b];
            const double w = outer.weights[a] * inner.weights[b];
            acc += w * integrand(t, s);  // triangle z1 < z2
            acc += w * integrand(s, t);  // triangle z1 > z2
        }
    }
    acc *= -12.0;
    if (std::abs(acc.imag()) > 1e-8) {
        throw QuadratureError("f_kernel_oracle: imaginary residual did not vanish", std::abs(acc.imag()));
    }
    return acc.real();
}

// ---------------------------------------------------------------------------
// Series

namespace {

class BigFloat {
public:
    explicit BigFloat(mpfr_prec_t bits) { mpfr_init2(v_, bits); mpfr_set_zero(v_, 1); }
    ~BigFloat() { mpfr_clear(v_); }
    BigFloat(const BigFloat&) = delete;
    BigFloat& operator=(const BigFloat&) = delete;
    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

private:
    mpfr_t v_;
};

struct SeriesPlan {
    bool trivial = false;  // beta_tilde == 0
    int last_term = 0;
    double log10_max_term = 0.0;
    double log10_first_omitted = 0.0;
    int digits = 0;
};

// log|t_n| for t_n = 48 (-1)^n q^n / ((2n+4)! (2n+1)^2) * [1/(4n+3) + (2n+1)!^2/(4n+3)!]
double log_abs_term(int n, double log_q) {
    const double dn = n;
    const double a = -std::log(4.0 * dn + 3.0);
    const double b = 2.0 * std::lgamma(2.0 * dn + 2.0) - std::lgamma(4.0 * dn + 4.0);
    const double hi = std::max(a, b);
    const double bracket = hi + std::log1p(std::exp(std::min(a, b) - hi));
    return std::log(48.0) + dn * log_q - std::lgamma(2.0 * dn + 5.0) - 2.0 * std::log(2.0 * dn + 1.0) +
           bracket;
}

SeriesPlan plan_series(double beta_tilde, int target_digits, const SeriesOptions& opts) {
    if (!std::isfinite(beta_tilde)) throw ParameterError("g_series: beta_tilde must be finite");
    if (target_digits < 6) throw ParameterError("g_series: target_digits must be >= 6");
    SeriesPlan plan;
    if (beta_tilde == 0.0) {
        plan.trivial = true;
        plan.digits = target_digits;
        return plan;
    }
    const double log_q = 2.0 * std::log(std::abs(beta_tilde)) - std::log(4.0);
    const double stop = -(target_digits + opts.guard_digits) * std::log(10.0);
    double max_log = -std::numeric_limits<double>::infinity();
    int n = 0;
    bool past_peak = false;
    double prev = log_abs_term(0, log_q);
    max_log = prev;
    for (n = 1;; ++n) {
        const double cur = log_abs_term(n, log_q);
        if (cur < prev) past_peak = true;
        max_log = std::max(max_log, cur);
        if (past_peak && cur < stop) break;
        prev = cur;
        if (n > 1'000'000) throw PrecisionError("g_series: series does not terminate");
    }
    plan.last_term = n - 1;
    plan.log10_first_omitted = log_abs_term(n, log_q) / std::log(10.0);
    plan.log10_max_term = max_log / std::log(10.0);
    plan.digits = static_cast<int>(std::ceil(std::max(0.0, plan.log10_max_term))) + target_digits +
                  opts.guard_digits;
    return plan;
}

}  // namespace

int g_series_working_digits(double beta_tilde, int target_digits, const SeriesOptions& opts) {
    return plan_series(beta_tilde, target_digits, opts).digits;
}

GEval g_series(double beta_tilde, int target_digits, const SeriesOptions& opts) {
    const SeriesPlan plan = plan_series(beta_tilde, target_digits, opts);
    GEval out;
    out.method = GMethod::series;
    out.beta_tilde = beta_tilde;
    if (plan.trivial) {
        out.value = 1.0;
        return out;
    }
    if (plan.digits > opts.max_digits) {
        throw PrecisionError("g_series: needs " + std::to_string(plan.digits) +
                             " digits, cap is " + std::to_string(opts.max_digits));
    }
    const auto bits = static_cast<mpfr_prec_t>(std::ceil(plan.digits * 3.3219280948873623) + 16);

    BigFloat q(bits), pn(bits), bn(bits), bracket(bits), term(bits), sum(bits);
    mpfr_set_d(q.get(), beta_tilde, MPFR_RNDN);
    mpfr_sqr(q.get(), q.get(), MPFR_RNDN);
    mpfr_div_ui(q.get(), q.get(), 4, MPFR_RNDN);

    mpfr_set_ui(pn.get(), 1, MPFR_RNDN);  // q^n / (2n+4)!
    mpfr_div_ui(pn.get(), pn.get(), 24, MPFR_RNDN);
    mpfr_set_ui(bn.get(), 1, MPFR_RNDN);  // (2n+1)!^2 / (4n+3)!
    mpfr_div_ui(bn.get(), bn.get(), 6, MPFR_RNDN);
    mpfr_set_zero(sum.get(), 1);

    for (int n = 0; n <= plan.last_term; ++n) {
        const unsigned long un = static_cast<unsigned long>(n);
        mpfr_set_ui(bracket.get(), 1, MPFR_RNDN);
        mpfr_div_ui(bracket.get(), bracket.get(), 4 * un + 3, MPFR_RNDN);
        mpfr_add(bracket.get(), bracket.get(), bn.get(), MPFR_RNDN);
        mpfr_mul(term.get(), pn.get(), bracket.get(), MPFR_RNDN);
        mpfr_mul_ui(term.get(), term.get(), 48, MPFR_RNDN);
        mpfr_div_ui(term.get(), term.get(), (2 * un + 1) * (2 * un + 1), MPFR_RNDN);
        if (n % 2 == 0) {
            mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
        } else {
            mpfr_sub(sum.get(), sum.get(), term.get(), MPFR_RNDN);
        }
        // advance the recurrences to n+1
        mpfr_mul(pn.get(), pn.get(), q.get(), MPFR_RNDN);
        mpfr_div_ui(pn.get(), pn.get(), (2 * un + 5) * (2 * un + 6), MPFR_RNDN);
        mpfr_mul_ui(bn.get(), bn.get(), (2 * un + 2) * (2 * un + 2), MPFR_RNDN);
        mpfr_mul_ui(bn.get(), bn.get(), (2 * un + 3) * (2 * un + 3), MPFR_RNDN);
        mpfr_div_ui(bn.get(), bn.get(), (4 * un + 4) * (4 * un + 5), MPFR_RNDN);
        mpfr_div_ui(bn.get(), bn.get(), (4 * un + 6) * (4 * un + 7), MPFR_RNDN);
    }
    out.value = sum.to_double();
    const double rounding =
        std::pow(10.0, plan.log10_max_term - plan.digits) * static_cast<double>(plan.last_term + 1);
    out.err_estimate = std::max(std::pow(10.0, plan.log10_first_omitted), rounding);
    return out;
}

// ---------------------------------------------------------------------------
// Cubature

namespace {

double tensor_sum(double beta_tilde, int n) {
    const QuadratureRule r = gauss_legendre(n, 0.0, 1.0);
    const double c = 0.25 * beta_tilde;
    std::vector<double> partial(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n; ++k) {
        const double xk = r.nodes[k];
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double di = r.nodes[i] - xk;
            const double cdi = c * di;
            double row = 0.5 * r.weights[i] * f_kernel(cdi * di);
            for (int j = i + 1; j < n; ++j) row += r.weights[j] * f_kernel(cdi * (r.nodes[j] - xk));
            s += 2.0 * r.weights[i] * row;
        }
        partial[k] = r.weights[k] * s;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

// With u = x1 - x3, v = x2 - x3 the x3 integral is the overlap length, and
// evenness of F folds the four quadrants onto two pieces:
//   g = 2 [ 2 \int_0^1 du (1-u) u \int_0^1 ds F(b u^2 s)
//         +   \int_0^1 du (1-u)^2 \int_0^1 ds (1-s) F(b u (1-u) s) ],   b = beta_tilde / 4
// Both integrands are smooth on the unit square.
double reduced_sum(double beta_tilde, int n) {
    const QuadratureRule r = gauss_legendre(n, 0.0, 1.0);
    const double b = 0.25 * beta_tilde;
    std::vector<double> partial(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        const double u = r.nodes[i];
        const double a1 = b * u * u;
        const double a2 = b * u * (1.0 - u);
        double s1 = 0.0, s2 = 0.0;
        for (int j = 0; j < n; ++j) {
            const double s = r.nodes[j];
            s1 += r.weights[j] * f_kernel(a1 * s);
            s2 += r.weights[j] * (1.0 - s) * f_kernel(a2 * s);
        }
        partial[i] = r.weights[i] * (2.0 * (1.0 - u) * u * s1 + (1.0 - u) * (1.0 - u) * s2);
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return 2.0 * total;
}

}  // namespace

GEval g_cubature(double beta_tilde, int nodes_per_axis) {
    if (!std::isfinite(beta_tilde)) throw ParameterError("g_cubature: beta_tilde must be finite");
    if (nodes_per_axis < 8) throw ParameterError("g_cubature: nodes_per_axis must be >= 8");
    GEval out;
    out.method = GMethod::cubature;
    out.beta_tilde = beta_tilde;
    out.value = reduced_sum(beta_tilde, nodes_per_axis);
    out.err_estimate = std::abs(out.value - reduced_sum(beta_tilde, nodes_per_axis / 2));
    return out;
}

GEval g_cubature_tensor(double beta_tilde, int nodes_per_axis) {
    if (!std::isfinite(beta_tilde)) throw ParameterError("g_cubature: beta_tilde must be finite");
    if (nodes_per_axis < 8) throw ParameterError("g_cubature: nodes_per_axis must be >= 8");
    GEval out;
    out.method = GMethod::cubature;
    out.beta_tilde = beta_tilde;
    out.value = tensor_sum(beta_tilde, nodes_per_axis);
    out.err_estimate = std::abs(out.value - tensor_sum(beta_tilde, nodes_per_axis / 2));
    return out;
}

int g_cubature_auto_nodes(double beta_tilde) {
    const int n = 32 + static_cast<int>(std::ceil(std::abs(beta_tilde) / 4.0));
    return std::max(64, (n + 7) / 8 * 8);
}

// ---------------------------------------------------------------------------
// Discrete triple sums

GEval g_discrete(double beta_tilde, int grid_m, DiscreteMode mode, const DiscreteOptions& opts) {
    if (!std::isfinite(beta_tilde)) throw ParameterError("g_discrete: beta_tilde must be finite");
    if (grid_m < 8) throw ParameterError("g_discrete: grid_m must be >= 8");
    const auto m = static_cast<std::uint64_t>(grid_m);
    if (m * m * m > opts.max_evaluations) {
        throw BudgetError("g_discrete: grid_m^3 = " + std::to_string(m * m * m) + " exceeds budget");
    }
    const double inv_m = 1.0 / grid_m;
    std::vector<double> partial(static_cast<std::size_t>(grid_m), 0.0);

    if (mode == DiscreteMode::riemann) {
        const double c = 0.25 * beta_tilde * inv_m * inv_m;
#pragma omp parallel for schedule(dynamic)
        for (int k3 = 0; k3 < grid_m; ++k3) {
            double s = 0.0;
            for (int k1 = 0; k1 < grid_m; ++k1) {
                const double a = c * (k1 - k3);
                double row = 0.5 * f_kernel(a * (k1 - k3));
                for (int k2 = k1 + 1; k2 < grid_m; ++k2) row += f_kernel(a * (k2 - k3));
                s += 2.0 * row;
            }
            partial[k3] = s;
        }
    } else {
        std::vector<double> sq(static_cast<std::size_t>(grid_m));
        for (int k = 0; k < grid_m; ++k) {
            const double s = std::sin(std::numbers::pi * k * inv_m) / std::numbers::pi;
            sq[k] = s * s;
        }
        const double c = opts.sine_grid_scale * 0.5 * beta_tilde;
#pragma omp parallel for schedule(dynamic)
        for (int k3 = 0; k3 < grid_m; ++k3) {
            double s = 0.0;
            for (int k1 = 0; k1 < grid_m; ++k1) {
                for (int k2 = 0; k2 < grid_m; ++k2) {
                    const int k4 = ((k1 + k2 - k3) % grid_m + grid_m) % grid_m;
                    s += f_kernel(c * (sq[k1] + sq[k2] - sq[k3] - sq[k4]));
                }
            }
            partial[k3] = s;
        }
    }
    double total = 0.0;
    for (double p : partial) total += p;

    GEval out;
    out.method = mode == DiscreteMode::riemann ? GMethod::discrete_riemann : GMethod::discrete_sine_grid;
    out.beta_tilde = beta_tilde;
    out.value = total * inv_m * inv_m * inv_m;
    // bound only: the sum depends on grid differences alone, so in practice it
    // behaves like a midpoint rule, O(1/M^2). The sine grid has no error model.
    out.err_estimate = mode == DiscreteMode::riemann ? std::abs(beta_tilde) * inv_m : std::nan("");
    return out;
}

// ---------------------------------------------------------------------------

double g_asymptotic_threshold() {
    return 2.0 * std::exp(23.0 / 6.0 - std::numbers::egamma);
}

GEval g_asymptotic(double beta_tilde) {
    const double b = std::abs(beta_tilde);
    if (!std::isfinite(b) || !(b > g_asymptotic_threshold())) {
        throw DomainError("g_asymptotic: requires |beta_tilde| > " +
                          std::to_string(g_asymptotic_threshold()));
    }
    GEval out;
    out.method = GMethod::asymptotic;
    out.beta_tilde = beta_tilde;
    out.value = 16.0 * std::numbers::pi / b * (std::log(b / 2.0) + std::numbers::egamma - 23.0 / 6.0);
    out.err_estimate = std::pow(b, -1.5);
    return out;
}

GEval g_eval(double beta_tilde, const GEvalConfig& cfg) {
    if (!std::isfinite(beta_tilde)) throw ParameterError("g_eval: beta_tilde must be finite");
    if (std::abs(beta_tilde) <= cfg.series_switch) return g_series(beta_tilde, cfg.series_digits);
    switch (cfg.above_switch) {
        case GMethod::series: return g_series(beta_tilde, cfg.series_digits);
        case GMethod::asymptotic: return g_asymptotic(beta_tilde);
        default: return g_cubature(beta_tilde, g_cubature_auto_nodes(beta_tilde));
    }
}

}  // namespace nlcap
