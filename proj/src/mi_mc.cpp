#include "nlcap/mi_mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "nlcap/errors.hpp"

namespace nlcap {

using cplx = std::complex<double>;

void PerSampleChannel::validate() const {
    if (!(p > 0.0) || !std::isfinite(p)) throw ParameterError("per-sample channel: p must be positive");
    if (!(ql > 0.0) || !std::isfinite(ql)) throw ParameterError("per-sample channel: ql must be positive");
    if (!std::isfinite(gamma_l)) throw ParameterError("per-sample channel: gamma_l must be finite");
}

PerSampleChannel PerSampleChannel::from_snr(double snr, double gamma_tilde, double p) {
    PerSampleChannel ch;
    ch.p = p;
    ch.ql = p / snr;
    ch.gamma_l = gamma_tilde / p;
    ch.validate();
    return ch;
}

cplx exact_map(cplx x, const PerSampleChannel& ch) {
    return x * std::polar(1.0, ch.gamma_l * std::norm(x));
}

cplx rotated_coordinates(cplx y, cplx x, const PerSampleChannel& ch) {
    const double r = std::abs(x);
    const double mu = ch.gamma_l * r * r;
    return y * std::polar(1.0, -std::arg(x) - mu) - r;
}

double log_conditional_pdf(cplx y, cplx x, const PerSampleChannel& ch) {
    const double r2 = std::norm(x);
    const double mu = ch.gamma_l * r2;
    const cplx w = rotated_coordinates(y, x, ch);
    const double u = w.real(), v = w.imag();
    const double d = 1.0 + mu * mu / 3.0;
    const double q = (1.0 + 4.0 * mu * mu / 3.0) * u * u - 2.0 * mu * u * v + v * v;
    return -std::log(std::numbers::pi * ch.ql * std::sqrt(d)) - q / (ch.ql * d);
}

double conditional_pdf(cplx y, cplx x, const PerSampleChannel& ch) {
    return std::exp(log_conditional_pdf(y, x, ch));
}

cplx sample_conditional(cplx x, const PerSampleChannel& ch, RandomStream& rng) {
    const double r = std::abs(x);
    const double mu = ch.gamma_l * r * r;
    const double s = std::sqrt(0.5 * ch.ql);
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double u = s * z1;
    const double v = s * (mu * z1 + std::sqrt(1.0 + mu * mu / 3.0) * z2);
    return cplx(r + u, v) * std::polar(1.0, std::arg(x) + mu);
}

cplx simulate_sample(cplx x, const PerSampleChannel& ch, int n_steps, RandomStream& rng) {
    if (n_steps < 1) throw ParameterError("simulate_sample: n_steps must be >= 1");
    const double half = 0.5 * ch.gamma_l / n_steps;
    const double var = ch.ql / n_steps;
    cplx psi = x;
    for (int s = 0; s < n_steps; ++s) {
        psi *= std::polar(1.0, half * std::norm(psi));
        if (var > 0.0) psi += rng.complex_normal(var);
        psi *= std::polar(1.0, half * std::norm(psi));
    }
    return psi;
}

MISample mi_sample(const PerSampleChannel& ch, long long index, int n_inner, std::uint64_t seed,
                   const MIOptions& opts) {
    RandomStream rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
    const cplx x = rng.complex_normal(ch.p) * std::polar(1.0, opts.input_phase);
    const cplx y = opts.mode == OutputMode::analytic ? sample_conditional(x, ch, rng)
                                                     : simulate_sample(x, ch, opts.n_steps, rng);
    const double log_pyx = log_conditional_pdf(y, x, ch);

    // proposal around the inverse of the noiseless map, oriented with it
    const double ry = std::abs(y);
    const cplx frame = std::polar(1.0, std::arg(y) - ch.gamma_l * ry * ry);
    const cplx x_hat = ry * frame;
    const double pv = opts.proposal_scale * opts.proposal_scale * ch.ql;
    const double log_q0 = -std::log(std::numbers::pi * pv);
    const double log_p0 = -std::log(std::numbers::pi * ch.p);

    std::vector<double> lw(static_cast<std::size_t>(n_inner));
    double lmax = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n_inner; ++j) {
        const cplx xi = rng.complex_normal(pv);
        const cplx xp = x_hat + xi * frame;
        const double l = log_conditional_pdf(y, xp, ch) + (log_p0 - std::norm(xp) / ch.p) -
                         (log_q0 - std::norm(xi) / pv);
        lw[j] = l;
        lmax = std::max(lmax, l);
    }
    double s1 = 0.0, s2 = 0.0;
    for (double l : lw) {
        const double w = std::exp(l - lmax);
        s1 += w;
        s2 += w * w;
    }
    MISample out;
    const double log_pout = lmax + std::log(s1 / n_inner);
    out.density = log_pyx - log_pout;
    out.ess = s1 * s1 / s2;
    out.control = std::norm(x) / ch.p - 1.0;
    return out;
}

MIResult estimate_mi(const PerSampleChannel& ch, long long n_outer, int n_inner, std::uint64_t seed,
                     const MIOptions& opts, bool allow_small) {
    ch.validate();
    if (n_outer < 2 || n_inner < 1) throw ParameterError("estimate_mi: sample counts too small");
    if (!allow_small && (n_outer < 1000 || n_inner < 1000 || ch.snr() < 100.0)) {
        throw ParameterError("estimate_mi: needs n_outer, n_inner >= 1000 and snr >= 100");
    }
    if (!(opts.proposal_scale > 0.0)) throw ParameterError("estimate_mi: proposal_scale must be positive");

    std::vector<MISample> samples(static_cast<std::size_t>(n_outer));
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < n_outer; ++i) samples[i] = mi_sample(ch, i, n_inner, seed, opts);

    MIResult r;
    double s = 0.0, s2 = 0.0, ess_sum = 0.0;
    r.min_ess = std::numeric_limits<double>::infinity();
    for (const auto& m : samples) {
        s += m.density;
        s2 += m.density * m.density;
        ess_sum += m.ess;
        r.min_ess = std::min(r.min_ess, m.ess);
        if (m.ess < 0.1 * n_inner) ++r.low_ess_count;
    }
    const double n = static_cast<double>(n_outer);
    r.mi.n_samples = n_outer;
    r.mi.mean = s / n;
    r.mi.std_error = std::sqrt(std::max(0.0, s2 / n - r.mi.mean * r.mi.mean) / (n - 1.0));
    r.mean_ess = ess_sum / n;

    double sc = 0.0, scc = 0.0, sdc = 0.0;
    for (const auto& m : samples) {
        sc += m.control;
        scc += m.control * m.control;
        sdc += m.density * m.control;
    }
    const double var_c = scc / n - (sc / n) * (sc / n);
    const double b = var_c > 0.0 ? (sdc / n - r.mi.mean * sc / n) / var_c : 0.0;
    double e = 0.0, e2 = 0.0;
    for (const auto& m : samples) {
        const double d = m.density - b * m.control;
        e += d;
        e2 += d * d;
    }
    r.mi_controlled.n_samples = n_outer;
    r.mi_controlled.mean = e / n;
    r.mi_controlled.std_error = std::sqrt(std::max(0.0, e2 / n - (e / n) * (e / n)) / (n - 2.0));
    r.degenerate_proposal = r.mean_ess < 0.1 * n_inner;
    return r;
}

}  // namespace nlcap
