#include "nlcap/reference.hpp"

#include <cmath>
#include <numbers>

#include "nlcap/errors.hpp"
#include "nlcap/quadrature.hpp"
#include "nlcap/specfun.hpp"

namespace nlcap::reference {

namespace {

MCEstimate summarize(double s, double s2, long long n) {
    MCEstimate e;
    e.n_samples = n;
    const double nn = static_cast<double>(n);
    e.mean = s / nn;
    e.std_error = std::sqrt(std::max(0.0, s2 / nn - e.mean * e.mean) / (nn - 1.0));
    return e;
}

}  // namespace

double g_cubature_tensor(double beta_tilde, int n) {
    const QuadratureRule r = gauss_legendre(n, 0.0, 1.0);
    const double c = 0.25 * beta_tilde;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const double mu = c * (r.nodes[i] - r.nodes[k]) * (r.nodes[j] - r.nodes[k]);
                s += r.weights[i] * r.weights[j] * r.weights[k] * f_kernel(mu);
            }
    return s;
}

double g_discrete_riemann(double beta_tilde, int m) {
    const double c = 0.25 * beta_tilde / (static_cast<double>(m) * m);
    double s = 0.0;
    for (int k1 = 0; k1 < m; ++k1)
        for (int k2 = 0; k2 < m; ++k2)
            for (int k3 = 0; k3 < m; ++k3) s += f_kernel(c * (k1 - k3) * (k2 - k3));
    return s / (static_cast<double>(m) * m * m);
}

ComplexField phi_first_order(const ComplexField& x_field, const PhysicalChannel& phys,
                             DispersionForm dispersion) {
    const SpectralGrid& g = x_field.grid;
    const ComplexField x = x_field.to_frequency();
    const int n = g.m_total;
    const auto w2 = [&](int k) {
        if (dispersion == DispersionForm::exact) return g.omega(k) * g.omega(k);
        const double s = 2.0 * std::sin(std::numbers::pi * g.signed_index(k) / n) * n / g.big_t;
        return s * s;
    };
    const double bl = phys.beta * phys.length;
    ComplexField out = zero_field(g, Domain::frequency);
    for (int k = 0; k < n; ++k) {
        cplx acc{};
        for (int k1 = 0; k1 < n; ++k1) {
            for (int k2 = 0; k2 < n; ++k2) {
                const int k3 = ((k1 + k2 - k) % n + n) % n;
                if (!g.in_band(k1) || !g.in_band(k2) || !g.in_band(k3)) continue;
                const cplx mu(0.0, bl * (w2(k) + w2(k3) - w2(k1) - w2(k2)));
                acc += x.samples[k1] * x.samples[k2] * std::conj(x.samples[k3]) * k_kernel(mu);
            }
        }
        out.samples[k] = cplx(0.0, phys.gamma * phys.length * g.delta_omega * g.delta_omega) *
                         std::polar(1.0, bl * w2(k)) * acc;
    }
    return out;
}

MCEstimate estimate_mi(const PerSampleChannel& ch, long long n_outer, int n_inner, std::uint64_t seed,
                       const MIOptions& opts) {
    ch.validate();
    if (n_outer < 2 || n_inner < 1) throw ParameterError("reference::estimate_mi: sample counts too small");
    double s = 0.0, s2 = 0.0;
    for (long long i = 0; i < n_outer; ++i) {
        const double d = mi_sample(ch, i, n_inner, seed, opts).density;
        s += d;
        s2 += d * d;
    }
    return summarize(s, s2, n_outer);
}

MCEstimate ensemble_added_power(const PhysicalChannel& phys, const SpectralGrid& grid,
                                const PropagationConfig& config, int n_realizations,
                                std::uint64_t seed) {
    if (n_realizations < 2) throw ParameterError("reference::ensemble_added_power: need 2 realizations");
    RandomStream input_rng(derive_seed(seed, ~std::uint64_t{0}));
    const ComplexField x = sample_gaussian_input(grid, phys.signal_psd, input_rng).to_time();
    const double p_ref = propagate(x, phys, config).power();
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n_realizations; ++i) {
        PropagationConfig c = config;
        c.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
        const double a = propagate(x, phys, c, phys.noise_psd).power() - p_ref;
        s += a;
        s2 += a * a;
    }
    return summarize(s, s2, n_realizations);
}

}  // namespace nlcap::reference
