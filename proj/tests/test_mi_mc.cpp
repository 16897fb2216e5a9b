#include <doctest.h>

#include <omp.h>

#include <array>
#include <cmath>
#include <numbers>

#include "nlcap/channels.hpp"
#include "nlcap/errors.hpp"
#include "nlcap/mi_mc.hpp"
#include "nlcap/quadrature.hpp"

using namespace nlcap;
using cplx = std::complex<double>;

namespace {

// channel with ql = 1e-4 and an input of unit modulus carrying phase mu
PerSampleChannel channel_for_mu(double mu, double ql = 1e-4) {
    PerSampleChannel ch;
    ch.p = 1.0;
    ch.ql = ql;
    ch.gamma_l = mu;
    return ch;
}

double integrate_pdf(cplx x, const PerSampleChannel& ch) {
    const double mu = ch.gamma_l * std::norm(x);
    const double sd = std::sqrt(0.5 * ch.ql * (2.0 + 4.0 * mu * mu / 3.0));
    const cplx c = exact_map(x, ch);
    const double h = 12.0 * sd;
    const int panels = 40;
    const auto ref = gauss_legendre(20, 0.0, 1.0);
    double s = 0.0;
    for (int pa = 0; pa < panels; ++pa) {
        for (int pb = 0; pb < panels; ++pb) {
            for (std::size_t i = 0; i < ref.size(); ++i) {
                for (std::size_t j = 0; j < ref.size(); ++j) {
                    const double a = -h + 2.0 * h * (pa + ref.nodes[i]) / panels;
                    const double b = -h + 2.0 * h * (pb + ref.nodes[j]) / panels;
                    s += ref.weights[i] * ref.weights[j] * conditional_pdf(c + cplx(a, b), x, ch);
                }
            }
        }
    }
    return s * (2.0 * h / panels) * (2.0 * h / panels);
}

struct Moments {
    double mu_u = 0, mu_v = 0, cuu = 0, cuv = 0, cvv = 0;
    // standard errors of the second moments (normal theory)
    double se_uu = 0, se_uv = 0, se_vv = 0;
};

template <class Draw>
Moments moments(int n, Draw&& draw) {
    double su = 0, sv = 0, suu = 0, suv = 0, svv = 0;
    for (int i = 0; i < n; ++i) {
        const cplx w = draw(i);
        su += w.real();
        sv += w.imag();
        suu += w.real() * w.real();
        suv += w.real() * w.imag();
        svv += w.imag() * w.imag();
    }
    Moments m;
    m.mu_u = su / n;
    m.mu_v = sv / n;
    m.cuu = suu / n - m.mu_u * m.mu_u;
    m.cuv = suv / n - m.mu_u * m.mu_v;
    m.cvv = svv / n - m.mu_v * m.mu_v;
    m.se_uu = std::sqrt(2.0 / n) * m.cuu;
    m.se_uv = std::sqrt((m.cuu * m.cvv + m.cuv * m.cuv) / n);
    m.se_vv = std::sqrt(2.0 / n) * m.cvv;
    return m;
}

// curvature: the true law has E[u] = -ql (1 + 4 mu^2/3) / 4 at |x| = 1,
// beyond the Gaussian model; pass curvature = true to allow for it
void check_covariance(const Moments& m, double ql, double mu, int n, bool curvature = false) {
    const double s = 0.5 * ql;
    const double shift = curvature ? -0.25 * ql * (1.0 + 4.0 * mu * mu / 3.0) : 0.0;
    CHECK(std::abs(m.mu_u - shift) < 3.0 * std::sqrt(s / n));
    CHECK(std::abs(m.mu_v) < 3.0 * std::sqrt(s * (1.0 + 4.0 * mu * mu / 3.0) / n));
    CHECK(std::abs(m.cuu - s) < 3.0 * m.se_uu);
    CHECK(std::abs(m.cuv - s * mu) < 3.0 * m.se_uv + 1e-300);
    CHECK(std::abs(m.cvv - s * (1.0 + 4.0 * mu * mu / 3.0)) < 3.0 * m.se_vv);
}

}  // namespace

TEST_CASE("exact map") {
    const auto ch = channel_for_mu(0.7);
    CHECK(exact_map(0.0, ch) == cplx{});
    PerSampleChannel lin = ch;
    lin.gamma_l = 0.0;
    CHECK(exact_map(cplx(0.3, -0.4), lin) == cplx(0.3, -0.4));
    RandomStream rng(3);
    for (int i = 0; i < 100; ++i) {
        const cplx x = rng.complex_normal(2.0);
        CHECK(std::abs(exact_map(x, ch)) == doctest::Approx(std::abs(x)).epsilon(1e-15));
    }
}

TEST_CASE("conditional pdf basics") {
    auto ch = channel_for_mu(0.0, 0.01);
    const cplx x(0.6, 0.2);
    CHECK(conditional_pdf(x, x, ch) == doctest::Approx(1.0 / (std::numbers::pi * 0.01)).epsilon(1e-14));
    ch.gamma_l = 1.3;
    RandomStream rng(4);
    for (int i = 0; i < 200; ++i) {
        const cplx y = rng.complex_normal(1.0);
        const double a = rng.uniform() * 6.0;
        const cplx rot = std::polar(1.0, a);
        CHECK(conditional_pdf(y, x, ch) >= 0.0);
        CHECK(log_conditional_pdf(y * rot, x * rot, ch) ==
              doctest::Approx(log_conditional_pdf(y, x, ch)).epsilon(1e-12));
    }
}

TEST_CASE("conditional pdf is normalized") {
    for (double mu : {0.0, 0.5, 1.0, 3.0}) {
        const auto ch = channel_for_mu(mu, 1e-2);
        const cplx x = std::polar(1.0, 0.4);
        CHECK(std::abs(integrate_pdf(x, ch) - 1.0) < 1e-8);
    }
}

TEST_CASE("implied covariance at mu = 1, QL = 1") {
    // inverse of the quadratic form: (QL/2) [[1, mu], [mu, 1 + 4 mu^2 / 3]]
    PerSampleChannel ch;
    ch.p = 1.0;
    ch.ql = 1.0;
    ch.gamma_l = 1.0;
    const cplx x = 1.0;
    RandomStream rng(10);
    const int n = 200000;
    const auto m = moments(n, [&](int) { return rotated_coordinates(sample_conditional(x, ch, rng), x, ch); });
    check_covariance(m, 1.0, 1.0, n);
    CHECK(m.cuv == doctest::Approx(0.5).epsilon(0.02));
    CHECK(m.cvv == doctest::Approx(7.0 / 6.0).epsilon(0.02));
}

TEST_CASE("noiseless simulation is the exact map") {
    PerSampleChannel ch = channel_for_mu(2.2);
    ch.ql = 0.0;
    RandomStream rng(1);
    for (cplx x : {cplx(0.0), cplx(1.0, 0.5), cplx(-0.3, 1.7)}) {
        const cplx y = simulate_sample(x, ch, 100, rng);
        CHECK(std::abs(y - exact_map(x, ch)) < 1e-12 * std::max(1.0, std::abs(x)));
    }
}

TEST_CASE("linear simulation adds ql") {
    PerSampleChannel ch = channel_for_mu(0.0, 0.05);
    RandomStream rng(2);
    const cplx x(0.4, -0.9);
    const int n = 10000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double d = std::norm(simulate_sample(x, ch, 100, rng) - x);
        s += d;
        s2 += d * d;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / (n - 1));
    CHECK(std::abs(mean - 0.05) < 3.0 * se);
}

TEST_CASE("simulated moments match the analytic Gaussian at snr 1e4") {
    for (double mu : {0.3, 1.0, 2.0}) {
        const auto ch = channel_for_mu(mu, 1e-4);
        const cplx x = std::polar(1.0, 1.1);
        RandomStream rng(static_cast<std::uint64_t>(mu * 1000));
        const int n = 20000;
        const auto m = moments(n, [&](int) { return rotated_coordinates(simulate_sample(x, ch, 200, rng), x, ch); });
        check_covariance(m, ch.ql, mu, n, true);
    }
}

TEST_CASE("MI of the linear channel") {
    const auto ch = PerSampleChannel::from_snr(100.0, 0.0);
    MIOptions o;
    o.mode = OutputMode::analytic;
    const auto r = estimate_mi(ch, 4000, 1000, 11, o);
    const double tol = std::max(3.0 * r.mi.std_error, std::log1p(100.0) - std::log(100.0));
    CHECK(std::abs(r.mi.mean - std::log(100.0)) < tol);
    CHECK(std::abs(r.mi.mean - std::log1p(100.0)) < 3.0 * r.mi.std_error);
    CHECK_FALSE(r.degenerate_proposal);
    CHECK(r.mi_controlled.std_error < r.mi.std_error);
}

TEST_CASE("MI standard error scales as 1/sqrt(n)") {
    const auto ch = PerSampleChannel::from_snr(1000.0, 0.3);
    MIOptions o;
    o.mode = OutputMode::analytic;
    const auto a = estimate_mi(ch, 1000, 200, 5, o, true);
    const auto b = estimate_mi(ch, 4000, 200, 5, o, true);
    CHECK(b.mi.std_error / a.mi.std_error == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("MI is invariant under a global input phase") {
    const auto ch = PerSampleChannel::from_snr(1000.0, 0.5);
    MIOptions o;
    o.mode = OutputMode::analytic;
    const auto a = estimate_mi(ch, 500, 200, 8, o, true);
    o.input_phase = 1.234;
    const auto b = estimate_mi(ch, 500, 200, 8, o, true);
    CHECK(std::abs(a.mi.mean - b.mi.mean) < 1e-12);
}

TEST_CASE("MI does not depend on the thread count") {
    const auto ch = PerSampleChannel::from_snr(500.0, 0.4);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto a = estimate_mi(ch, 300, 100, 3, {}, true);
    omp_set_num_threads(3);
    const auto b = estimate_mi(ch, 300, 100, 3, {}, true);
    omp_set_num_threads(saved);
    CHECK(a.mi.mean == b.mi.mean);
    CHECK(a.mi.std_error == b.mi.std_error);
    CHECK(a.min_ess == b.min_ess);
}

TEST_CASE("analytic and simulated outputs agree") {
    const auto ch = PerSampleChannel::from_snr(1000.0, 0.5);
    MIOptions an, si;
    an.mode = OutputMode::analytic;
    si.mode = OutputMode::simulate;
    const auto a = estimate_mi(ch, 3000, 1000, 21, an);
    const auto b = estimate_mi(ch, 3000, 1000, 22, si);
    CHECK(std::abs(a.mi.mean - b.mi.mean) < 3.0 * std::hypot(a.mi.std_error, b.mi.std_error));
}

TEST_CASE("doubling the inner sample count moves the estimate less than its error") {
    const auto ch = PerSampleChannel::from_snr(1000.0, 0.5);
    MIOptions o;
    o.mode = OutputMode::analytic;
    const auto a = estimate_mi(ch, 2000, 1000, 31, o);
    const auto b = estimate_mi(ch, 2000, 2000, 31, o);
    CHECK(std::abs(a.mi.mean - b.mi.mean) < a.mi.std_error);
}

TEST_CASE("degenerate proposal is reported") {
    const auto ch = PerSampleChannel::from_snr(1000.0, 0.5);
    MIOptions o;
    o.mode = OutputMode::analytic;
    o.proposal_scale = 200.0;
    const auto r = estimate_mi(ch, 200, 200, 1, o, true);
    CHECK(r.degenerate_proposal);
    CHECK(r.low_ess_count > 0);
}

TEST_CASE("MI argument checks") {
    const auto ch = PerSampleChannel::from_snr(1000.0, 0.5);
    CHECK_THROWS_AS(estimate_mi(ch, 100, 1000, 1), ParameterError);
    CHECK_THROWS_AS(estimate_mi(PerSampleChannel::from_snr(10.0, 0.5), 1000, 1000, 1), ParameterError);
    CHECK_THROWS_AS(PerSampleChannel::from_snr(-1.0, 0.1), ParameterError);
    MIOptions bad;
    bad.proposal_scale = 0.0;
    CHECK_THROWS_AS(estimate_mi(ch, 10, 10, 1, bad, true), ParameterError);
}
