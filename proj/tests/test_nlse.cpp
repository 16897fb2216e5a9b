#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include "nlcap/errors.hpp"
#include "nlcap/nlse.hpp"

using namespace nlcap;

namespace {

double rel_diff(const ComplexField& a, const ComplexField& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        num += std::norm(a.samples[i] - b.samples[i]);
        den += std::norm(b.samples[i]);
    }
    return std::sqrt(num / den);
}

double l2(const ComplexField& a, const ComplexField& b) {
    double num = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) num += std::norm(a.samples[i] - b.samples[i]);
    return std::sqrt(num);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ComplexField input(const SpectralGrid& g, const PhysicalChannel& ph, std::uint64_t seed) {
    RandomStream rng(seed);
    return sample_gaussian_input(g, ph.signal_psd, rng);
}

std::string tmp_path(const char* name) { return std::string("/tmp/nlcap_test_") + name; }

}  // namespace

TEST_CASE("grid identities") {
    const auto g = make_grid(1e11, 32, 4);
    CHECK(g.m_total == 128);
    CHECK(g.big_t == doctest::Approx(2.0 * std::numbers::pi * 32 / 1e11).epsilon(1e-15));
    CHECK(g.w_prime == 4e11);
    CHECK(g.delta_t == doctest::Approx(g.big_t / 128).epsilon(1e-15));
    CHECK(std::abs(g.delta_omega * 2.0 * std::numbers::pi * 32 - 1e11) / 1e11 < 1e-15);
    CHECK(std::abs(g.delta_omega * g.big_t - 1.0) < 1e-15);
    CHECK(g.big_t * g.w == doctest::Approx(2.0 * std::numbers::pi * 32).epsilon(1e-15));
    const auto g1 = make_grid(1e11, 32, 1);
    CHECK(g1.m_total == g1.m_meaning);
    CHECK(g1.w_prime == g1.w);
    int in_band = 0;
    for (int k = 0; k < g.m_total; ++k) in_band += g.in_band(k);
    CHECK(in_band == 32);
    for (int k = 0; k < g1.m_total; ++k) CHECK(g1.in_band(k));
    CHECK_THROWS_AS(make_grid(1e11, 32, 2.5), ParameterError);
    CHECK_THROWS_AS(make_grid(1e11, 1, 2), ParameterError);
    CHECK_THROWS_AS(make_grid(1e11, 8, 0), ParameterError);
    CHECK_THROWS_AS(make_grid(-1.0, 8, 1), ParameterError);
}

TEST_CASE("transforms round trip and preserve power") {
    const auto g = make_grid(1e11, 16, 4);
    const auto ph = typical_link().with_snr(100.0);
    const auto x = input(g, ph, 5);
    const auto t = x.to_time();
    CHECK(rel_diff(t.to_frequency(), x) < 1e-12);
    CHECK(t.power() == doctest::Approx(x.power()).epsilon(1e-13));
    CHECK(x.out_of_band_power() == 0.0);
}

TEST_CASE("Gaussian input") {
    const auto g = make_grid(1e11, 16, 4);
    const double p = 3e-13;
    RandomStream rng(42);
    const int n = 10000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto x = sample_gaussian_input(g, p, rng);
        for (int k = 0; k < g.m_total; ++k) {
            if (!g.in_band(k)) REQUIRE(x.samples[k] == cplx{});
        }
        const double pw = x.power();
        s += pw;
        s2 += pw * pw;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / (n - 1));
    const double want = p * g.w / (2.0 * std::numbers::pi);
    CHECK(std::abs(mean - want) < 3.0 * se);
    RandomStream r0(1);
    const auto z = sample_gaussian_input(g, 0.0, r0);
    for (const auto& v : z.samples) CHECK(v == cplx{});
}

TEST_CASE("linear channel is exact") {
    const auto g = make_grid(1e11, 16, 4);
    auto ph = typical_link().with_snr(100.0);
    ph.gamma = 0.0;
    const auto x = input(g, ph, 7);
    PropagationConfig cfg;
    cfg.n_steps = 500;
    const auto y = propagate(x, ph, cfg);
    REQUIRE(y.domain == Domain::frequency);
    ComplexField want = x;
    for (int k = 0; k < g.m_total; ++k) {
        const double w = g.omega(k);
        want.samples[k] *= std::polar(1.0, ph.beta * w * w * ph.length);
    }
    CHECK(rel_diff(y, want) < 1e-10);
    cfg.scheme = SplitScheme::euler;
    CHECK(rel_diff(propagate(x, ph, cfg), want) < 1e-10);
}

TEST_CASE("dispersionless channel is exact") {
    const auto g = make_grid(1e11, 16, 4);
    auto ph = typical_link().with_snr(1000.0);
    ph.beta = 0.0;
    const auto x = input(g, ph, 8).to_time();
    PropagationConfig cfg;
    cfg.n_steps = 300;
    const auto y = propagate(x, ph, cfg);
    ComplexField want = x;
    for (auto& z : want.samples) z *= std::polar(1.0, ph.gamma * std::norm(z) * ph.length);
    CHECK(rel_diff(y, want) < 1e-10);
}

TEST_CASE("noiseless NLSE conserves power") {
    const auto g = make_grid(1e11, 16, 4);
    const auto ph = typical_link().with_snr(1000.0);
    const auto x = input(g, ph, 9);
    PropagationConfig cfg;
    cfg.n_steps = 1000;
    const auto y = propagate(x, ph, cfg);
    CHECK(std::abs(y.power() - x.power()) / x.power() < 1e-9);
}

TEST_CASE("instability guard fires") {
    const auto g = make_grid(1e11, 16, 4);
    const auto ph = typical_link().with_snr(1000.0);
    PropagationConfig cfg;
    cfg.n_steps = 50;
    cfg.instability_tol = 0.0;
    CHECK_THROWS_AS(propagate(input(g, ph, 9), ph, cfg), InstabilityError);
    cfg.n_steps = 0;
    CHECK_THROWS_AS(propagate(input(g, ph, 9), ph, cfg), ParameterError);
}

TEST_CASE("Strang splitting is second order") {
    const auto g = make_grid(1e11, 16, 4);
    const auto ph = typical_link().with_snr(700.0);
    const auto x = input(g, ph, 11);
    PropagationConfig cfg;
    cfg.n_steps = 16000;
    const auto ref = propagate(x, ph, cfg);
    std::vector<double> ns, errs;
    for (int n : {250, 500, 1000, 2000}) {
        cfg.n_steps = n;
        ns.push_back(n);
        errs.push_back(rel_diff(propagate(x, ph, cfg), ref));
    }
    const double slope = fit_slope(ns, errs);
    CHECK(slope == doctest::Approx(-2.0).epsilon(0.1));
    cfg.scheme = SplitScheme::euler;
    std::vector<double> errs1;
    for (int n : {250, 500, 1000, 2000}) {
        cfg.n_steps = n;
        errs1.push_back(rel_diff(propagate(x, ph, cfg), ref));
    }
    CHECK(fit_slope(ns, errs1) == doctest::Approx(-1.0).epsilon(0.15));
}

TEST_CASE("K kernel") {
    CHECK(k_kernel(0.0) == cplx(1.0, 0.0));
    const cplx a(0.0, 0.99e-6), b(0.0, 1.01e-6);
    CHECK(std::abs(k_kernel(a) - k_kernel(b)) < 1e-8);
    const cplx mu(0.0, 2.0);
    CHECK(std::abs(k_kernel(mu) - (1.0 - std::exp(-mu)) / mu) < 1e-15);
}

TEST_CASE("perturbative solution") {
    const auto g = make_grid(1e11, 16, 4);
    auto ph = typical_link().with_snr(72.0);  // gamma_tilde ~ 0.05
    const auto x = input(g, ph, 12);
    auto lin = ph;
    lin.gamma = 0.0;
    CHECK(l2(phi_first_order(x, lin), zero_field(g, Domain::frequency)) == 0.0);
    PropagationConfig cfg;
    cfg.n_steps = 2000;
    CHECK(rel_diff(phi_perturbative(x, lin), propagate(x, lin, cfg)) < 1e-10);

    cfg.n_steps = 8000;
    std::vector<double> gs, res;
    const double g0 = ph.gamma;
    for (double f : {1.0, 0.5, 0.25}) {
        ph.gamma = g0 * f;
        gs.push_back(ph.gamma);
        res.push_back(l2(propagate(x, ph, cfg), phi_perturbative(x, ph)));
    }
    CHECK(fit_slope(gs, res) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("wrapped-index convention matches the FFT convolution") {
    // three occupied bins, one of them at the band edge so k1 + k2 - k3 wraps
    const auto g = make_grid(1e11, 8, 1);
    auto ph = typical_link();
    ComplexField x = zero_field(g, Domain::frequency);
    const double a = 1e-6 / g.delta_omega;
    x.samples[1] = {a, 0.3 * a};
    x.samples[3] = {-0.5 * a, 0.8 * a};
    x.samples[4] = {0.2 * a, -0.7 * a};  // signed index -4
    ph.gamma = 2e-5 / (ph.length * x.power());
    PropagationConfig cfg;
    cfg.n_steps = 40000;
    auto neg = ph;
    neg.gamma = -ph.gamma;
    const auto yp = propagate(x, ph, cfg);
    const auto yn = propagate(x, neg, cfg);
    ComplexField odd = yp;
    for (int k = 0; k < g.m_total; ++k) odd.samples[k] = 0.5 * (yp.samples[k] - yn.samples[k]);
    const auto phi1 = phi_first_order(x, ph);
    CHECK(l2(odd, phi1) / l2(phi1, zero_field(g, Domain::frequency)) < 1e-8);
}

TEST_CASE("sine and exact dispersion forms converge") {
    double prev = 1e300;
    for (int r : {1, 4, 16}) {
        const auto g = make_grid(1e11, 8, r);
        auto ph = typical_link().with_snr(300.0);
        const auto x = input(g, ph, 3);
        PerturbativeOptions ex, si;
        si.dispersion = DispersionForm::sine;
        const double d = rel_diff(phi_perturbative(x, ph, si), phi_perturbative(x, ph, ex));
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("perturbative budget and support checks") {
    const auto g = make_grid(1e11, 128, 1);
    const auto ph = typical_link();
    CHECK_THROWS_AS(phi_perturbative(zero_field(g, Domain::frequency), ph), BudgetError);
    const auto g2 = make_grid(1e11, 8, 2);
    ComplexField x = zero_field(g2, Domain::frequency);
    x.samples[8] = 1.0;  // signed index -8, outside the band
    CHECK_THROWS_AS(phi_perturbative(x, ph), ParameterError);
}

TEST_CASE("spectral broadening grows with gamma") {
    const auto g = make_grid(1e11, 16, 4);
    auto ph = typical_link().with_snr(500.0);
    const auto x = input(g, ph, 21);
    PropagationConfig cfg;
    cfg.n_steps = 1000;
    const double g0 = ph.gamma;
    double prev = -1.0;
    for (double f : {0.0, 0.5, 1.0, 2.0}) {
        ph.gamma = g0 * f;
        const double oob = propagate(x, ph, cfg).out_of_band_power();
        CHECK(oob >= 0.0);
        if (f > 0.0) CHECK(oob > prev);
        prev = oob;
    }
}

TEST_CASE("noisy propagation is reproducible") {
    const auto g = make_grid(1e11, 16, 4);
    const auto ph = typical_link().with_snr(500.0);
    const auto x = input(g, ph, 4);
    PropagationConfig cfg;
    cfg.n_steps = 200;
    cfg.seed = 99;
    const auto a = propagate(x, ph, cfg, ph.noise_psd);
    const auto b = propagate(x, ph, cfg, ph.noise_psd);
    CHECK(a.samples == b.samples);
    cfg.seed = 100;
    CHECK(propagate(x, ph, cfg, ph.noise_psd).samples != a.samples);
}

TEST_CASE("noise ensemble bookkeeping") {
    const auto g = make_grid(1e11, 16, 4);
    auto ph = typical_link().with_snr(100.0);
    ph.gamma = 0.0;
    PropagationConfig cfg;
    cfg.n_steps = 100;
    const auto st = ensemble_noise_stats(ph, g, cfg, 1000, 2024);
    CHECK(st.expected_added_power == doctest::Approx(ph.noise_psd * ph.length * g.w_prime / (2.0 * std::numbers::pi)));
    CHECK(std::abs(st.mean_added_power - st.expected_added_power) < 3.0 * st.added_power_stderr);
    CHECK(st.scaling_fit == doctest::Approx(0.5).epsilon(0.1));

    auto nl = typical_link().with_snr(500.0);
    const auto st2 = ensemble_noise_stats(nl, g, cfg, 200, 7);
    CHECK(std::abs(st2.scaling_fit - 0.5) < 0.05);

    auto quiet = ph;
    quiet.noise_psd = 0.0;
    quiet.signal_psd = ph.signal_psd;
    const auto st0 = ensemble_noise_stats(quiet, g, cfg, 10, 1);
    CHECK(st0.mean_added_power == 0.0);
    CHECK(st0.mean_deviation_norm == 0.0);
}

TEST_CASE("ensemble does not depend on the thread count") {
    const auto g = make_grid(1e11, 16, 2);
    const auto ph = typical_link().with_snr(300.0);
    PropagationConfig cfg;
    cfg.n_steps = 50;
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto a = ensemble_noise_stats(ph, g, cfg, 64, 5);
    omp_set_num_threads(4);
    const auto b = ensemble_noise_stats(ph, g, cfg, 64, 5);
    omp_set_num_threads(saved);
    CHECK(a.mean_added_power == b.mean_added_power);
    CHECK(a.deviation_ladder == b.deviation_ladder);
    CHECK(a.scaling_fit == b.scaling_fit);
}

TEST_CASE("field export") {
    const auto g = make_grid(1e11, 8, 2);
    const auto ph = typical_link().with_snr(10.0);
    const auto x = input(g, ph, 1).to_time();
    const auto path = tmp_path("field.bin");
    write_field_binary(x, path);
    const auto y = read_field_binary(path);
    CHECK(y.domain == Domain::time);
    CHECK(y.grid.m_total == 16);
    CHECK(y.grid.m_meaning == 8);
    CHECK(y.grid.big_t == x.grid.big_t);
    CHECK(y.samples == x.samples);
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    CHECK(static_cast<long>(f.tellg()) == 8 + 4 + 4 + 8 + 8 + 8 + 16 * 16);
    std::remove(path.c_str());

    const auto csv = tmp_path("field.csv");
    write_field_csv(x.to_frequency(), csv);
    std::ifstream c(csv);
    std::string line;
    int lines = 0;
    std::getline(c, line);
    CHECK(line.rfind("# domain=frequency", 0) == 0);
    std::getline(c, line);
    CHECK(line == "index,signed_index,coordinate,re,im,abs2");
    while (std::getline(c, line)) ++lines;
    CHECK(lines == 16);
    std::remove(csv.c_str());
    CHECK_THROWS_AS(read_field_binary("/nonexistent/x.bin"), ParameterError);
}
