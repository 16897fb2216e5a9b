#include <doctest.h>

#include <omp.h>

#include <cmath>

#include "nlcap/reference.hpp"
#include "nlcap/specfun.hpp"

using namespace nlcap;

namespace {

struct Threads {
    int saved = omp_get_max_threads();
    explicit Threads(int n) { omp_set_num_threads(n); }
    ~Threads() { omp_set_num_threads(saved); }
};

PhysicalChannel link_at(double snr) {
    return typical_link().with_snr(snr);
}

}  // namespace

TEST_CASE("tensor cubature matches the serial triple loop") {
    Threads t(4);
    for (double b : {0.0, 10.0, 200.0}) {
        const double par = g_cubature_tensor(b, 48).value;
        const double ser = reference::g_cubature_tensor(b, 48);
        CHECK(par == doctest::Approx(ser).epsilon(1e-13));
    }
}

TEST_CASE("reduced cubature matches the serial triple loop") {
    // the serial tensor rule at n = 160 is converged to ~1e-12 at beta_tilde = 50
    CHECK(g_cubature(50.0, 64).value == doctest::Approx(reference::g_cubature_tensor(50.0, 160)).epsilon(1e-11));
}

TEST_CASE("Riemann sum matches the serial loop") {
    Threads t(3);
    for (int m : {16, 33, 64}) {
        CHECK(g_discrete(200.0, m, DiscreteMode::riemann).value ==
              doctest::Approx(reference::g_discrete_riemann(200.0, m)).epsilon(1e-13));
    }
}

TEST_CASE("first-order field matches the serial loop") {
    Threads t(4);
    const auto g = make_grid(1e11, 12, 3);
    const auto ph = link_at(1000.0);
    RandomStream rng(42);
    const auto x = sample_gaussian_input(g, ph.signal_psd, rng);
    for (auto form : {DispersionForm::exact, DispersionForm::sine}) {
        PerturbativeOptions o;
        o.dispersion = form;
        const auto a = phi_first_order(x, ph, o);
        const auto b = reference::phi_first_order(x, ph, form);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < a.samples.size(); ++i) {
            num += std::norm(a.samples[i] - b.samples[i]);
            den += std::norm(b.samples[i]);
        }
        CHECK(den > 0.0);
        CHECK(std::sqrt(num / den) < 1e-13);
    }
}

TEST_CASE("parallel MI equals the serial loop bit for bit") {
    Threads t(4);
    const auto ch = PerSampleChannel::from_snr(1000.0, 0.5);
    MIOptions o;
    o.mode = OutputMode::analytic;
    const auto a = estimate_mi(ch, 400, 200, 9, o, true);
    const auto b = reference::estimate_mi(ch, 400, 200, 9, o);
    CHECK(a.mi.mean == b.mean);
    CHECK(a.mi.std_error == b.std_error);
}

TEST_CASE("parallel noise ensemble equals the serial loop bit for bit") {
    Threads t(4);
    auto ph = link_at(100.0);
    const auto g = make_grid(1e11, 8, 2);
    PropagationConfig c;
    c.n_steps = 20;
    const auto a = ensemble_noise_stats(ph, g, c, 16, 5);
    const auto b = reference::ensemble_added_power(ph, g, c, 16, 5);
    CHECK(a.mean_added_power == b.mean);
    CHECK(a.added_power_stderr == b.std_error);
}
