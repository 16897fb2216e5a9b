#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/multiprecision/cpp_int.hpp>

#include "nlcap/errors.hpp"
#include "nlcap/quadrature.hpp"
#include "nlcap/specfun.hpp"

using namespace nlcap;
using doctest::Approx;

// High-precision reference values of g (50-digit arithmetic, series summed
// well past cancellation).
struct Frozen {
    double beta;
    double g;
};
constexpr Frozen kFrozen[] = {
    {1, 0.99972249357762966},  {5, 0.99322103083924695},   {10, 0.97468092705973923},
    {20, 0.91929395437482702}, {30, 0.86101755531839772},  {40, 0.80845445052746232},
    {50, 0.76211537382915406}, {200, 0.42802062793828808}, {800, 0.18185753449630731},
};

TEST_CASE("F kernel anchors") {
    CHECK(f_kernel(0.0) == 1.0);
    CHECK(f_kernel(std::numbers::pi) == Approx(3.0 / (std::numbers::pi * std::numbers::pi)).epsilon(1e-15));
    CHECK(f_kernel(1.0) == Approx(0.87577974517928642).epsilon(1e-14));
}

TEST_CASE("F kernel is even and bounded") {
    for (int i = 0; i <= 2000; ++i) {
        const double mu = 0.05 * i;
        const double f = f_kernel(mu);
        CHECK(f == f_kernel(-mu));
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        if (mu > 0) CHECK(f <= 3.0 / (mu * mu));
    }
}

TEST_CASE("F kernel branches meet at the switch") {
    const double s = kFKernelSwitch;
    const double a = f_kernel_series(s, 12);
    const double b = f_kernel_closed(s);
    CHECK(std::abs(a - b) < 1e-12);
    // the closed form is ruined by cancellation at small mu; the series is not
    CHECK(f_kernel(1e-4) == Approx(1.0 - 2e-8 / 15.0).epsilon(1e-15));
}

TEST_CASE("F kernel oracle from the Green function") {
    CHECK(std::abs(f_kernel_oracle(0.0, 32) - 1.0) < 1e-10);
    CHECK(std::abs(f_kernel_oracle(1.0, 64) - f_kernel(1.0)) < 1e-8);
    CHECK(std::abs(f_kernel_oracle(std::numbers::pi, 64) - 3.0 / (std::numbers::pi * std::numbers::pi)) < 1e-8);
    CHECK(std::abs(f_kernel_oracle(-2.5, 64) - f_kernel(2.5)) < 1e-8);
    CHECK_THROWS_AS(f_kernel_oracle(1.0, 4), ParameterError);
}

TEST_CASE("green0") {
    CHECK(green0(0.0, 0.7) == 0.0);
    CHECK(green0(0.3, 1.0) == 0.0);
    CHECK(green0(0.5, 0.5) == -0.25);
    CHECK(green0(0.2, 0.9) == green0(0.9, 0.2));
    const auto r = gauss_legendre(16, 0.0, 1.0);
    CHECK(std::abs(r.integrate([](double z) { return green0(z, z); }) + 1.0 / 6.0) < 1e-12);
    CHECK_THROWS_AS(green0(-0.1, 0.5), DomainError);
    CHECK_THROWS_AS(green0(0.5, 1.5), DomainError);
}

TEST_CASE("g series fixed points") {
    const auto g0 = g_series(0.0, 12);
    CHECK(g0.value == 1.0);
    CHECK(g0.method == GMethod::series);
    const auto g200 = g_series(200.0, 10);
    CHECK(g200.value == Approx(0.42).epsilon(0.01 / 0.42));
    for (const auto& f : kFrozen) {
        const auto g = g_series(f.beta, 14);
        CHECK(std::abs(g.value - f.g) < 1e-13);
        CHECK(g.err_estimate < 1e-13);
    }
}

TEST_CASE("g series working precision grows with beta") {
    const int d40 = g_series_working_digits(40, 12);
    const int d200 = g_series_working_digits(200, 12);
    const int d800 = g_series_working_digits(800, 12);
    CHECK(d40 < d200);
    CHECK(d200 < d800);
    CHECK(d800 > 155);
    SeriesOptions tight;
    tight.max_digits = 60;
    CHECK_THROWS_AS(g_series(800, 12, tight), PrecisionError);
    CHECK_THROWS_AS(g_series(10, 3), ParameterError);
}

// 4! a_n / ((2n+4)! 2^{2n}) with a_n = 2[(4n+2)! + (2n+1)!^2] / ((4n+3)! (2n+1)^2)
// must equal the SM coefficient 4! [(4n+2)! + (2n+1)!^2] / (2^{2n-1} (2n+4)! (4n+3)! (2n+1)^2).
TEST_CASE("series coefficient identity is exact for n <= 20") {
    using boost::multiprecision::cpp_int;
    using boost::multiprecision::cpp_rational;
    const auto fact = [](int k) {
        cpp_int r = 1;
        for (int i = 2; i <= k; ++i) r *= i;
        return r;
    };
    for (int n = 0; n <= 20; ++n) {
        const cpp_int num = fact(4 * n + 2) + fact(2 * n + 1) * fact(2 * n + 1);
        const cpp_int odd2 = cpp_int(2 * n + 1) * (2 * n + 1);
        const cpp_rational an = cpp_rational(2 * num, fact(4 * n + 3) * odd2);
        const cpp_rational main = 24 * an / cpp_rational(fact(2 * n + 4) * (cpp_int(1) << (2 * n)));
        // 2^{2n-1} in the denominator == multiply by 2 / 4^n
        const cpp_rational sm = cpp_rational(24 * 2 * num, fact(2 * n + 4) * fact(4 * n + 3) * odd2 * (cpp_int(1) << (2 * n)));
        CHECK(main == sm);
    }
}

TEST_CASE("g cubature") {
    CHECK(std::abs(g_cubature(0.0, 16).value - 1.0) < 1e-12);
    const auto c200 = g_cubature(200.0, 96);
    CHECK(std::abs(c200.value - 0.42) < 0.005 + 0.0081);
    CHECK(std::abs(c200.value - 0.42802062793828808) < 1e-6);
    const auto a = g_cubature(800.0, 128);
    const auto b = g_cubature(800.0, 160);
    CHECK(a.value > 0.05);
    CHECK(a.value < 0.25);
    CHECK(std::abs(a.value - b.value) < 1e-4);
    CHECK(std::abs(a.value - 0.18185753449630731) < 1e-4);
    CHECK(g_cubature(-37.0, 64).value == g_cubature(37.0, 64).value);
    CHECK_THROWS_AS(g_cubature(1.0, 4), ParameterError);
}

TEST_CASE("g cubature agrees with frozen values at automatic node counts") {
    for (const auto& f : kFrozen) {
        const auto g = g_cubature(f.beta, g_cubature_auto_nodes(f.beta));
        CHECK(std::abs(g.value - f.g) < 1e-7);
        CHECK(g.err_estimate >= 0.0);
    }
}

TEST_CASE("series / cubature / riemann agreement") {
    for (double b : {1.0, 5.0, 10.0, 20.0}) {
        const double s = g_series(b, 12).value;
        const double c = g_cubature(b, 64).value;
        CHECK(std::abs(s - c) < 1e-8);
    }
    CHECK(std::abs(g_series(10, 12).value - g_cubature(10, 64).value) < 1e-8);
    // Riemann sums are O(1/M); at M = 512 they sit well inside 1e-5 for small beta
    for (double b : {1.0, 5.0}) {
        const double r = g_discrete(b, 512, DiscreteMode::riemann).value;
        CHECK(std::abs(r - g_series(b, 12).value) < 1e-5 * std::max(1.0, b));
    }
}

TEST_CASE("g discrete riemann") {
    CHECK(g_discrete(0.0, 16, DiscreteMode::riemann).value == Approx(1.0).epsilon(1e-15));
    const double c10 = g_cubature(10, 64).value;
    CHECK(std::abs(g_discrete(10, 64, DiscreteMode::riemann).value - c10) < 0.02);
    const double c50 = g_cubature(50, 96).value;
    double prev = 1.0;
    for (int m : {16, 32, 64, 128}) {
        const double e = std::abs(g_discrete(50, m, DiscreteMode::riemann).value - c50);
        CHECK(e < prev);
        prev = e;
    }
    DiscreteOptions small;
    small.max_evaluations = 1000;
    CHECK_THROWS_AS(g_discrete(1, 16, DiscreteMode::riemann, small), BudgetError);
    CHECK_THROWS_AS(g_discrete(1, 4, DiscreteMode::riemann), ParameterError);
}

TEST_CASE("g discrete sine grid") {
    CHECK(g_discrete(0.0, 16, DiscreteMode::sine_grid).value == Approx(1.0).epsilon(1e-15));
    const auto s = g_discrete(10.0, 64, DiscreteMode::sine_grid);
    CHECK(s.method == GMethod::discrete_sine_grid);
    CHECK(s.value > 0.0);
    CHECK(s.value <= 1.0);
}

TEST_CASE("g asymptotic") {
    const auto a = g_asymptotic(200.0);
    CHECK(a.value == Approx(0.3391).epsilon(1e-3));
    const double exact200 = g_cubature(200, 96).value;
    CHECK(a.value < exact200);
    const double rel200 = std::abs(a.value - exact200) / exact200;
    const double exact2000 = g_cubature(2000, g_cubature_auto_nodes(2000)).value;
    const double rel2000 = std::abs(g_asymptotic(2000).value - exact2000) / exact2000;
    CHECK(rel2000 < rel200);
    CHECK(g_asymptotic(-200.0).value == a.value);
    CHECK_THROWS_AS(g_asymptotic(1.0), DomainError);
    CHECK_THROWS_AS(g_asymptotic(g_asymptotic_threshold()), DomainError);
}

TEST_CASE("g_eval dispatch and overlap band") {
    CHECK(g_eval(0.0).value == 1.0);
    CHECK(g_eval(200).value == Approx(0.42).epsilon(0.01 / 0.42));
    for (double b = 20.0; b <= 40.0; b += 2.5) {
        CHECK(std::abs(g_series(b, 10).value - g_cubature(b, 96).value) < 1e-6);
    }
    CHECK(std::abs(g_eval(30).value - g_series(30, 10).value) < 1e-6);
    CHECK(std::abs(g_eval(30).value - g_cubature(30, 96).value) < 1e-6);
    CHECK(g_eval(10).method == GMethod::series);
    CHECK(g_eval(100).method == GMethod::cubature);
    GEvalConfig fault;
    fault.series_switch = 0.0;
    fault.above_switch = GMethod::asymptotic;
    CHECK_THROWS_AS(g_eval(1.0, fault), DomainError);
}

TEST_CASE("g is even, bounded and decreasing on the sampled grid") {
    double prev = 2.0;
    for (double b : {0.0, 1.0, 5.0, 10.0, 50.0, 200.0, 800.0}) {
        const double g = g_eval(b).value;
        CHECK(g > 0.0);
        CHECK(g <= 1.0);
        CHECK(g < prev);
        CHECK(g_eval(-b).value == g);
        prev = g;
    }
}
