#pragma once

#include <cstdint>
#include <string_view>

namespace nlcap {

// The penalty shape function g(beta_tilde) multiplying gamma_tilde^2/3 in the
// first nonlinear correction to the spectral efficiency, and its kernel
//
//     F(mu) = 3 (mu^2 - sin^2 mu) / mu^4,   F(0) = 1,
//
// which arises from integrating derivatives of the Green function of d^2/dz^2
// against the four-wave phase mismatch. g is available four ways:
//
//   series     alternating power series in beta_tilde^2 (extended precision)
//   cubature   g = \int_{[0,1]^3} F((beta_tilde/4)(x1-x3)(x2-x3))  (Gauss-Legendre)
//   discrete   the finite triple sum (Riemann or sine-grid form)
//   asymptotic (16 pi / b)(ln(b/2) + gamma_E - 23/6), large beta_tilde only

enum class GMethod { series, cubature, discrete_riemann, discrete_sine_grid, asymptotic };

std::string_view to_string(GMethod m);

struct GEval {
    double value = 0.0;
    GMethod method = GMethod::series;
    double err_estimate = 0.0;
    double beta_tilde = 0.0;
};

/// F(mu). Uses the alternating series below kFKernelSwitch.
double f_kernel(double mu);

inline constexpr double kFKernelSwitch = 0.5;

/// The two branches of f_kernel, exposed for the switch-point check.
double f_kernel_series(double mu, int terms);
double f_kernel_closed(double mu);

/// F(mu) by direct Gauss-Legendre quadrature of the Green-function double
/// integral, split along the diagonal where dG0 jumps. `order` nodes per
/// triangle axis. Throws QuadratureError if the imaginary part does not vanish.
double f_kernel_oracle(double mu, int order);

/// Dimensionless Green function G0(z1, z2) of d^2/dz^2 on [0,1] with zero ends.
double green0(double z1, double z2);

struct SeriesOptions {
    int max_digits = 1000;  ///< cap on the working precision (decimal digits)
    int guard_digits = 12;
};

/// Alternating series with working precision sized to log10(max term) +
/// target_digits + guard. Throws PrecisionError above the cap.
GEval g_series(double beta_tilde, int target_digits, const SeriesOptions& opts = {});

/// Number of decimal digits g_series would use; useful for cost checks.
int g_series_working_digits(double beta_tilde, int target_digits,
                            const SeriesOptions& opts = {});

/// The cube integral reduced exactly to two smooth pieces on the unit square
/// (difference variables, x3 integrated out), each done by tensor
/// Gauss-Legendre: O(n^2) kernel calls. err_estimate is |Q(n) - Q(n/2)|, a
/// pessimistic bound for Q(n). OpenMP-parallel, and bit-identical for any
/// thread count.
GEval g_cubature(double beta_tilde, int nodes_per_axis);

/// Plain n^3 tensor Gauss-Legendre over the cube. Cross-check for g_cubature.
GEval g_cubature_tensor(double beta_tilde, int nodes_per_axis);

/// Node count g_eval uses above the series switch.
int g_cubature_auto_nodes(double beta_tilde);

enum class DiscreteMode { riemann, sine_grid };

struct DiscreteOptions {
    std::uint64_t max_evaluations = 300'000'000;  ///< budget on grid_m^3
    /// Multiplies (beta_tilde/2)[sum of +-Omega_bar^2/W^2]. The naive
    /// continuum limit of the sine-grid sum gives -beta_tilde (x1-x3)(x2-x3);
    /// 1/4 aligns it with the integral form at small (x1-x3)(x2-x3).
    double sine_grid_scale = 0.25;
};

GEval g_discrete(double beta_tilde, int grid_m, DiscreteMode mode,
                 const DiscreteOptions& opts = {});

/// Smallest beta_tilde where the asymptotic bracket is positive: 2 e^{23/6 - gamma_E}.
double g_asymptotic_threshold();

GEval g_asymptotic(double beta_tilde);

struct GEvalConfig {
    double series_switch = 40.0;
    /// Method used above the switch (cubature; asymptotic only for fault injection).
    GMethod above_switch = GMethod::cubature;
    int series_digits = 12;
};

GEval g_eval(double beta_tilde, const GEvalConfig& cfg = {});

}  // namespace nlcap
