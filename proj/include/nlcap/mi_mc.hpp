#pragma once

#include <complex>
#include <cstdint>

#include "nlcap/rng.hpp"

namespace nlcap {

// Zero-dispersion channel, one time sample at a time (dt absorbed into ql):
//   d psi = i gamma |psi|^2 psi dz + d eta,   E|eta(L)|^2 = ql.

struct PerSampleChannel {
    double p = 1.0;        ///< E|X|^2
    double ql = 1e-3;      ///< accumulated noise variance
    double gamma_l = 0.0;  ///< gamma L [1/power]

    double snr() const { return p / ql; }
    double gamma_tilde() const { return gamma_l * p; }
    void validate() const;

    static PerSampleChannel from_snr(double snr, double gamma_tilde, double p = 1.0);
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;  ///< sample std / sqrt(n)
    long long n_samples = 0;
};

/// x e^{i gamma_l |x|^2}
std::complex<double> exact_map(std::complex<double> x, const PerSampleChannel& ch);

/// (u, v) with u + iv = y e^{-i arg x - i mu} - |x|, mu = gamma_l |x|^2.
std::complex<double> rotated_coordinates(std::complex<double> y, std::complex<double> x,
                                         const PerSampleChannel& ch);

/// Leading-order conditional density of y given x: a Gaussian in (u, v) with
/// covariance (ql/2) [[1, mu], [mu, 1 + 4 mu^2 / 3]].
double conditional_pdf(std::complex<double> y, std::complex<double> x, const PerSampleChannel& ch);
double log_conditional_pdf(std::complex<double> y, std::complex<double> x,
                           const PerSampleChannel& ch);

/// Draw y from conditional_pdf(. | x).
std::complex<double> sample_conditional(std::complex<double> x, const PerSampleChannel& ch,
                                        RandomStream& rng);

/// Rotation splitting: each of n_steps steps is a half rotation, a noise kick
/// of variance ql / n_steps, and another half rotation. Exact when ql = 0.
std::complex<double> simulate_sample(std::complex<double> x, const PerSampleChannel& ch,
                                     int n_steps, RandomStream& rng);

enum class OutputMode { simulate, analytic };

struct MIOptions {
    OutputMode mode = OutputMode::simulate;
    int n_steps = 400;             ///< for simulate mode
    double proposal_scale = 3.0;   ///< c: proposal E|X' - x_hat|^2 = c^2 ql
    double input_phase = 0.0;      ///< global rotation applied to every input
};

struct MISample {
    double density = 0.0;  ///< ln p(Y|X) - ln P_out(Y)
    double ess = 0.0;      ///< effective sample size of the inner importance weights
    double control = 0.0;  ///< |X|^2/p - 1, exactly zero-mean
};

/// One outer sample, fully determined by (seed, index).
MISample mi_sample(const PerSampleChannel& ch, long long index, int n_inner, std::uint64_t seed,
                   const MIOptions& opts = {});

struct MIResult {
    MCEstimate mi;            ///< nats per sample
    /// Same samples with the zero-mean control |X|^2/p - 1 regressed out
    /// (coefficient fitted on the samples, so O(1/n) biased).
    MCEstimate mi_controlled;
    double min_ess = 0.0;
    double mean_ess = 0.0;
    long long low_ess_count = 0;  ///< outer samples with ess < 0.1 n_inner
    bool degenerate_proposal = false;  ///< mean ess < 0.1 n_inner
};

/// Monte-Carlo I(X;Y) for circular Gaussian X of power p. The outer loop is
/// OpenMP-parallel; the result does not depend on the thread count.
/// Throws ParameterError for n_outer < 1000, n_inner < 1000 or snr < 100
/// unless `allow_small` is set (tests, quick looks).
MIResult estimate_mi(const PerSampleChannel& ch, long long n_outer, int n_inner,
                     std::uint64_t seed, const MIOptions& opts = {}, bool allow_small = false);

}  // namespace nlcap
