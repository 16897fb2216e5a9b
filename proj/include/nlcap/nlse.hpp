#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlcap/params.hpp"
#include "nlcap/rng.hpp"

namespace nlcap {

// Discretized channel  d_z psi + i beta d_t^2 psi - i gamma |psi|^2 psi = eta
// on a periodic time window T.
//
// Conventions:
//   t_j = j dt,  j = 0..M'-1,   dt = T/M'
//   omega_k = 2 pi k / T with k the signed FFT index in [-M'/2, M'/2)
//   psi(t_j) = d_omega sum_k X_k e^{-i omega_k t_j},   d_omega = 1/T
//   X_k      = dt sum_j psi(t_j) e^{+i omega_k t_j}
// so a linear span gives X_k(L) = e^{i beta omega_k^2 L} X_k(0).
// W is an angular bandwidth here: T W = 2 pi M. The meaning band is the M
// bins with signed index in [-floor(M/2), ceil(M/2) - 1].

using cplx = std::complex<double>;

struct SpectralGrid {
    double big_t = 0.0;
    int m_meaning = 0;
    int m_total = 0;
    int oversampling = 1;
    double delta_t = 0.0;
    double delta_omega = 0.0;
    double w = 0.0;
    double w_prime = 0.0;

    /// Signed frequency index of FFT bin k.
    int signed_index(int k) const { return k < (m_total + 1) / 2 ? k : k - m_total; }
    double omega(int k) const;
    bool in_band(int k) const;
};

/// Throws ParameterError for m_meaning < 2, oversampling < 1 or non-integer.
SpectralGrid make_grid(double w, int m_meaning, double oversampling);

enum class Domain : std::uint8_t { time = 0, frequency = 1 };

struct ComplexField {
    std::vector<cplx> samples;  ///< FFT order in the frequency domain
    Domain domain = Domain::time;
    SpectralGrid grid;

    ComplexField to_time() const;
    ComplexField to_frequency() const;
    /// (1/T) \int |psi|^2 dt, from either domain.
    double power() const;
    /// Part of power() carried by bins outside the meaning band.
    double out_of_band_power() const;
};

ComplexField zero_field(const SpectralGrid& grid, Domain domain);

/// i.i.d. circular Gaussian X_k with E|X_k|^2 = P / d_omega in the meaning
/// bins, zero elsewhere. Frequency domain.
ComplexField sample_gaussian_input(const SpectralGrid& grid, double p, RandomStream& rng);

enum class SplitScheme { strang, euler };

struct PropagationConfig {
    int n_steps = 1000;
    /// euler: first-order Lie splitting (dispersion then Kerr), for cross-checks.
    SplitScheme scheme = SplitScheme::strang;
    std::uint64_t seed = 0;
    /// Abort when a noiseless step changes the power by more than this (relative).
    double instability_tol = 1e-6;
};

/// Split-step Fourier over [0, phys.length] using phys.beta and phys.gamma
/// (phys.bandwidth is not used; the grid fixes W). With noise_q, every step
/// adds a circular Gaussian of variance Q dz / dt to each time sample, so a
/// linear span collects noise power Q L W' / 2pi. Returns the field in the
/// domain it was given in. Throws InstabilityError.
ComplexField propagate(const ComplexField& field, const PhysicalChannel& phys,
                       const PropagationConfig& config, std::optional<double> noise_q = {});

enum class DispersionForm {
    exact,  ///< omega_k^2
    sine    ///< (2 sin(pi k / M') M' / T)^2
};

struct PerturbativeOptions {
    DispersionForm dispersion = DispersionForm::exact;
    int max_meaning = 64;  ///< direct sum costs M' M^2
};

/// (1 - e^{-mu}) / mu, i.e. K(mu, z) at z = L; series below |mu| = 1e-6.
cplx k_kernel(cplx mu);

/// Phi0 + Phi1 at z = L in the frequency domain:
///   Phi0_k = e^{i beta w_k^2 L} X_k
///   Phi1_k = i gamma L d_omega^2 e^{i beta w_k^2 L}
///            sum_{k1,k2} X_k1 X_k2 conj(X_k3) K(mu),  k3 = k1 + k2 - k (mod M')
///   mu     = i beta L (w_k^2 + w_k3^2 - w_k1^2 - w_k2^2)
/// x_field must be band-limited to W. Throws BudgetError when M > max_meaning.
ComplexField phi_perturbative(const ComplexField& x_field, const PhysicalChannel& phys,
                              const PerturbativeOptions& opts = {});

/// First-order part only (Phi1).
ComplexField phi_first_order(const ComplexField& x_field, const PhysicalChannel& phys,
                             const PerturbativeOptions& opts = {});

struct NoiseStats {
    int n_realizations = 0;
    double mean_added_power = 0.0;   ///< E[P(Y) - P(Phi(L))] at Q
    double added_power_stderr = 0.0;
    double expected_added_power = 0.0;  ///< Q L W' / 2pi
    double mean_deviation_norm = 0.0;   ///< E sqrt((1/T) \int |Y - Phi(L)|^2 dt) at Q
    double deviation_stderr = 0.0;
    std::vector<double> q_ladder;         ///< Q, 4Q, 16Q
    std::vector<double> deviation_ladder; ///< mean deviation norm at each rung
    double scaling_fit = 0.0;             ///< log-log slope of deviation vs Q
};

/// One Gaussian input (drawn from `seed`) at power phys.signal_psd, propagated
/// without noise for Phi(L), then n_realizations noisy runs at each rung of
/// the Q ladder. Realization i uses derive_seed(seed, i); realizations run in
/// parallel and are reduced in index order.
NoiseStats ensemble_noise_stats(const PhysicalChannel& phys, const SpectralGrid& grid,
                                const PropagationConfig& config, int n_realizations,
                                std::uint64_t seed);

/// Field snapshots. Binary layout (little-endian):
///   char[8] "NLCFIELD", uint32 version = 1, uint32 domain tag,
///   uint64 M', double T, uint64 M, then M' pairs of doubles (re, im).
void write_field_binary(const ComplexField& field, const std::string& path);
ComplexField read_field_binary(const std::string& path);
/// Columns: index,signed_index,coordinate,re,im,abs2 (coordinate is t or omega).
void write_field_csv(const ComplexField& field, const std::string& path);

}  // namespace nlcap
