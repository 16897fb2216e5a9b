#pragma once

#include <cstdint>

#include "nlcap/mi_mc.hpp"
#include "nlcap/nlse.hpp"

// Single-threaded, unoptimised versions of the parallel kernels: no symmetry
// folding, no partial-sum vectors, one loop nest each. Tests compare the
// production kernels against these; bench/ times both.
namespace nlcap::reference {

/// n^3 tensor Gauss-Legendre over the whole cube.
double g_cubature_tensor(double beta_tilde, int nodes_per_axis);

/// Left Riemann triple sum on the M-point grid k/M.
double g_discrete_riemann(double beta_tilde, int grid_m);

/// First-order perturbative field, same conventions as nlcap::phi_first_order.
ComplexField phi_first_order(const ComplexField& x_field, const PhysicalChannel& phys,
                             DispersionForm dispersion = DispersionForm::exact);

/// Mean and standard error of the per-sample MI, outer loop in index order.
MCEstimate estimate_mi(const PerSampleChannel& ch, long long n_outer, int n_inner,
                       std::uint64_t seed, const MIOptions& opts = {});

/// Added power E[P(Y) - P(Phi(L))] at phys.noise_psd, same seeding as
/// nlcap::ensemble_noise_stats.
MCEstimate ensemble_added_power(const PhysicalChannel& phys, const SpectralGrid& grid,
                                const PropagationConfig& config, int n_realizations,
                                std::uint64_t seed);

}  // namespace nlcap::reference
