#pragma once

#include <string_view>

#include "nlcap/params.hpp"
#include "nlcap/specfun.hpp"

namespace nlcap {

// Spectral-efficiency models, all in nats per symbol.
//
//   shannon                 ln(1 + snr)
//   dispersive_perturbative ln(snr) - (gamma_tilde^2 / 3) g(beta_tilde)
//   nondispersive_exact     ln(snr) - 1/2 \int_0^inf e^{-t} ln(1 + t^2 gamma_tilde^2 / 3) dt
//   nondispersive_expansion ln(snr) - gamma_tilde^2 / 3  [+ 2 gamma_tilde^4 / 3]

enum class SEModel { shannon, dispersive_perturbative, nondispersive_exact, nondispersive_expansion };

std::string_view to_string(SEModel m);

struct SEPoint {
    double snr = 0.0;
    double gamma_tilde = 0.0;
    double beta_tilde = 0.0;
    double se_nats = 0.0;
    SEModel model = SEModel::shannon;
};

double shannon_se(double snr);

double dispersive_se(double snr, double gamma_tilde, double beta_tilde, const GEvalConfig& g = {});

/// Same, with g(beta_tilde) already evaluated.
double dispersive_se_with_g(double snr, double gamma_tilde, double g_value);

struct QuadSpec {
    enum class Method { automatic, laguerre, adaptive };
    Method method = Method::automatic;
    int laguerre_points = 64;
    double tolerance = 1e-10;  ///< absolute
};

struct PenaltyValue {
    double value = 0.0;
    double abs_error = 0.0;
    bool used_adaptive = false;
};

/// 1/2 \int_0^inf e^{-t} ln(1 + t^2 gamma_tilde^2 / 3) dt.
/// Automatic mode tries Gauss-Laguerre (n and 2n points); when they disagree
/// (large gamma_tilde) it uses a geometrically graded composite Gauss-Legendre
/// rule, and only then adaptive Gauss-Kronrod. Throws QuadratureError when the
/// achieved error exceeds 1e-9.
PenaltyValue nondispersive_penalty(double gamma_tilde, const QuadSpec& quad = {});

double nondispersive_se_exact(double snr, double gamma_tilde, const QuadSpec& quad = {});

double nondispersive_se_expansion(double snr, double gamma_tilde, bool include_quartic = false);

SEPoint evaluate_model(SEModel model, double snr, double gamma_tilde, double beta_tilde,
                       const GEvalConfig& g = {});

struct CrossoverOptions {
    double lo_db = 0.0;
    double hi_db = 60.0;
    double scan_step_db = 0.25;
    double tol_db = 0.01;
    GEvalConfig g;
};

struct Crossover {
    double snr_db = 0.0;
    double snr_linear = 0.0;
    double g_value = 0.0;
};

/// SNR where the dispersive curve drops below the exact nondispersive one,
/// both evaluated with gamma_tilde(snr) from `phys`. Throws NoBracketError
/// (degenerate() == true when g == 1, i.e. no dispersion).
Crossover crossover_snr(const PhysicalChannel& phys, const CrossoverOptions& opts = {});

/// Default ratio for applicability_bound: puts the typical link (beta_tilde
/// ~ 200) at ~30 dB. There is no quantitative criterion behind it.
inline constexpr double kDefaultApplicabilityRatio = 0.62;

struct ApplicabilityBound {
    bool bounded = false;  ///< false: gamma == 0, any SNR is fine
    double snr_linear = 0.0;
    double snr_db = 0.0;
};

/// Largest SNR with g gamma_tilde^2 <= ratio_max / 3, i.e. the estimated next
/// correction (g gamma_tilde^2)^2 is at most ratio_max times the first one.
ApplicabilityBound applicability_bound(const PhysicalChannel& phys,
                                       double ratio_max = kDefaultApplicabilityRatio,
                                       const GEvalConfig& g = {});

}  // namespace nlcap
