#pragma once

#include <map>
#include <string>

namespace nlcap {

// Unit system at the interface: seconds, kilometres, watts.
// Bandwidth W is a plain scalar in s^-1 where "100 GHz" is written 1e11;
// with this reading beta*L*W^2 reproduces the quoted beta_tilde ~ 200 for
// the typical link below.

inline constexpr double kPs2 = 1e-24;  ///< 1 ps^2 in s^2

struct PhysicalChannel {
    double beta = 0.0;        ///< dispersion [s^2/km]
    double gamma = 0.0;       ///< Kerr coefficient [1/(W km)]
    double length = 0.0;      ///< L [km]
    double bandwidth = 0.0;   ///< W [s^-1]
    double noise_psd = 0.0;   ///< Q [W s/km], per unit length and frequency
    double signal_psd = 0.0;  ///< P [W s]

    /// Builds Q from the quoted noise power P_noise = Q L W / 2pi.
    static PhysicalChannel from_noise_power(double beta, double gamma, double length,
                                            double bandwidth, double p_noise, double snr);

    /// Copy with P chosen so that P/(QL) == snr.
    PhysicalChannel with_snr(double snr) const;

    void validate() const;
};

struct DimensionlessChannel {
    double beta_tilde = 0.0;   ///< beta L W^2
    double gamma_tilde = 0.0;  ///< gamma L P_ave
    double snr = 0.0;          ///< P/(QL)
    double p_ave = 0.0;        ///< P W / 2pi [W]
    double p_noise = 0.0;      ///< Q L W / 2pi [W]
};

DimensionlessChannel derive_dimensionless(const PhysicalChannel& phys);

/// gamma_tilde at the given SNR with the noise floor of `phys` held fixed.
double gamma_tilde_of_snr(const PhysicalChannel& phys, double snr);

double noise_power(const PhysicalChannel& phys);

/// Inverse of derive_dimensionless for a reference (L, W, P_noise).
PhysicalChannel from_dimensionless(double beta_tilde, double gamma_tilde, double snr,
                                   double length, double bandwidth, double p_noise);

/// 20 ps^2/km, 1.31 /(W km), 1000 km, W = 1e11, P_noise = 5.3e-4 mW, at SNR = 1.
PhysicalChannel typical_link();

double db_to_linear(double db);
double linear_to_db(double x);

// ---------------------------------------------------------------------------
// Key-value config files.
//
//   # comment
//   beta_ps2_per_km      = 20
//   gamma_per_w_km       = 1.31
//   length_km            = 1000
//   bandwidth_per_s      = 1e11
//   p_noise_mw           = 5.3e-4     (or p_noise_w, or noise_psd_w_s_per_km)
//   snr_db               = 30         (or snr, or signal_psd_w_s)
//
// Unknown keys are left for the caller; see ConfigEntries::take.

class ConfigEntries {
public:
    static ConfigEntries parse(const std::string& text);
    static ConfigEntries load(const std::string& path);

    bool has(const std::string& key) const;
    /// Removes and returns the value as a double; throws ParameterError on garbage.
    double take_double(const std::string& key);
    double take_double(const std::string& key, double fallback);
    std::string take_string(const std::string& key, const std::string& fallback);
    /// Adds or replaces an entry (command-line overrides); updates canonical().
    void set(const std::string& key, const std::string& value);
    /// Keys not yet consumed.
    const std::map<std::string, std::string>& remaining() const { return values_; }
    /// Stable textual form of all entries as parsed (for hashing).
    const std::string& canonical() const { return canonical_; }

private:
    void rebuild_canonical();

    std::map<std::string, std::string> values_;
    std::map<std::string, std::string> all_;
    std::string canonical_;
};

/// Consumes the physical keys; missing keys fall back to typical_link().
PhysicalChannel channel_from_config(ConfigEntries& entries);

}  // namespace nlcap
