#include "nlcap/params.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nlcap/errors.hpp"

namespace nlcap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ParameterError(std::string(name) + " must be positive and finite");
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void PhysicalChannel::validate() const {
    require_positive(length, "length");
    require_positive(bandwidth, "bandwidth");
    require_positive(noise_psd, "noise_psd");
    if (!(signal_psd >= 0.0) || !std::isfinite(signal_psd)) {
        throw ParameterError("signal_psd must be non-negative and finite");
    }
    if (!std::isfinite(beta) || !std::isfinite(gamma)) {
        throw ParameterError("beta and gamma must be finite");
    }
}

PhysicalChannel PhysicalChannel::from_noise_power(double beta, double gamma, double length,
                                                  double bandwidth, double p_noise,
                                                  double snr) {
    require_positive(length, "length");
    require_positive(bandwidth, "bandwidth");
    require_positive(p_noise, "p_noise");
    PhysicalChannel ch;
    ch.beta = beta;
    ch.gamma = gamma;
    ch.length = length;
    ch.bandwidth = bandwidth;
    ch.noise_psd = kTwoPi * p_noise / (length * bandwidth);
    ch.signal_psd = snr * ch.noise_psd * length;
    ch.validate();
    return ch;
}

PhysicalChannel PhysicalChannel::with_snr(double snr) const {
    if (!(snr >= 0.0)) throw ParameterError("snr must be non-negative");
    PhysicalChannel ch = *this;
    ch.signal_psd = snr * noise_psd * length;
    return ch;
}

double noise_power(const PhysicalChannel& phys) {
    return phys.noise_psd * phys.length * phys.bandwidth / kTwoPi;
}

DimensionlessChannel derive_dimensionless(const PhysicalChannel& phys) {
    phys.validate();
    DimensionlessChannel d;
    d.beta_tilde = phys.beta * phys.length * phys.bandwidth * phys.bandwidth;
    d.snr = phys.signal_psd / (phys.noise_psd * phys.length);
    d.p_noise = noise_power(phys);
    d.p_ave = d.snr * d.p_noise;
    d.gamma_tilde = phys.gamma * phys.length * d.p_ave;
    return d;
}

double gamma_tilde_of_snr(const PhysicalChannel& phys, double snr) {
    phys.validate();
    if (!(snr >= 0.0)) throw ParameterError("snr must be non-negative");
    return phys.gamma * phys.length * (snr * noise_power(phys));
}

PhysicalChannel from_dimensionless(double beta_tilde, double gamma_tilde, double snr,
                                   double length, double bandwidth, double p_noise) {
    require_positive(snr, "snr");
    PhysicalChannel ch = PhysicalChannel::from_noise_power(
        beta_tilde / (length * bandwidth * bandwidth), 0.0, length, bandwidth, p_noise, snr);
    ch.gamma = gamma_tilde / (length * snr * p_noise);
    return ch;
}

PhysicalChannel typical_link() {
    return PhysicalChannel::from_noise_power(20.0 * kPs2, 1.31, 1000.0, 1e11, 5.3e-7, 1.0);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double x) { return 10.0 * std::log10(x); }

// ---------------------------------------------------------------------------

ConfigEntries ConfigEntries::parse(const std::string& text) {
    ConfigEntries out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParameterError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ParameterError("config line " + std::to_string(lineno) + ": empty key or value");
        }
        if (out.values_.count(key)) {
            throw ParameterError("config line " + std::to_string(lineno) + ": duplicate key " + key);
        }
        out.values_[key] = value;
    }
    out.all_ = out.values_;
    out.rebuild_canonical();
    return out;
}

void ConfigEntries::rebuild_canonical() {
    canonical_.clear();
    for (const auto& [k, v] : all_) canonical_ += k + "=" + v + "\n";
}

void ConfigEntries::set(const std::string& key, const std::string& value) {
    const std::string k = trim(key), v = trim(value);
    if (k.empty() || v.empty()) throw ParameterError("config override: empty key or value");
    values_[k] = v;
    all_[k] = v;
    rebuild_canonical();
}

ConfigEntries ConfigEntries::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParameterError("cannot open config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

bool ConfigEntries::has(const std::string& key) const { return values_.count(key) != 0; }

double ConfigEntries::take_double(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ParameterError("missing config key " + key);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(it->second, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != it->second.size()) {
        throw ParameterError("config key " + key + ": not a number: " + it->second);
    }
    values_.erase(it);
    return v;
}

double ConfigEntries::take_double(const std::string& key, double fallback) {
    return has(key) ? take_double(key) : fallback;
}

std::string ConfigEntries::take_string(const std::string& key, const std::string& fallback) {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::string v = it->second;
    values_.erase(it);
    return v;
}

PhysicalChannel channel_from_config(ConfigEntries& e) {
    const PhysicalChannel ref = typical_link();
    const double beta = e.take_double("beta_ps2_per_km", ref.beta / kPs2) * kPs2;
    const double gamma = e.take_double("gamma_per_w_km", ref.gamma);
    const double length = e.take_double("length_km", ref.length);
    const double bandwidth = e.take_double("bandwidth_per_s", ref.bandwidth);

    const int noise_keys = e.has("p_noise_mw") + e.has("p_noise_w") + e.has("noise_psd_w_s_per_km");
    if (noise_keys > 1) throw ParameterError("give only one of p_noise_mw, p_noise_w, noise_psd_w_s_per_km");
    double q = 0.0;
    if (e.has("noise_psd_w_s_per_km")) {
        q = e.take_double("noise_psd_w_s_per_km");
    } else {
        double p_noise = noise_power(ref);
        if (e.has("p_noise_mw")) p_noise = e.take_double("p_noise_mw") * 1e-3;
        if (e.has("p_noise_w")) p_noise = e.take_double("p_noise_w");
        require_positive(p_noise, "p_noise");
        require_positive(length, "length");
        require_positive(bandwidth, "bandwidth");
        q = kTwoPi * p_noise / (length * bandwidth);
    }

    const int signal_keys = e.has("snr_db") + e.has("snr") + e.has("signal_psd_w_s");
    if (signal_keys > 1) throw ParameterError("give only one of snr_db, snr, signal_psd_w_s");
    PhysicalChannel ch;
    ch.beta = beta;
    ch.gamma = gamma;
    ch.length = length;
    ch.bandwidth = bandwidth;
    ch.noise_psd = q;
    if (e.has("signal_psd_w_s")) {
        ch.signal_psd = e.take_double("signal_psd_w_s");
    } else {
        double snr = 1.0;
        if (e.has("snr_db")) snr = db_to_linear(e.take_double("snr_db"));
        if (e.has("snr")) snr = e.take_double("snr");
        ch.signal_psd = snr * q * length;
    }
    ch.validate();
    return ch;
}

}  // namespace nlcap
