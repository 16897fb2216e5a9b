#include "nlcap/nlse.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>

#include "nlcap/errors.hpp"

namespace nlcap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are made once per size with FFTW_UNALIGNED so any buffer can be used.
struct PlanPair {
    fftw_plan forward = nullptr;   // e^{-2 pi i k j / n}
    fftw_plan backward = nullptr;  // e^{+2 pi i k j / n}
};

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

const PlanPair& plans_for(int n) {
    static std::map<int, PlanPair> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<cplx> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.forward = fftw_plan_dft_1d(n, pa, pb, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft_1d(n, pa, pb, FFTW_BACKWARD, flags);
    return cache.emplace(n, p).first->second;
}

void fft_forward(const PlanPair& p, std::vector<cplx>& in, std::vector<cplx>& out) {
    fftw_execute_dft(p.forward, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
}

void fft_backward(const PlanPair& p, std::vector<cplx>& in, std::vector<cplx>& out) {
    fftw_execute_dft(p.backward, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
}

double mean_abs2(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return s / static_cast<double>(v.size());
}

double dispersion_omega2(const SpectralGrid& g, int k, DispersionForm form) {
    if (form == DispersionForm::exact) {
        const double w = g.omega(k);
        return w * w;
    }
    const double s = 2.0 * std::sin(std::numbers::pi * g.signed_index(k) / g.m_total) * g.m_total / g.big_t;
    return s * s;
}

}  // namespace

// ---------------------------------------------------------------------------

double SpectralGrid::omega(int k) const { return kTwoPi * signed_index(k) / big_t; }

bool SpectralGrid::in_band(int k) const {
    const int s = signed_index(k);
    return s >= -(m_meaning / 2) && s <= (m_meaning + 1) / 2 - 1;
}

SpectralGrid make_grid(double w, int m_meaning, double oversampling) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("make_grid: w must be positive");
    if (m_meaning < 2) throw ParameterError("make_grid: m_meaning must be >= 2");
    if (!(oversampling >= 1.0) || oversampling != std::floor(oversampling) || oversampling > 1e6) {
        throw ParameterError("make_grid: oversampling must be an integer >= 1");
    }
    SpectralGrid g;
    g.m_meaning = m_meaning;
    g.oversampling = static_cast<int>(oversampling);
    g.m_total = g.oversampling * m_meaning;
    g.w = w;
    g.w_prime = g.oversampling * w;
    g.big_t = kTwoPi * m_meaning / w;
    g.delta_t = g.big_t / g.m_total;
    g.delta_omega = 1.0 / g.big_t;
    return g;
}

ComplexField zero_field(const SpectralGrid& grid, Domain domain) {
    ComplexField f;
    f.grid = grid;
    f.domain = domain;
    f.samples.assign(static_cast<std::size_t>(grid.m_total), cplx{});
    return f;
}

ComplexField ComplexField::to_time() const {
    if (domain == Domain::time) return *this;
    ComplexField out = zero_field(grid, Domain::time);
    std::vector<cplx> in = samples;
    fft_forward(plans_for(grid.m_total), in, out.samples);
    for (auto& z : out.samples) z *= grid.delta_omega;
    return out;
}

ComplexField ComplexField::to_frequency() const {
    if (domain == Domain::frequency) return *this;
    ComplexField out = zero_field(grid, Domain::frequency);
    std::vector<cplx> in = samples;
    fft_backward(plans_for(grid.m_total), in, out.samples);
    for (auto& z : out.samples) z *= grid.delta_t;
    return out;
}

double ComplexField::power() const {
    const double s = mean_abs2(samples) * grid.m_total;
    if (domain == Domain::time) return s / grid.m_total;
    // Parseval: (1/T) \int |psi|^2 = d_omega^2 sum |X_k|^2
    return grid.delta_omega * grid.delta_omega * s;
}

double ComplexField::out_of_band_power() const {
    const ComplexField f = to_frequency();
    double s = 0.0;
    for (int k = 0; k < grid.m_total; ++k) {
        if (!grid.in_band(k)) s += std::norm(f.samples[k]);
    }
    return grid.delta_omega * grid.delta_omega * s;
}

ComplexField sample_gaussian_input(const SpectralGrid& grid, double p, RandomStream& rng) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ParameterError("sample_gaussian_input: p must be >= 0");
    ComplexField f = zero_field(grid, Domain::frequency);
    const double var = p / grid.delta_omega;
    // draw in signed-index order so the realization does not depend on M'
    for (int s = -(grid.m_meaning / 2); s <= (grid.m_meaning + 1) / 2 - 1; ++s) {
        const int k = s < 0 ? s + grid.m_total : s;
        f.samples[k] = rng.complex_normal(var);
    }
    return f;
}

// ---------------------------------------------------------------------------

ComplexField propagate(const ComplexField& field, const PhysicalChannel& phys,
                       const PropagationConfig& config, std::optional<double> noise_q) {
    if (config.n_steps < 1) throw ParameterError("propagate: n_steps must be >= 1");
    if (!(phys.length > 0.0)) throw ParameterError("propagate: length must be positive");
    if (noise_q && !(*noise_q >= 0.0)) throw ParameterError("propagate: noise Q must be >= 0");
    const SpectralGrid& g = field.grid;
    const int n = g.m_total;
    const double dz = phys.length / config.n_steps;
    const PlanPair& plans = plans_for(n);

    std::vector<cplx> psi = field.to_time().samples;
    std::vector<cplx> spec(static_cast<std::size_t>(n));

    const auto phases = [&](double h) {
        std::vector<cplx> d(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const double w = g.omega(k);
            d[k] = std::polar(1.0 / n, phys.beta * w * w * h);
        }
        return d;
    };
    const bool strang = config.scheme == SplitScheme::strang;
    const std::vector<cplx> d_full = phases(dz);
    const std::vector<cplx> d_half = strang ? phases(0.5 * dz) : std::vector<cplx>{};

    const auto linear = [&](const std::vector<cplx>& d) {
        fft_backward(plans, psi, spec);
        for (int k = 0; k < n; ++k) spec[k] *= d[k];
        fft_forward(plans, spec, psi);
    };
    const auto kerr = [&]() {
        for (auto& z : psi) z *= std::polar(1.0, phys.gamma * std::norm(z) * dz);
    };

    const double noise_var = noise_q ? *noise_q * dz / g.delta_t : 0.0;
    const bool noisy = noise_var > 0.0;
    RandomStream rng(config.seed);
    const auto inject = [&]() {
        for (auto& z : psi) z += rng.complex_normal(noise_var);
    };

    double p_prev = mean_abs2(psi);
    const auto guard = [&](int step) {
        if (noisy) return;
        const double p = mean_abs2(psi);
        const double scale = std::max(p_prev, 1e-300);
        if (!std::isfinite(p) || std::abs(p - p_prev) > config.instability_tol * scale) {
            throw InstabilityError("propagate: power changed by " +
                                   std::to_string(std::abs(p - p_prev) / scale) + " in step " +
                                   std::to_string(step));
        }
        p_prev = p;
    };

    if (strang) {
        // D/2 K D/2 per step, with adjacent half steps merged
        linear(d_half);
        for (int s = 0; s < config.n_steps; ++s) {
            kerr();
            if (noisy) inject();
            linear(s + 1 < config.n_steps ? d_full : d_half);
            guard(s);
        }
    } else {
        for (int s = 0; s < config.n_steps; ++s) {
            linear(d_full);
            kerr();
            if (noisy) inject();
            guard(s);
        }
    }

    ComplexField out = zero_field(g, Domain::time);
    out.samples = std::move(psi);
    return field.domain == Domain::time ? out : out.to_frequency();
}

// ---------------------------------------------------------------------------

cplx k_kernel(cplx mu) {
    if (std::abs(mu) < 1e-6) return 1.0 - mu / 2.0 + mu * mu / 6.0;
    return (1.0 - std::exp(-mu)) / mu;
}

ComplexField phi_first_order(const ComplexField& x_field, const PhysicalChannel& phys,
                             const PerturbativeOptions& opts) {
    const SpectralGrid& g = x_field.grid;
    if (g.m_meaning > opts.max_meaning) {
        throw BudgetError("phi_perturbative: M = " + std::to_string(g.m_meaning) +
                          " exceeds max_meaning = " + std::to_string(opts.max_meaning));
    }
    const ComplexField x = x_field.to_frequency();
    const int n = g.m_total;
    std::vector<int> band;
    for (int k = 0; k < n; ++k) {
        if (g.in_band(k)) {
            band.push_back(k);
        } else if (x.samples[k] != cplx{}) {
            throw ParameterError("phi_perturbative: input is not band-limited to W");
        }
    }
    std::vector<double> w2(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) w2[k] = dispersion_omega2(g, k, opts.dispersion);

    const double bl = phys.beta * phys.length;
    const cplx pre = cplx(0.0, phys.gamma * phys.length * g.delta_omega * g.delta_omega);
    ComplexField out = zero_field(g, Domain::frequency);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        cplx acc{};
        for (int k1 : band) {
            for (int k2 : band) {
                const int k3 = ((k1 + k2 - k) % n + n) % n;
                if (!g.in_band(k3)) continue;
                const cplx mu(0.0, bl * (w2[k] + w2[k3] - w2[k1] - w2[k2]));
                acc += x.samples[k1] * x.samples[k2] * std::conj(x.samples[k3]) * k_kernel(mu);
            }
        }
        out.samples[k] = pre * std::polar(1.0, bl * w2[k]) * acc;
    }
    return out;
}

ComplexField phi_perturbative(const ComplexField& x_field, const PhysicalChannel& phys,
                              const PerturbativeOptions& opts) {
    ComplexField out = phi_first_order(x_field, phys, opts);
    const ComplexField x = x_field.to_frequency();
    for (int k = 0; k < out.grid.m_total; ++k) {
        out.samples[k] += std::polar(1.0, phys.beta * phys.length * dispersion_omega2(out.grid, k, opts.dispersion)) *
                          x.samples[k];
    }
    return out;
}

// ---------------------------------------------------------------------------

NoiseStats ensemble_noise_stats(const PhysicalChannel& phys, const SpectralGrid& grid,
                                const PropagationConfig& config, int n_realizations,
                                std::uint64_t seed) {
    if (n_realizations < 2) throw ParameterError("ensemble_noise_stats: need at least 2 realizations");
    RandomStream input_rng(derive_seed(seed, ~std::uint64_t{0}));
    const ComplexField x = sample_gaussian_input(grid, phys.signal_psd, input_rng).to_time();
    const ComplexField phi = propagate(x, phys, config);
    const double p_ref = phi.power();

    NoiseStats st;
    st.n_realizations = n_realizations;
    const double q0 = phys.noise_psd;
    st.q_ladder = {q0, 4.0 * q0, 16.0 * q0};
    st.expected_added_power = q0 * phys.length * grid.w_prime / kTwoPi;

    const std::size_t nr = static_cast<std::size_t>(n_realizations);
    std::vector<double> added(nr), dev(nr);
    for (std::size_t rung = 0; rung < st.q_ladder.size(); ++rung) {
        const double q = st.q_ladder[rung];
        // the same noise streams on every rung, so the ladder compares like with like
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n_realizations; ++i) {
            PropagationConfig c = config;
            c.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
            const ComplexField y = propagate(x, phys, c, q);
            double d = 0.0;
            for (int j = 0; j < grid.m_total; ++j) d += std::norm(y.samples[j] - phi.samples[j]);
            dev[i] = std::sqrt(d / grid.m_total);
            added[i] = y.power() - p_ref;
        }
        double sd = 0.0, sd2 = 0.0;
        for (double d : dev) {
            sd += d;
            sd2 += d * d;
        }
        const double mean_dev = sd / n_realizations;
        st.deviation_ladder.push_back(mean_dev);
        if (rung == 0) {
            double sa = 0.0, sa2 = 0.0;
            for (double a : added) {
                sa += a;
                sa2 += a * a;
            }
            const double nn = n_realizations;
            st.mean_added_power = sa / nn;
            st.added_power_stderr = std::sqrt(std::max(0.0, sa2 / nn - st.mean_added_power * st.mean_added_power) / (nn - 1.0));
            st.mean_deviation_norm = mean_dev;
            st.deviation_stderr = std::sqrt(std::max(0.0, sd2 / nn - mean_dev * mean_dev) / (nn - 1.0));
        }
    }
    if (q0 > 0.0) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = static_cast<double>(st.q_ladder.size());
        for (std::size_t r = 0; r < st.q_ladder.size(); ++r) {
            const double lx = std::log(st.q_ladder[r]);
            const double ly = std::log(st.deviation_ladder[r]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        st.scaling_fit = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    } else {
        st.scaling_fit = std::nan("");
    }
    return st;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'N', 'L', 'C', 'F', 'I', 'E', 'L', 'D'};

template <class T>
void put(std::ofstream& f, T v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!f) throw ParameterError("field file truncated");
    return v;
}

}  // namespace

void write_field_binary(const ComplexField& field, const std::string& path) {
    static_assert(std::endian::native == std::endian::little, "field files are little-endian");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParameterError("cannot write " + path);
    f.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(f, 1);
    put<std::uint32_t>(f, static_cast<std::uint32_t>(field.domain));
    put<std::uint64_t>(f, static_cast<std::uint64_t>(field.grid.m_total));
    put<double>(f, field.grid.big_t);
    put<std::uint64_t>(f, static_cast<std::uint64_t>(field.grid.m_meaning));
    for (const auto& z : field.samples) {
        put<double>(f, z.real());
        put<double>(f, z.imag());
    }
    if (!f) throw ParameterError("write failed: " + path);
}

ComplexField read_field_binary(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParameterError("cannot open " + path);
    char magic[8];
    f.read(magic, sizeof magic);
    if (!f || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw ParameterError("not a field file: " + path);
    if (get<std::uint32_t>(f) != 1) throw ParameterError("unsupported field file version");
    const auto tag = get<std::uint32_t>(f);
    if (tag > 1) throw ParameterError("bad domain tag");
    const auto m_total = get<std::uint64_t>(f);
    const double big_t = get<double>(f);
    const auto m = get<std::uint64_t>(f);
    if (m < 2 || m_total % m != 0 || m_total > (1u << 30)) throw ParameterError("bad grid in field file");
    ComplexField out = zero_field(make_grid(kTwoPi * static_cast<double>(m) / big_t, static_cast<int>(m),
                                            static_cast<double>(m_total / m)),
                                  static_cast<Domain>(tag));
    out.grid.big_t = big_t;
    for (auto& z : out.samples) {
        const double re = get<double>(f);
        const double im = get<double>(f);
        z = {re, im};
    }
    return out;
}

void write_field_csv(const ComplexField& field, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ParameterError("cannot write " + path);
    f.precision(17);
    f << "# domain=" << (field.domain == Domain::time ? "time" : "frequency")
      << " m_total=" << field.grid.m_total << " m_meaning=" << field.grid.m_meaning
      << " T=" << field.grid.big_t << "\n";
    f << "index,signed_index,coordinate,re,im,abs2\n";
    for (int k = 0; k < field.grid.m_total; ++k) {
        const auto& z = field.samples[k];
        const bool t = field.domain == Domain::time;
        f << k << ',' << (t ? k : field.grid.signed_index(k)) << ','
          << (t ? k * field.grid.delta_t : field.grid.omega(k)) << ',' << z.real() << ','
          << z.imag() << ',' << std::norm(z) << '\n';
    }
}

}  // namespace nlcap
