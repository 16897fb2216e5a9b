#include "nlcap/checks.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <sstream>

#include "nlcap/channels.hpp"
#include "nlcap/mi_mc.hpp"
#include "nlcap/nlse.hpp"
#include "nlcap/params.hpp"
#include "nlcap/quadrature.hpp"

namespace nlcap::checks {

namespace {

using cplx = std::complex<double>;

bool fast(const CheckContext& c) { return c.scale == Scale::fast; }

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

template <class Body>
CheckResult guarded(const std::string& id, Body&& body) {
    CheckResult r;
    r.id = id;
    try {
        body(r);
    } catch (const std::exception& e) {
        r.expect(false, std::string("exception: ") + e.what());
    }
    return r;
}

double fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double rel_diff(const ComplexField& a, const ComplexField& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        num += std::norm(a.samples[i] - b.samples[i]);
        den += std::norm(b.samples[i]);
    }
    return std::sqrt(num / den);
}

double l2(const ComplexField& a, const ComplexField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) s += std::norm(a.samples[i] - b.samples[i]);
    return std::sqrt(s);
}

PhysicalChannel link_with_beta_tilde(double bt) {
    auto ph = typical_link();
    ph.beta *= bt / derive_dimensionless(ph).beta_tilde;
    return ph;
}

ComplexField gaussian_input(const SpectralGrid& g, const PhysicalChannel& ph, std::uint64_t seed) {
    RandomStream rng(seed);
    return sample_gaussian_input(g, ph.signal_psd, rng);
}

// ---------------------------------------------------------------------------

CheckResult g_fixed_points(const CheckContext& c) {
    return guarded("g_fixed_points", [&](CheckResult& r) {
        const double s0 = g_series(0.0, c.g.series_digits).value;
        const double c0 = g_cubature(0.0, 64).value;
        const double s200 = g_series(200.0, c.g.series_digits).value;
        const double c200 = g_cubature(200.0, g_cubature_auto_nodes(200.0)).value;
        const double e200 = g_eval(200.0, c.g).value;
        r.metric("g0_series", s0);
        r.metric("g0_cubature_error", std::abs(c0 - 1.0));
        r.metric("g200_series", s200);
        r.metric("g200_cubature", c200);
        r.metric("g200_dispatch", e200);
        r.expect(s0 == 1.0, "g_series(0) == 1");
        r.expect(std::abs(c0 - 1.0) < 1e-10, "|g_cubature(0) - 1| < 1e-10");
        r.expect(std::abs(s200 - 0.42) <= 0.01, "g_series(200) = 0.42 +- 0.01");
        r.expect(std::abs(c200 - 0.42) <= 0.01, "g_cubature(200) = 0.42 +- 0.01");
        r.expect(std::abs(e200 - 0.42) <= 0.01, "g_eval(200) = 0.42 +- 0.01");
    });
}

CheckResult g_cross_method(const CheckContext& c) {
    return guarded("g_cross_method", [&](CheckResult& r) {
        double worst_sc = 0.0, worst_eval = 0.0;
        for (double b : {1.0, 5.0, 10.0, 20.0, 30.0, 40.0}) {
            const double s = g_series(b, c.g.series_digits).value;
            const double q = g_cubature(b, g_cubature_auto_nodes(b)).value;
            worst_sc = std::max(worst_sc, std::abs(s - q));
            try {
                worst_eval = std::max(worst_eval, std::abs(g_eval(b, c.g).value - s));
            } catch (const std::exception& e) {
                r.expect(false, "g_eval(" + num(b) + "): " + e.what());
            }
        }
        r.metric("max_series_cubature", worst_sc);
        r.metric("max_dispatch_series", worst_eval);
        r.expect(worst_sc < 1e-6, "|g_series - g_cubature| < 1e-6 on {1,5,10,20,30,40}");
        r.expect(worst_eval < 1e-6, "|g_eval - g_series| < 1e-6 on {1,5,10,20,30,40}");

        const double bt = 200.0;
        const double ref = g_cubature(bt, g_cubature_auto_nodes(bt)).value;
        std::vector<double> ms, errs;
        for (int m : {16, 32, 64, 128}) {
            ms.push_back(m);
            errs.push_back(std::abs(g_discrete(bt, m, DiscreteMode::riemann).value - ref));
        }
        const double order = fit_loglog(ms, errs);
        r.metric("riemann_error_m64", errs[2]);
        r.metric("riemann_order", order);
        r.expect(errs[2] < 0.02, "Riemann M=64 within 0.02 of cubature at 200");
        r.expect(errs[0] > errs[1] && errs[1] > errs[2] && errs[2] > errs[3], "Riemann error decreasing in M");
        r.expect(order <= -0.9, "Riemann error at least O(1/M)");
    });
}

CheckResult g_asymptotic_regime(const CheckContext& c) {
    return guarded("g_asymptotic", [&](CheckResult& r) {
        const double a200 = g_asymptotic(200.0).value;
        const double a2000 = g_asymptotic(2000.0).value;
        const double e200 = g_eval(200.0, c.g).value;
        const double e2000 = g_eval(2000.0, c.g).value;
        const double rel200 = std::abs(a200 - e200) / e200;
        const double rel2000 = std::abs(a2000 - e2000) / e2000;
        r.metric("asymptotic_200", a200);
        r.metric("exact_200", e200);
        r.metric("relative_error_200", rel200);
        r.metric("relative_error_2000", rel2000);
        r.expect(std::abs(a200 - 0.339) < 1e-3, "g_asymptotic(200) = 0.339");
        r.expect(a200 < e200, "asymptotic below exact at 200");
        r.expect(rel2000 < rel200, "asymptotic closer at 2000 than at 200");
    });
}

CheckResult penalty_coefficient(const CheckContext& c) {
    return guarded("penalty_coefficient", [&](CheckResult& r) {
        const auto ph = typical_link();
        const double bt = derive_dimensionless(ph).beta_tilde;
        const double slope = gamma_tilde_of_snr(ph, 1.0);
        const double coef = slope * slope * g_eval(bt, c.g).value / 3.0;
        r.metric("beta_tilde", bt);
        r.metric("gamma_tilde_per_snr", slope);
        r.metric("coefficient", coef);
        r.expect(coef >= 6.3e-8 && coef <= 7.7e-8, "penalty / snr^2 in [6.3, 7.7]e-8");
    });
}

CheckResult crossover_points(const CheckContext& c) {
    return guarded("crossover", [&](CheckResult& r) {
        CrossoverOptions o;
        o.g = c.g;
        const double x200 = crossover_snr(link_with_beta_tilde(200.0), o).snr_db;
        const double x800 = crossover_snr(link_with_beta_tilde(800.0), o).snr_db;
        r.metric("snr_db_200", x200);
        r.metric("snr_db_800", x800);
        r.expect(std::abs(x200 - 33.0) <= 1.0, "crossover at 33 +- 1 dB for 200");
        r.expect(std::abs(x800 - 37.0) <= 1.0, "crossover at 37 +- 1 dB for 800");
    });
}

CheckResult expansion_peak(const CheckContext&) {
    return guarded("expansion_peak", [&](CheckResult& r) {
        const double slope = gamma_tilde_of_snr(typical_link(), 1.0);
        double best_db = 0.0, best = -1e300;
        for (int i = 0; i <= 2500; ++i) {
            const double db = 20.0 + 0.01 * i;
            const double snr = db_to_linear(db);
            const double se = nondispersive_se_expansion(snr, slope * snr);
            if (se > best) {
                best = se;
                best_db = db;
            }
        }
        r.metric("peak_snr_db", best_db);
        r.metric("peak_se_nats", best);
        r.expect(std::abs(best_db - 32.0) <= 1.0, "expansion peak at 32 +- 1 dB");
    });
}

CheckResult nondispersive_order(const CheckContext&) {
    return guarded("nondispersive_order", [&](CheckResult& r) {
        std::vector<double> ratio;
        for (double gt : {0.2, 0.1, 0.05}) {
            const double d = nondispersive_se_exact(1e3, gt) - nondispersive_se_expansion(1e3, gt);
            ratio.push_back(d / std::pow(gt, 4));
        }
        const double target = 2.0 / 3.0;
        r.metric("ratio_0.2", ratio[0]);
        r.metric("ratio_0.1", ratio[1]);
        r.metric("ratio_0.05", ratio[2]);
        r.expect(std::abs(ratio[2] - target) < 0.05 * target, "ratio at 0.05 within 5% of 2/3");
        r.expect(std::abs(ratio[2] - target) < std::abs(ratio[1] - target) &&
                     std::abs(ratio[1] - target) < std::abs(ratio[0] - target),
                 "ratio approaches 2/3 as gamma_tilde shrinks");
    });
}

CheckResult simulator_exactness(const CheckContext&) {
    return guarded("simulator_exactness", [&](CheckResult& r) {
        const auto g = make_grid(1e11, 16, 4);
        PropagationConfig cfg;

        auto lin = typical_link().with_snr(100.0);
        lin.gamma = 0.0;
        const auto x = gaussian_input(g, lin, 7);
        cfg.n_steps = 500;
        ComplexField want = x;
        for (int k = 0; k < g.m_total; ++k) {
            const double w = g.omega(k);
            want.samples[k] *= std::polar(1.0, lin.beta * w * w * lin.length);
        }
        const double e_lin = rel_diff(propagate(x, lin, cfg), want);

        auto flat = typical_link().with_snr(1000.0);
        flat.beta = 0.0;
        const auto xt = gaussian_input(g, flat, 8).to_time();
        cfg.n_steps = 300;
        ComplexField want_t = xt;
        for (auto& z : want_t.samples) z *= std::polar(1.0, flat.gamma * std::norm(z) * flat.length);
        const double e_flat = rel_diff(propagate(xt, flat, cfg), want_t);

        const auto ph = typical_link().with_snr(1000.0);
        const auto xp = gaussian_input(g, ph, 9);
        cfg.n_steps = 1000;
        const double e_pow = std::abs(propagate(xp, ph, cfg).power() - xp.power()) / xp.power();

        const auto ph2 = typical_link().with_snr(700.0);
        const auto xs = gaussian_input(g, ph2, 11);
        cfg.n_steps = 16000;
        const auto ref = propagate(xs, ph2, cfg);
        std::vector<double> ns, errs;
        for (int n : {250, 500, 1000, 2000}) {
            cfg.n_steps = n;
            ns.push_back(n);
            errs.push_back(rel_diff(propagate(xs, ph2, cfg), ref));
        }
        const double order = fit_loglog(ns, errs);

        r.metric("linear_error", e_lin);
        r.metric("dispersionless_error", e_flat);
        r.metric("power_drift", e_pow);
        r.metric("strang_order", order);
        r.expect(e_lin < 1e-10, "gamma = 0 matches the linear propagator to 1e-10");
        r.expect(e_flat < 1e-10, "beta = 0 matches X e^{i gamma L |X|^2} to 1e-10");
        r.expect(e_pow < 1e-9, "noiseless power conserved to 1e-9");
        r.expect(std::abs(order + 2.0) <= 0.2, "Strang slope -2 +- 0.2");
    });
}

CheckResult perturbative_scaling(const CheckContext&) {
    return guarded("perturbative_scaling", [&](CheckResult& r) {
        const auto g = make_grid(1e11, 16, 4);
        auto ph = typical_link().with_snr(72.0);
        const auto x = gaussian_input(g, ph, 12);
        PropagationConfig cfg;
        cfg.n_steps = 8000;
        std::vector<double> gs, res;
        const double g0 = ph.gamma;
        for (double f : {1.0, 0.5, 0.25}) {
            ph.gamma = g0 * f;
            gs.push_back(ph.gamma);
            res.push_back(l2(propagate(x, ph, cfg), phi_perturbative(x, ph)));
        }
        const double e = fit_loglog(gs, res);
        r.metric("exponent", e);
        r.expect(std::abs(e - 2.0) <= 0.1, "remainder exponent 2 +- 0.1");
    });
}

CheckResult noise_bookkeeping(const CheckContext& c) {
    return guarded("noise_bookkeeping", [&](CheckResult& r) {
        const auto g = make_grid(1e11, 16, 4);
        PropagationConfig cfg;
        cfg.n_steps = 100;
        auto lin = typical_link().with_snr(100.0);
        lin.gamma = 0.0;
        const int n_lin = fast(c) ? 200 : 1000;
        const auto st = ensemble_noise_stats(lin, g, cfg, n_lin, derive_seed(c.seed, 10));
        const auto nl = typical_link().with_snr(500.0);
        const auto st2 = ensemble_noise_stats(nl, g, cfg, fast(c) ? 100 : 200, derive_seed(c.seed, 11));
        r.metric("realizations", n_lin);
        r.metric("added_power", st.mean_added_power);
        r.metric("added_power_stderr", st.added_power_stderr);
        r.metric("expected_added_power", st.expected_added_power);
        r.metric("deviation_exponent_linear", st.scaling_fit);
        r.metric("deviation_exponent_nonlinear", st2.scaling_fit);
        r.expect(std::abs(st.mean_added_power - st.expected_added_power) < 3.0 * st.added_power_stderr,
                 "added power = Q L W' / 2pi within 3 sigma");
        r.expect(std::abs(st.scaling_fit - 0.5) <= 0.05, "linear deviation exponent 0.5 +- 0.05");
        r.expect(std::abs(st2.scaling_fit - 0.5) <= 0.05, "nonlinear deviation exponent 0.5 +- 0.05");
    });
}

double pdf_mass(cplx x, const PerSampleChannel& ch) {
    const double mu = ch.gamma_l * std::norm(x);
    const double sd = std::sqrt(0.5 * ch.ql * (2.0 + 4.0 * mu * mu / 3.0));
    const cplx centre = exact_map(x, ch);
    const double h = 12.0 * sd;
    const int panels = 40;
    const auto ref = gauss_legendre(20, 0.0, 1.0);
    const double width = 2.0 * h / panels;
    double s = 0.0;
    for (int pa = 0; pa < panels; ++pa)
        for (int pb = 0; pb < panels; ++pb)
            for (std::size_t i = 0; i < ref.size(); ++i)
                for (std::size_t j = 0; j < ref.size(); ++j) {
                    const cplx d(-h + width * (pa + ref.nodes[i]), -h + width * (pb + ref.nodes[j]));
                    s += ref.weights[i] * ref.weights[j] * conditional_pdf(centre + d, x, ch);
                }
    return s * width * width;
}

CheckResult conditional_pdf_check(const CheckContext& c) {
    return guarded("conditional_pdf", [&](CheckResult& r) {
        double worst = 0.0;
        for (double mu : {0.0, 1.0, 3.0}) {
            PerSampleChannel ch;
            ch.p = 1.0;
            ch.ql = 1e-2;
            ch.gamma_l = mu;
            worst = std::max(worst, std::abs(pdf_mass(std::polar(1.0, 0.4), ch) - 1.0));
        }
        r.metric("max_normalization_error", worst);
        r.expect(worst < 1e-8, "normalization 1 +- 1e-8 at mu in {0, 1, 3}");

        const int n = fast(c) ? 20000 : 100000;
        r.metric("sde_samples", n);
        int idx = 0;
        for (double mu : {0.5, 1.0, 2.0}) {
            PerSampleChannel ch;
            ch.p = 1.0;
            ch.ql = 1e-4;  // snr 1e4
            ch.gamma_l = mu;
            const cplx x = std::polar(1.0, 1.1);
            RandomStream rng(derive_seed(c.seed, 20 + idx++));
            double su = 0, sv = 0, suu = 0, suv = 0, svv = 0;
            for (int i = 0; i < n; ++i) {
                const cplx w = rotated_coordinates(simulate_sample(x, ch, 200, rng), x, ch);
                su += w.real();
                sv += w.imag();
                suu += w.real() * w.real();
                suv += w.real() * w.imag();
                svv += w.imag() * w.imag();
            }
            const double mu_u = su / n, mu_v = sv / n;
            const double cuu = suu / n - mu_u * mu_u;
            const double cuv = suv / n - mu_u * mu_v;
            const double cvv = svv / n - mu_v * mu_v;
            const double s = 0.5 * ch.ql;
            const double tuu = s, tuv = s * mu, tvv = s * (1.0 + 4.0 * mu * mu / 3.0);
            const double se_uu = std::sqrt(2.0 / n) * cuu;
            const double se_uv = std::sqrt((cuu * cvv + cuv * cuv) / n);
            const double se_vv = std::sqrt(2.0 / n) * cvv;
            const std::string tag = "mu_" + num(mu);
            r.metric(tag + ".z_uu", (cuu - tuu) / se_uu);
            r.metric(tag + ".z_uv", (cuv - tuv) / se_uv);
            r.metric(tag + ".z_vv", (cvv - tvv) / se_vv);
            r.expect(std::abs(cuu - tuu) < 3.0 * se_uu, tag + ": var u within 3 sigma");
            r.expect(std::abs(cuv - tuv) < 3.0 * se_uv, tag + ": cov uv within 3 sigma");
            r.expect(std::abs(cvv - tvv) < 3.0 * se_vv, tag + ": var v within 3 sigma");
        }
    });
}

CheckResult mc_mutual_information(const CheckContext& c) {
    return guarded("mc_mutual_information", [&](CheckResult& r) {
        const double snr = 1e3;
        const double gt = 0.5;
        const auto ch = PerSampleChannel::from_snr(snr, gt);
        const long long n_outer = fast(c) ? 2000 : 10000;
        const int n_inner = fast(c) ? 2000 : 10000;
        MIOptions o;
        o.mode = OutputMode::simulate;
        const auto res = estimate_mi(ch, n_outer, n_inner, derive_seed(c.seed, 12), o);
        const double pen_mc = std::log(snr) - res.mi.mean;
        const double pen = nondispersive_penalty(gt).value;
        const double tol = std::max(3.0 * res.mi.std_error, 0.1 * pen);
        r.metric("n_outer", static_cast<double>(n_outer));
        r.metric("n_inner", n_inner);
        r.metric("mi_nats", res.mi.mean);
        r.metric("std_error", res.mi.std_error);
        r.metric("penalty_mc", pen_mc);
        r.metric("penalty_exact", pen);
        r.metric("tolerance", tol);
        r.metric("mean_ess", res.mean_ess);
        r.metric("low_ess_count", static_cast<double>(res.low_ess_count));
        r.expect(std::abs(pen_mc - pen) <= tol, "MC penalty matches the exact penalty");
        r.expect(!res.degenerate_proposal, "importance sampler not degenerate");
    });
}

}  // namespace

void CheckResult::expect(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    failures.push_back(what);
}

const std::vector<Check>& all_checks() {
    static const std::vector<Check> checks = {
        {"g_fixed_points", "g(0) = 1 and g(200) = 0.42 by series and cubature", g_fixed_points},
        {"g_cross_method", "series, cubature and Riemann sums agree", g_cross_method},
        {"g_asymptotic", "asymptotic g below exact and improving with beta_tilde", g_asymptotic_regime},
        {"penalty_coefficient", "dispersive penalty ~ 7e-8 snr^2 on the typical link", penalty_coefficient},
        {"crossover", "dispersive / nondispersive crossings near 33 and 37 dB", crossover_points},
        {"expansion_peak", "zero-dispersion expansion peaks near 32 dB", expansion_peak},
        {"nondispersive_order", "next nondispersive term is +2 gamma_tilde^4 / 3", nondispersive_order},
        {"simulator_exactness", "split-step limits, power and Strang order", simulator_exactness},
        {"perturbative_scaling", "full minus first-order field scales as gamma^2", perturbative_scaling},
        {"noise_bookkeeping", "added noise power and sqrt(Q) deviation", noise_bookkeeping},
        {"conditional_pdf", "per-sample PDF normalization and SDE covariance", conditional_pdf_check},
        {"mc_mutual_information", "Monte-Carlo MI against the exact penalty", mc_mutual_information},
    };
    return checks;
}

std::string format_report(const std::vector<CheckResult>& results, const std::string& header) {
    std::ostringstream out;
    out << header;
    int passed = 0;
    for (const auto& r : results) {
        out << r.id << ".status = " << (r.pass ? "pass" : "fail") << "\n";
        for (const auto& m : r.metrics) out << r.id << "." << m.key << " = " << num(m.value) << "\n";
        for (const auto& f : r.failures) out << r.id << ".failed = " << f << "\n";
        passed += r.pass;
    }
    out << "checks.total = " << results.size() << "\n";
    out << "checks.passed = " << passed << "\n";
    out << "checks.failed = " << results.size() - passed << "\n";
    return out.str();
}

}  // namespace nlcap::checks
