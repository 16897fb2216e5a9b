#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "nlcap/channels.hpp"
#include "nlcap/checks.hpp"
#include "nlcap/cli.hpp"
#include "nlcap/errors.hpp"
#include "nlcap/mi_mc.hpp"
#include "nlcap/nlse.hpp"
#include "nlcap/specfun.hpp"

namespace nlcap::cli {

namespace {

std::string cell(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

std::string cell(long long v) { return std::to_string(v); }

// CSV-safe error text
std::string sanitize(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
    }
    return s;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw ConfigError("empty entry in list: " + text);
        out.push_back(item.substr(b, e - b + 1));
    }
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

double parse_number(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw ConfigError("config key " + key + ": not a number: " + text);
    return v;
}

std::vector<double> take_list(ConfigEntries& cfg, const std::string& key) {
    std::vector<double> out;
    for (const auto& s : split_list(cfg.take_string(key, ""))) out.push_back(parse_number(key, s));
    return out;
}

long long take_int(ConfigEntries& cfg, const std::string& key, long long fallback, long long min_value) {
    if (!cfg.has(key)) return fallback;
    const double v = cfg.take_double(key);
    if (v != std::floor(v) || v < static_cast<double>(min_value) || v > 9e15) {
        throw ConfigError("config key " + key + " must be an integer >= " + std::to_string(min_value));
    }
    return static_cast<long long>(v);
}

bool take_flag(ConfigEntries& cfg, const std::string& key, bool fallback) {
    const std::string v = cfg.take_string(key, fallback ? "1" : "0");
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw ConfigError("config key " + key + " must be 0 or 1");
}

std::string take_choice(ConfigEntries& cfg, const std::string& key, const std::string& fallback,
                        std::initializer_list<const char*> allowed) {
    const std::string v = cfg.take_string(key, fallback);
    for (const char* a : allowed) {
        if (v == a) return v;
    }
    throw ConfigError("config key " + key + ": unknown value " + v);
}

GEvalConfig g_config(ConfigEntries& cfg) {
    GEvalConfig g;
    g.series_switch = cfg.take_double("series_switch", g.series_switch);
    g.series_digits = static_cast<int>(take_int(cfg, "series_digits", g.series_digits, 1));
    const std::string above = take_choice(cfg, "g_above_switch", "cubature", {"cubature", "asymptotic"});
    g.above_switch = above == "cubature" ? GMethod::cubature : GMethod::asymptotic;
    return g;
}

// Physical channel; without a signal key the operating point is default_snr_db.
PhysicalChannel physical(ConfigEntries& cfg, double default_snr_db) {
    if (!cfg.has("snr_db") && !cfg.has("snr") && !cfg.has("signal_psd_w_s")) {
        cfg.set("snr_db", cell(default_snr_db));
    }
    return channel_from_config(cfg);
}

void set_beta_tilde(PhysicalChannel& ph, double bt) {
    if (!(bt >= 0.0)) throw ConfigError("beta_tilde must be non-negative");
    ph.beta = bt / (ph.length * ph.bandwidth * ph.bandwidth);
}

std::vector<double> increasing_grid(double lo, double hi, long long points, bool log_spacing,
                                    const std::string& what) {
    if (points < 1) throw ConfigError(what + ": need at least one point");
    if (!(hi >= lo)) throw ConfigError(what + ": max below min");
    if (points > 1 && hi == lo) throw ConfigError(what + ": grid is not strictly increasing");
    if (log_spacing && !(lo > 0.0)) throw ConfigError(what + ": log spacing needs min > 0");
    std::vector<double> out;
    for (long long i = 0; i < points; ++i) {
        const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        out.push_back(log_spacing ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
    }
    return out;
}

void require_increasing(const std::vector<double>& v, const std::string& what) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] > v[i - 1])) throw ConfigError(what + ": grid is not strictly increasing");
    }
}

void append_status(std::string& status, const std::string& what) {
    if (!status.empty()) status += "; ";
    status += sanitize(what);
}

std::string error_text(const std::exception& e) {
    if (dynamic_cast<const DomainError*>(&e)) return std::string("domain error: ") + e.what();
    if (dynamic_cast<const PrecisionError*>(&e)) return std::string("precision: ") + e.what();
    if (dynamic_cast<const BudgetError*>(&e)) return std::string("budget: ") + e.what();
    return e.what();
}

}  // namespace

// ---------------------------------------------------------------------------

std::string config_hash(const std::string& canonical) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_csv(std::ostream& out, const Table& t, const std::string& command, const std::string& hash,
               std::uint64_t seed) {
    out << "# nlcap " << command << " config_hash=" << hash << " seed=" << seed << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        // link
        "beta_ps2_per_km", "gamma_per_w_km", "length_km", "bandwidth_per_s", "p_noise_mw", "p_noise_w",
        "noise_psd_w_s_per_km", "snr_db", "snr", "signal_psd_w_s",
        // dimensionless overrides
        "beta_tilde", "gamma_tilde",
        // g
        "series_switch", "series_digits", "g_above_switch",
        // gfun
        "beta_tilde_min", "beta_tilde_max", "beta_tilde_points", "beta_tilde_spacing", "beta_tilde_list",
        "g_methods", "discrete_m",
        // sweep
        "snr_grid", "snr_db_min", "snr_db_max", "snr_db_step", "snr_min", "snr_max", "snr_points", "models",
        // crossover
        "crossover_lo_db", "crossover_hi_db", "crossover_step_db", "crossover_tol_db", "applicability_ratio",
        // simulate
        "m_meaning", "oversampling", "n_steps", "scheme", "noise", "output_domain", "realizations",
        "perturbative", "field_binary_out", "field_csv_out",
        // mi-mc
        "n_outer", "n_inner", "mi_output", "mi_steps", "proposal_scale",
        // validate
        "suite",
    };
    return keys;
}

Table cmd_gfun(ConfigEntries& cfg) {
    const GEvalConfig g = g_config(cfg);
    std::vector<double> grid;
    if (cfg.has("beta_tilde_list")) {
        grid = take_list(cfg, "beta_tilde_list");
        require_increasing(grid, "beta_tilde_list");
    } else {
        const double lo = cfg.take_double("beta_tilde_min", 1.0);
        const double hi = cfg.take_double("beta_tilde_max", 2000.0);
        const long long n = take_int(cfg, "beta_tilde_points", 50, 1);
        const bool log_spacing = take_choice(cfg, "beta_tilde_spacing", "log", {"log", "linear"}) == "log";
        grid = increasing_grid(lo, hi, n, log_spacing, "beta_tilde grid");
    }
    const auto methods = split_list(cfg.take_string("g_methods", "exact,series,cubature,asymptotic"));
    const std::set<std::string> allowed = {"exact", "series", "cubature", "asymptotic", "riemann", "sine_grid"};
    for (const auto& m : methods) {
        if (!allowed.count(m)) throw ConfigError("g_methods: unknown method " + m);
    }
    const int discrete_m = static_cast<int>(take_int(cfg, "discrete_m", 128, 8));

    Table t;
    t.columns.push_back("beta_tilde");
    for (const auto& m : methods) {
        t.columns.push_back("g_" + m);
        t.columns.push_back("err_" + m);
    }
    t.columns.push_back("status");
    for (double b : grid) {
        std::vector<std::string> row{cell(b)};
        std::string status;
        for (const auto& m : methods) {
            try {
                GEval e;
                if (m == "exact") e = g_eval(b, g);
                else if (m == "series") e = g_series(b, g.series_digits);
                else if (m == "cubature") e = g_cubature(b, g_cubature_auto_nodes(b));
                else if (m == "asymptotic") e = g_asymptotic(b);
                else if (m == "riemann") e = g_discrete(b, discrete_m, DiscreteMode::riemann);
                else e = g_discrete(b, discrete_m, DiscreteMode::sine_grid);
                row.push_back(cell(e.value));
                row.push_back(cell(e.err_estimate));
            } catch (const std::exception& ex) {
                row.push_back("nan");
                row.push_back("nan");
                append_status(status, m + ": " + error_text(ex));
            }
        }
        row.push_back(status.empty() ? "ok" : status);
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table cmd_sweep(ConfigEntries& cfg) {
    const GEvalConfig g = g_config(cfg);
    const PhysicalChannel ph = physical(cfg, 30.0);
    std::vector<double> betas = cfg.has("beta_tilde") ? take_list(cfg, "beta_tilde")
                                                      : std::vector<double>{derive_dimensionless(ph).beta_tilde};

    std::vector<double> snrs;
    const std::string kind = take_choice(cfg, "snr_grid", "db", {"db", "linear", "log"});
    if (kind == "db") {
        const double lo = cfg.take_double("snr_db_min", 0.0);
        const double hi = cfg.take_double("snr_db_max", 45.0);
        const double step = cfg.take_double("snr_db_step", 0.5);
        if (!(step > 0.0)) throw ConfigError("snr_db_step must be positive");
        if (!(hi >= lo)) throw ConfigError("snr_db_max below snr_db_min");
        const long long n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
        for (long long i = 0; i < n; ++i) snrs.push_back(db_to_linear(lo + step * static_cast<double>(i)));
    } else {
        const double lo = cfg.take_double("snr_min", 1.0);
        const double hi = cfg.take_double("snr_max", 1e4);
        const long long n = take_int(cfg, "snr_points", 50, 1);
        snrs = increasing_grid(lo, hi, n, kind == "log", "snr grid");
        if (!(snrs.front() > 0.0)) throw ConfigError("snr grid must be positive");
    }

    std::vector<SEModel> models;
    for (const auto& name : split_list(cfg.take_string("models", "shannon,dispersive,nondispersive_exact,nondispersive_expansion"))) {
        bool found = false;
        for (auto m : {SEModel::shannon, SEModel::dispersive_perturbative, SEModel::nondispersive_exact,
                       SEModel::nondispersive_expansion}) {
            if (to_string(m) == name) {
                models.push_back(m);
                found = true;
            }
        }
        if (!found) throw ConfigError("models: unknown model " + name);
    }

    Table t;
    t.columns = {"snr_db", "snr", "gamma_tilde"};
    for (auto m : models) {
        if (m == SEModel::dispersive_perturbative && betas.size() > 1) {
            for (double b : betas) t.columns.push_back("dispersive_b" + cell(b));
        } else {
            t.columns.emplace_back(to_string(m));
        }
    }
    t.columns.push_back("status");

    // g once per beta_tilde; a failure marks every row
    std::vector<std::optional<double>> gvals;
    std::string g_status;
    for (double b : betas) {
        try {
            gvals.emplace_back(g_eval(b, g).value);
        } catch (const std::exception& e) {
            gvals.emplace_back();
            append_status(g_status, "g(" + cell(b) + "): " + error_text(e));
        }
    }

    for (double snr : snrs) {
        std::string status = g_status;
        const double gt = gamma_tilde_of_snr(ph, snr);
        std::vector<std::string> row{cell(linear_to_db(snr)), cell(snr), cell(gt)};
        for (auto m : models) {
            if (m == SEModel::dispersive_perturbative) {
                for (const auto& gv : gvals) row.push_back(gv ? cell(dispersive_se_with_g(snr, gt, *gv)) : "nan");
                continue;
            }
            try {
                row.push_back(cell(evaluate_model(m, snr, gt, 0.0, g).se_nats));
            } catch (const std::exception& e) {
                row.push_back("nan");
                append_status(status, std::string(to_string(m)) + ": " + error_text(e));
            }
        }
        row.push_back(status.empty() ? "ok" : status);
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table cmd_crossover(ConfigEntries& cfg) {
    CrossoverOptions o;
    o.g = g_config(cfg);
    PhysicalChannel ph = physical(cfg, 30.0);
    std::vector<double> betas = cfg.has("beta_tilde") ? take_list(cfg, "beta_tilde")
                                                      : std::vector<double>{derive_dimensionless(ph).beta_tilde};
    o.lo_db = cfg.take_double("crossover_lo_db", o.lo_db);
    o.hi_db = cfg.take_double("crossover_hi_db", o.hi_db);
    o.scan_step_db = cfg.take_double("crossover_step_db", o.scan_step_db);
    o.tol_db = cfg.take_double("crossover_tol_db", o.tol_db);
    const double ratio = cfg.take_double("applicability_ratio", kDefaultApplicabilityRatio);
    if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("applicability_ratio must be in (0, 1]");

    Table t;
    t.columns = {"beta_tilde", "g", "crossover_snr_db", "crossover_snr", "applicability_snr_db", "status"};
    for (double b : betas) {
        set_beta_tilde(ph, b);
        std::vector<std::string> row{cell(b)};
        std::string status;
        double gv = std::nan(""), xdb = std::nan(""), xlin = std::nan(""), adb = std::nan("");
        try {
            gv = g_eval(b, o.g).value;
            const auto a = applicability_bound(ph, ratio, o.g);
            if (a.bounded) adb = a.snr_db;
            const auto c = crossover_snr(ph, o);
            xdb = c.snr_db;
            xlin = c.snr_linear;
        } catch (const NoBracketError& e) {
            append_status(status, std::string("no crossing") + (e.degenerate() ? " (degenerate)" : ""));
        } catch (const std::exception& e) {
            append_status(status, error_text(e));
        }
        for (double v : {gv, xdb, xlin, adb}) row.push_back(cell(v));
        row.push_back(status.empty() ? "ok" : status);
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table cmd_simulate(ConfigEntries& cfg, std::uint64_t seed) {
    PhysicalChannel ph = physical(cfg, 30.0);
    if (cfg.has("beta_tilde")) set_beta_tilde(ph, cfg.take_double("beta_tilde"));
    const int m = static_cast<int>(take_int(cfg, "m_meaning", 16, 2));
    const double os = cfg.take_double("oversampling", 4.0);
    PropagationConfig pc;
    pc.n_steps = static_cast<int>(take_int(cfg, "n_steps", 1000, 1));
    pc.scheme = take_choice(cfg, "scheme", "strang", {"strang", "euler"}) == "strang" ? SplitScheme::strang
                                                                                       : SplitScheme::euler;
    const bool noise = take_flag(cfg, "noise", true);
    const bool in_time = take_choice(cfg, "output_domain", "frequency", {"time", "frequency"}) == "time";
    const long long realizations = take_int(cfg, "realizations", 0, 0);
    const bool perturbative = take_flag(cfg, "perturbative", false);
    const std::string bin_out = cfg.take_string("field_binary_out", "");
    const std::string csv_out = cfg.take_string("field_csv_out", "");
    const SpectralGrid grid = make_grid(ph.bandwidth, m, os);

    Table t;
    if (realizations > 0) {
        if (realizations < 2) throw ConfigError("realizations must be 0 or >= 2");
        const auto st = ensemble_noise_stats(ph, grid, pc, static_cast<int>(realizations), seed);
        t.columns = {"quantity", "value"};
        const auto put = [&](const std::string& k, double v) { t.rows.push_back({k, cell(v)}); };
        put("realizations", st.n_realizations);
        put("mean_added_power", st.mean_added_power);
        put("added_power_stderr", st.added_power_stderr);
        put("expected_added_power", st.expected_added_power);
        put("mean_deviation_norm", st.mean_deviation_norm);
        put("deviation_stderr", st.deviation_stderr);
        for (std::size_t i = 0; i < st.q_ladder.size(); ++i) {
            put("q_" + std::to_string(i), st.q_ladder[i]);
            put("deviation_" + std::to_string(i), st.deviation_ladder[i]);
        }
        put("deviation_exponent", st.scaling_fit);
        return t;
    }

    RandomStream rng(derive_seed(seed, 0));
    const ComplexField x = sample_gaussian_input(grid, ph.signal_psd, rng);
    pc.seed = derive_seed(seed, 1);
    const ComplexField y = propagate(x, ph, pc, noise ? std::optional<double>(ph.noise_psd) : std::nullopt);
    std::optional<ComplexField> phi;
    if (perturbative) phi = phi_perturbative(x, ph);

    const auto in_domain = [&](const ComplexField& f) { return in_time ? f.to_time() : f.to_frequency(); };
    const ComplexField xo = in_domain(x), yo = in_domain(y);
    if (!bin_out.empty()) write_field_binary(yo, bin_out);
    if (!csv_out.empty()) write_field_csv(yo, csv_out);
    std::optional<ComplexField> po;
    if (phi) po = in_domain(*phi);

    t.columns = {"index", "signed_index", in_time ? "t" : "omega", "x_re", "x_im", "y_re", "y_im"};
    if (po) {
        t.columns.push_back("phi_re");
        t.columns.push_back("phi_im");
    }
    for (int k = 0; k < grid.m_total; ++k) {
        const double coord = in_time ? k * grid.delta_t : grid.omega(k);
        std::vector<std::string> row{cell(static_cast<long long>(k)),
                                     cell(static_cast<long long>(in_time ? k : grid.signed_index(k))),
                                     cell(coord),
                                     cell(xo.samples[k].real()),
                                     cell(xo.samples[k].imag()),
                                     cell(yo.samples[k].real()),
                                     cell(yo.samples[k].imag())};
        if (po) {
            row.push_back(cell(po->samples[k].real()));
            row.push_back(cell(po->samples[k].imag()));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table cmd_mi_mc(ConfigEntries& cfg, std::uint64_t seed) {
    const PhysicalChannel ph = physical(cfg, 30.0);
    const auto d = derive_dimensionless(ph);
    std::vector<double> gts = cfg.has("gamma_tilde") ? take_list(cfg, "gamma_tilde") : std::vector<double>{d.gamma_tilde};
    const long long n_outer = take_int(cfg, "n_outer", 10000, 2);
    const int n_inner = static_cast<int>(take_int(cfg, "n_inner", 10000, 1));
    MIOptions o;
    o.mode = take_choice(cfg, "mi_output", "simulate", {"simulate", "analytic"}) == "simulate"
                 ? OutputMode::simulate
                 : OutputMode::analytic;
    o.n_steps = static_cast<int>(take_int(cfg, "mi_steps", o.n_steps, 1));
    o.proposal_scale = cfg.take_double("proposal_scale", o.proposal_scale);

    Table t;
    t.columns = {"snr_db", "snr", "gamma_tilde", "n_outer", "n_inner", "mi_nats", "mi_std_error",
                 "mi_controlled", "mi_controlled_std_error", "penalty_mc", "penalty_exact", "shannon",
                 "mean_ess", "min_ess", "low_ess_count", "status"};
    for (std::size_t i = 0; i < gts.size(); ++i) {
        std::vector<std::string> row{cell(linear_to_db(d.snr)), cell(d.snr), cell(gts[i]),
                                     cell(n_outer), cell(static_cast<long long>(n_inner))};
        std::string status;
        try {
            const auto ch = PerSampleChannel::from_snr(d.snr, gts[i]);
            const auto r = estimate_mi(ch, n_outer, n_inner, derive_seed(seed, i), o);
            for (double v : {r.mi.mean, r.mi.std_error, r.mi_controlled.mean, r.mi_controlled.std_error,
                             std::log(d.snr) - r.mi.mean, nondispersive_penalty(gts[i]).value,
                             shannon_se(d.snr), r.mean_ess, r.min_ess}) {
                row.push_back(cell(v));
            }
            row.push_back(cell(r.low_ess_count));
            if (r.degenerate_proposal) status = "degenerate proposal";
        } catch (const std::exception& e) {
            while (row.size() < t.columns.size() - 1) row.push_back("nan");
            append_status(status, error_text(e));
        }
        row.push_back(status.empty() ? "ok" : status);
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string cmd_validate(ConfigEntries& cfg, const std::string& suite, std::uint64_t seed,
                         const std::string& hash, bool& passed) {
    checks::CheckContext ctx;
    ctx.g = g_config(cfg);
    ctx.seed = seed;
    if (suite == "fast") ctx.scale = checks::Scale::fast;
    else if (suite == "full") ctx.scale = checks::Scale::full;
    else throw ConfigError("validate: suite must be fast or full");
    std::vector<checks::CheckResult> results;
    for (const auto& c : checks::all_checks()) results.push_back(c.run(ctx));
    passed = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
    const std::string header = "# nlcap validate\nsuite = " + suite + "\nseed = " + std::to_string(seed) +
                               "\nconfig_hash = " + hash + "\n";
    return checks::format_report(results, header);
}

Table cmd_figure(ConfigEntries& cfg, const std::string& preset) {
    const auto preset_default = [&](const std::string& k, const std::string& v) {
        if (!cfg.has(k)) cfg.set(k, v);
    };
    if (preset == "fig1") {
        preset_default("beta_tilde_min", "1");
        preset_default("beta_tilde_max", "2000");
        preset_default("beta_tilde_points", "60");
        preset_default("g_methods", "exact,asymptotic");
        return cmd_gfun(cfg);
    }
    if (preset == "fig2" || preset == "fig3") {
        preset_default("beta_tilde", preset == "fig2" ? "200" : "800");
        preset_default("snr_db_min", "0");
        preset_default("snr_db_max", "45");
        preset_default("snr_db_step", "0.25");
        return cmd_sweep(cfg);
    }
    throw ConfigError("figure: preset must be fig1, fig2 or fig3");
}

}  // namespace nlcap::cli
