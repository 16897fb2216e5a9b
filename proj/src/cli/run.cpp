#include <omp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>

#include "nlcap/cli.hpp"
#include "nlcap/errors.hpp"

namespace nlcap::cli {

namespace {

void set_threads(int flag_value) {
    int n = flag_value;
    if (n <= 0) {
        const char* env = std::getenv(kThreadsEnv);
        if (env == nullptr || *env == '\0') return;
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1 || v > 4096) {
            throw ConfigError(std::string(kThreadsEnv) + " must be a positive integer");
        }
        n = static_cast<int>(v);
    }
    omp_set_num_threads(n);
}

void reject_unknown_keys(const ConfigEntries& cfg) {
    const auto& known = known_config_keys();
    std::string bad;
    for (const auto& [k, v] : cfg.remaining()) {
        if (std::find(known.begin(), known.end(), k) == known.end()) bad += (bad.empty() ? "" : ", ") + k;
    }
    if (!bad.empty()) throw ConfigError("unknown config key(s): " + bad);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spectral efficiency of the nonlinear Schroedinger fiber channel"};
    app.name(args.empty() ? "nlcap" : args[0]);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_path, format = "csv";
    std::uint64_t seed = 1;
    int threads = 0;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "key = value config file");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--threads", threads, "worker threads (default: $NLCAP_THREADS, then OpenMP)")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", out_path, "output file (default: stdout)");
    app.add_option("--format", format, "table format")->check(CLI::IsMember({"csv"}));
    app.add_option("--set", overrides, "config override key=value (repeatable)");

    auto* gfun = app.add_subcommand("gfun", "g(beta_tilde) by several methods");
    auto* sweep = app.add_subcommand("sweep", "spectral efficiency versus SNR");
    auto* crossover = app.add_subcommand("crossover", "dispersive / nondispersive crossing SNR");
    auto* simulate = app.add_subcommand("simulate", "split-step NLSE propagation");
    auto* mimc = app.add_subcommand("mi-mc", "Monte-Carlo mutual information, zero dispersion");
    auto* validate = app.add_subcommand("validate", "run the check suite");
    auto* figure = app.add_subcommand("figure", "data behind fig1 / fig2 / fig3");
    std::string suite;
    validate->add_option("suite", suite, "fast or full")->check(CLI::IsMember({"fast", "full"}));
    std::string preset;
    figure->add_option("preset", preset, "fig1, fig2 or fig3")->required()->check(CLI::IsMember({"fig1", "fig2", "fig3"}));

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }

    try {
        set_threads(threads);
        ConfigEntries cfg = config_path.empty() ? ConfigEntries::parse("") : ConfigEntries::load(config_path);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + kv);
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        reject_unknown_keys(cfg);
        const std::string hash = config_hash(cfg.canonical());

        std::unique_ptr<std::ofstream> file;
        if (!out_path.empty()) {
            file = std::make_unique<std::ofstream>(out_path);
            if (!*file) throw ConfigError("cannot open output file " + out_path);
        }
        std::ostream& sink = file ? *file : out;

        if (validate->parsed()) {
            if (suite.empty()) suite = cfg.take_string("suite", "fast");
            bool passed = false;
            sink << cmd_validate(cfg, suite, seed, hash, passed);
            return passed ? kExitSuccess : kExitValidationFailure;
        }
        Table t;
        std::string name;
        if (gfun->parsed()) {
            t = cmd_gfun(cfg);
            name = "gfun";
        } else if (sweep->parsed()) {
            t = cmd_sweep(cfg);
            name = "sweep";
        } else if (crossover->parsed()) {
            t = cmd_crossover(cfg);
            name = "crossover";
        } else if (simulate->parsed()) {
            t = cmd_simulate(cfg, seed);
            name = "simulate";
        } else if (mimc->parsed()) {
            t = cmd_mi_mc(cfg, seed);
            name = "mi-mc";
        } else {
            t = cmd_figure(cfg, preset);
            name = "figure " + preset;
        }
        write_csv(sink, t, name, hash, seed);
        sink.flush();
        if (!sink) throw std::runtime_error("write failed");
        return kExitSuccess;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidationFailure;
    }
}

}  // namespace nlcap::cli
