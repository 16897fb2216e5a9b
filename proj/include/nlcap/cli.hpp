#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlcap/params.hpp"

namespace nlcap::cli {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitValidationFailure = 1;
inline constexpr int kExitBadConfig = 2;

/// Thread count used when --threads is absent.
inline constexpr const char* kThreadsEnv = "NLCAP_THREADS";

/// Anything wrong with flags or config contents; maps to kExitBadConfig.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

/// 16 hex digits (FNV-1a, 64 bit) of the canonical config text.
std::string config_hash(const std::string& canonical);

/// "# nlcap <command> config_hash=<h> seed=<s>", header row, data rows.
void write_csv(std::ostream& out, const Table& t, const std::string& command,
               const std::string& hash, std::uint64_t seed);

/// Every key the config schema knows about, for typo detection.
const std::vector<std::string>& known_config_keys();

// Commands. Each consumes its keys from `cfg`; seeds derive from `seed`.
Table cmd_gfun(ConfigEntries& cfg);
Table cmd_sweep(ConfigEntries& cfg);
Table cmd_crossover(ConfigEntries& cfg);
Table cmd_simulate(ConfigEntries& cfg, std::uint64_t seed);
Table cmd_mi_mc(ConfigEntries& cfg, std::uint64_t seed);
/// Returns the report text; `passed` is false when any check failed.
std::string cmd_validate(ConfigEntries& cfg, const std::string& suite, std::uint64_t seed,
                         const std::string& hash, bool& passed);
/// preset: fig1 (g curves), fig2 / fig3 (spectral efficiency at beta_tilde 200 / 800).
Table cmd_figure(ConfigEntries& cfg, const std::string& preset);

/// Full command line (args[0] is the program name). Writes tables to --out or
/// `out`, diagnostics to `err`; returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nlcap::cli
