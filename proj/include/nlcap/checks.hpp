#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nlcap/specfun.hpp"

// Named end-to-end checks shared by `nlcap validate` and the acceptance
// binary. Every check is deterministic in (seed, scale, g config) and never
// throws: library errors are recorded as failures.
namespace nlcap::checks {

enum class Scale {
    fast,  ///< reduced Monte-Carlo sizes
    full   ///< acceptance sizes
};

struct CheckContext {
    std::uint64_t seed = 1;
    Scale scale = Scale::full;
    GEvalConfig g;  ///< used wherever "the" g is needed (fault injection goes here)
};

struct Metric {
    std::string key;
    double value = 0.0;
};

struct CheckResult {
    std::string id;
    bool pass = true;
    std::vector<Metric> metrics;
    std::vector<std::string> failures;  ///< one entry per failed condition

    void metric(const std::string& key, double value) { metrics.push_back({key, value}); }
    /// Records a condition; `what` names it in the report when it fails.
    void expect(bool ok, const std::string& what);
};

struct Check {
    std::string id;
    std::string summary;
    std::function<CheckResult(const CheckContext&)> run;
};

/// The twelve checks in a fixed order.
const std::vector<Check>& all_checks();

/// Key-value report: one `id.key = value` line per metric, `id.status`,
/// `id.failed` where relevant, then totals. No timings, so same inputs give
/// byte-identical text.
std::string format_report(const std::vector<CheckResult>& results, const std::string& header);

}  // namespace nlcap::checks
