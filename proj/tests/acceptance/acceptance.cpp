// Runs every check at full scale, one PASS/FAIL line each, with runtime limits.
#include <chrono>
#include <cstdio>
#include <string>

#include "nlcap/checks.hpp"

int main() {
    using namespace nlcap::checks;
    // seconds; 0 means no limit
    const double limits[] = {10, 60, 0, 1, 10, 0, 0, 0, 0, 120, 0, 300};
    CheckContext ctx;
    ctx.scale = Scale::full;
    ctx.seed = 1;
    int failed = 0;
    int i = 0;
    for (const auto& c : all_checks()) {
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult r = c.run(ctx);
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double limit = limits[i];
        if (limit > 0.0 && dt > limit) r.expect(false, "runtime " + std::to_string(dt) + " s over " + std::to_string(limit) + " s");
        ++i;
        std::printf("AC%02d %s %-22s %8.2f s%s  %s\n", i, r.pass ? "PASS" : "FAIL", r.id.c_str(), dt,
                    limit > 0.0 ? (" (limit " + std::to_string(static_cast<int>(limit)) + " s)").c_str() : "",
                    c.summary.c_str());
        for (const auto& m : r.metrics) std::printf("       %s = %.10g\n", m.key.c_str(), m.value);
        for (const auto& f : r.failures) std::printf("       failed: %s\n", f.c_str());
        std::fflush(stdout);
        failed += !r.pass;
    }
    std::printf("%d/%d acceptance criteria passed\n", i - failed, i);
    return failed == 0 ? 0 : 1;
}
