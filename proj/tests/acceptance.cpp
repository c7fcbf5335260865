// Runs every registered check and prints one line per acceptance criterion.

#include <cstdio>
#include <cstdlib>
#include <map>

#include "haardyad/harness.hpp"

int main() {
    using namespace haardyad;
    ExperimentConfig cfg;
    if (const char* s = std::getenv("HAARDYAD_SEED")) cfg.seed = std::strtoull(s, nullptr, 10);
    cfg.validate();
    std::map<int, std::vector<CheckRecord>> by_criterion;
    std::map<int, double> seconds;
    for (const auto& spec : check_registry()) {
        const auto t0 = std::chrono::steady_clock::now();
        for (auto& r : run_check(spec, cfg)) by_criterion[r.criterion].push_back(std::move(r));
        seconds[spec.criterion] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    int failed = 0;
    for (const auto& [crit, recs] : by_criterion) {
        bool pass = true;
        for (const auto& r : recs) pass = pass && r.pass;
        if (!pass) ++failed;
        std::printf("criterion %2d: %s (%.1f s)\n", crit, pass ? "PASS" : "FAIL", seconds[crit]);
        for (const auto& r : recs) {
            std::printf("    [%s] %s: %.6g %s %.6g", r.pass ? "ok" : "fail", r.name.c_str(), r.statistic, r.op.c_str(),
                        r.threshold);
            if (!r.error.empty()) std::printf(" (error: %s)", r.error.c_str());
            std::printf("\n");
        }
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(by_criterion.size()) - failed, by_criterion.size());
    return failed == 0 ? 0 : 1;
}
