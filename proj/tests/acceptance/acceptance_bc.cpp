// Criterion 6: behavioral-cloning accuracy ordering on regenerated datasets.
// Runs the four relevant (env, variant) configurations in parallel threads.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "acceptance.hpp"
#include "trail/runner.hpp"

using namespace trail;

namespace {

BcConfig make_cfg(const std::string& env, const std::string& variant, int n_batches) {
    BcConfig cfg;
    cfg.env_name = env;
    cfg.variant = variant;
    cfg.seeds = {0, 1, 2, 3};
    cfg.hidden = {128, 128};
    cfg.n_batches = n_batches;
    return cfg;
}

int budget_from_env(const char* var, int fallback) {
    const char* s = std::getenv(var);
    if (!s) return fallback;
    const int v = std::atoi(s);
    return v > 0 ? v : fallback;
}

} // namespace

int main() {
    const int spiral_budget = budget_from_env("TRAIL_BC_SPIRAL_BATCHES", 80'000);
    const int rooms_budget = budget_from_env("TRAIL_BC_ROOMS_BATCHES", 160'000);

    const std::vector<BcConfig> cfgs = {
        make_cfg("large_rooms", "gcsl", rooms_budget),
        make_cfg("large_rooms", "trail_t05_reg", rooms_budget),
        make_cfg("double_spiral", "gcsl", spiral_budget),
        make_cfg("double_spiral", "trail_t05", spiral_budget),
    };
    std::vector<BcResult> results(cfgs.size());
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < cfgs.size(); ++i)
        workers.emplace_back([&, i] { results[i] = run_bc(cfgs[i]); });
    for (auto& w : workers) w.join();

    for (std::size_t i = 0; i < cfgs.size(); ++i)
        std::printf("  %s %s: %.4f +- %.4f\n", cfgs[i].env_name.c_str(),
                    cfgs[i].variant.c_str(), results[i].mean, results[i].std_dev);

    const bool rooms_ok = results[1].mean >= results[0].mean - 0.01;
    const bool spiral_ok = results[2].mean >= results[3].mean + 0.05;
    char detail[192];
    std::snprintf(detail, sizeof(detail),
                  "large_rooms trail_t05_reg %.3f vs gcsl %.3f; double_spiral gcsl %.3f vs "
                  "trail_t05 %.3f",
                  results[1].mean, results[0].mean, results[2].mean, results[3].mean);
    acceptance::report(6, rooms_ok && spiral_ok, detail);
    return acceptance::exit_code();
}
