#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "trail/encoder.hpp"
#include "trail/env.hpp"
#include "trail/policy.hpp"
#include "trail/replay.hpp"

namespace trail {

enum class Collector { Gcsl, Trail };
enum class EvalMode { Gcsl, Trail };

struct TrainConfig {
    EnvParams env;
    std::vector<std::uint64_t> seeds{0};
    int episodes = 2000;
    int updates_per_env_step = 1;
    std::size_t batch_size = 256;
    double lr = 5e-4;
    std::size_t buffer_capacity = 2000;
    bool post_process = true;
    Collector collector = Collector::Gcsl;
    TrailLossConfig trail;
    std::vector<int> policy_hidden{64, 64};
    std::vector<int> encoder_hidden{64, 64};
    int eval_every = 500; // episodes; 0 disables periodic evaluation
    int n_eval_queries = 100;
    std::uint64_t eval_seed = 1000;
    std::optional<double> clip_norm;
    bool train_trail = true; // ablations that only read the GCSL policy can skip encoder updates

    void validate() const; // throws std::invalid_argument
};

struct QueryOutcome {
    std::int64_t id = 0;
    bool success = false;
    int length = 0; // steps taken (successes: steps to reach the goal)
};

struct EvalReport {
    double success_rate = 0.0;
    std::vector<QueryOutcome> outcomes;
    std::vector<int> length_hist; // successful-episode counts, unit bins [0, horizon]
    std::vector<Trajectory> trajectories; // one per query, for replay audits
};

struct TrainResult {
    Policy policy;
    TrajectoryEncoder encoder;
    std::vector<GoalQuery> eval_queries;
    EvalReport final_gcsl;
    EvalReport final_trail;
};

// Rolls one episode from an env reset; collector=Trail routes action selection
// through the sub-goal encoder. Stops early once the goal is absorbed.
std::pair<Trajectory, bool> collect_episode(GoalEnv& env, const Policy& policy,
                                            const TrajectoryEncoder* enc, Collector collector,
                                            std::mt19937_64& rng);

// Samples n frozen (start, goal) queries from rho0 with ids 0..n-1.
std::vector<GoalQuery> make_eval_queries(const GoalEnv& env, int n, std::uint64_t seed);

// Greedy rollouts over frozen queries on per-query env clones (each reseeded
// from `seed` and the query id, so results are independent of thread count;
// TRAIL_THREADS caps parallelism). Never mutates nets.
EvalReport evaluate(const Policy& policy, const TrajectoryEncoder* enc, const GoalEnv& env,
                    const std::vector<GoalQuery>& queries, EvalMode mode, std::uint64_t seed);

// Interleaved collect/optimize loop for one seed. After each episode, performs
// (episode steps x updates_per_env_step) GCSL and TraIL batch updates on the
// shared buffer. One metrics row per episode:
//   episode,env_steps,gcsl_loss,trail_sub_loss,trail_edge_loss,trail_sc_loss,
//   eval_success_gcsl,eval_success_trail
// (eval columns are nan off eval episodes). Throws std::runtime_error naming
// the episode index on divergence.
TrainResult train(const TrainConfig& cfg, std::uint64_t seed, std::ostream* metrics = nullptr);

// `bin_lo,bin_hi,count_gcsl,count_trail` with unit bins.
void write_length_histograms(std::ostream& out, const std::vector<int>& hist_gcsl,
                             const std::vector<int>& hist_trail);

struct BcConfig {
    std::string env_name = "large_rooms"; // large_rooms | double_spiral
    std::string variant = "gcsl";         // gcsl | trail_t1 | trail_t05 | trail_t05_reg
    std::vector<std::uint64_t> seeds{0, 1, 2};
    int n_train = 400;
    int n_test = 300;
    int n_batches = 160000;
    std::size_t batch_size = 256;
    std::vector<int> hidden{128, 128};
    double lr = 5e-4;
    int n_modes = 2;
    std::uint64_t data_seed = 7; // demo corpus is shared across training seeds
};

struct BcResult {
    double mean = 0.0;
    double std_dev = 0.0;
    std::vector<double> per_seed;
};

// Behavioral cloning on shortest-path demos: 400 train / 300 test queries with
// disjoint (start, goal) pairs (leakage aborts). Accuracy is greedy
// first-action agreement with the planner; trail variants predict through a
// sub-goal at the variant's fixed t (reg = edge/self-consistency at 0.01).
BcResult run_bc(const BcConfig& cfg);

// `gap,empirical,analytic` rows: Monte-Carlo gap histogram of the hindsight
// sampler next to the exact enumeration over the buffer.
void run_bias_analysis(const ReplayBuffer& buffer, std::ostream& out, std::size_t n_samples,
                       std::uint64_t seed);

struct AblationRow {
    std::string label;
    double mean = 0.0;
    double std_dev = 0.0;
};

// Freezes the given policy, trains a fresh encoder per grid point on its
// collection stream, and evaluates in trail mode. axis "K": K in
// {1,2,3,5,10}; axis "alphas": {0, 0.01, 1}^2 for (alpha_edge, alpha_sc).
std::vector<AblationRow> run_ablation(const Policy& frozen, const TrainConfig& base,
                                      const std::string& axis);

// Honors the TRAIL_THREADS env var (>=1); defaults to 1 when unset/invalid.
int eval_thread_count();

} // namespace trail
