#include "trail/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>

#include "trail/io.hpp"

namespace trail {

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combined words
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double pop_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

Policy make_policy_for(const GoalEnvSpec& spec, const std::vector<int>& hidden,
                       int n_modes, std::mt19937_64& rng) {
    if (spec.action_space.kind == ActionSpaceSpec::Kind::Discrete)
        return Policy::make_discrete(spec.state_dim, spec.action_space.n_actions, hidden, rng);
    return Policy::make_continuous(spec.state_dim, spec.action_space.dim,
                                   spec.action_space.max_norm, n_modes, hidden, rng);
}

} // namespace

void TrainConfig::validate() const {
    if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
    if (updates_per_env_step <= 0) throw std::invalid_argument("updates_per_env_step must be > 0");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be > 0");
    if (lr <= 0.0) throw std::invalid_argument("lr must be > 0");
    if (buffer_capacity == 0) throw std::invalid_argument("buffer_capacity must be > 0");
    if (trail.n_modes <= 0) throw std::invalid_argument("trail.k must be > 0");
    if (trail.alpha_edge < 0.0 || trail.alpha_sc < 0.0)
        throw std::invalid_argument("trail loss weights must be >= 0");
    if (eval_every < 0) throw std::invalid_argument("eval_every must be >= 0");
    if (n_eval_queries <= 0) throw std::invalid_argument("n_eval_queries must be > 0");
    if (policy_hidden.empty() || encoder_hidden.empty())
        throw std::invalid_argument("hidden layer lists must be non-empty");
    if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
}

int eval_thread_count() {
    const char* v = std::getenv("TRAIL_THREADS");
    if (!v) return 1;
    const long n = std::strtol(v, nullptr, 10);
    return n >= 1 ? static_cast<int>(n) : 1;
}

std::pair<Trajectory, bool> collect_episode(GoalEnv& env, const Policy& policy,
                                            const TrajectoryEncoder* enc, Collector collector,
                                            std::mt19937_64& rng) {
    if (collector == Collector::Trail && !enc)
        throw std::invalid_argument("collector=trail requires an encoder");
    const auto [start, goal] = env.reset();
    const int T = env.spec().horizon;
    Trajectory traj;
    traj.states.push_back(start);
    bool success = env.is_success(start, goal);
    for (int i = 0; i < T && !success; ++i) {
        const StateVec& s = traj.states.back();
        Action a = collector == Collector::Gcsl
                       ? policy.act(s, goal, rng, /*greedy=*/false)
                       : get_action(policy, *enc, s, goal, i, T, rng, /*stochastic=*/true);
        traj.states.push_back(env.step(a));
        traj.actions.push_back(std::move(a));
        success = env.is_success(traj.states.back(), goal);
    }
    return {std::move(traj), success};
}

std::vector<GoalQuery> make_eval_queries(const GoalEnv& env, int n, std::uint64_t seed) {
    auto probe = env.clone();
    probe->reseed(seed);
    std::vector<GoalQuery> queries;
    queries.reserve(n);
    for (int i = 0; i < n; ++i) {
        auto [start, goal] = probe->reset();
        queries.push_back(GoalQuery{std::move(start), std::move(goal), i});
    }
    return queries;
}

EvalReport evaluate(const Policy& policy, const TrajectoryEncoder* enc, const GoalEnv& env,
                    const std::vector<GoalQuery>& queries, EvalMode mode, std::uint64_t seed) {
    if (mode == EvalMode::Trail && !enc)
        throw std::invalid_argument("mode=trail requires an encoder");
    const int T = env.spec().horizon;
    EvalReport report;
    report.outcomes.resize(queries.size());
    report.trajectories.resize(queries.size());
    report.length_hist.assign(static_cast<std::size_t>(T) + 1, 0);

    auto rollout = [&](std::size_t qi) {
        auto e = env.clone();
        e->reseed(mix_seed(seed, static_cast<std::uint64_t>(queries[qi].id)));
        const auto [start, goal] = e->reset(queries[qi]);
        std::mt19937_64 rng(mix_seed(seed + 1, static_cast<std::uint64_t>(queries[qi].id)));
        Trajectory traj;
        traj.states.push_back(start);
        QueryOutcome out{queries[qi].id, e->is_success(start, goal), 0};
        for (int i = 0; i < T && !out.success; ++i) {
            const StateVec& s = traj.states.back();
            Action a = mode == EvalMode::Gcsl
                           ? policy.act(s, goal, rng, /*greedy=*/true)
                           : get_action(policy, *enc, s, goal, i, T, rng, /*stochastic=*/false);
            traj.states.push_back(e->step(a));
            traj.actions.push_back(std::move(a));
            out.length = i + 1;
            out.success = e->is_success(traj.states.back(), goal);
        }
        report.outcomes[qi] = out;
        report.trajectories[qi] = std::move(traj);
    };

    const int n_threads = std::min<int>(eval_thread_count(), static_cast<int>(queries.size()));
    if (n_threads <= 1) {
        for (std::size_t qi = 0; qi < queries.size(); ++qi) rollout(qi);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        for (int w = 0; w < n_threads; ++w) {
            workers.emplace_back([&] {
                for (std::size_t qi = next.fetch_add(1); qi < queries.size();
                     qi = next.fetch_add(1))
                    rollout(qi);
            });
        }
        for (auto& t : workers) t.join();
    }

    int n_success = 0;
    for (const auto& out : report.outcomes) {
        if (out.success) {
            ++n_success;
            ++report.length_hist[out.length];
        }
    }
    report.success_rate =
        queries.empty() ? 0.0 : static_cast<double>(n_success) / queries.size();
    return report;
}

TrainResult train(const TrainConfig& cfg, std::uint64_t seed, std::ostream* metrics) {
    cfg.validate();
    auto env = make_env(cfg.env);
    env->reseed(mix_seed(seed, 0xc011ec7));

    std::mt19937_64 rng(seed);
    Policy policy = make_policy_for(env->spec(), cfg.policy_hidden, cfg.trail.n_modes, rng);
    TrajectoryEncoder encoder(env->spec().state_dim, cfg.trail.n_modes, cfg.encoder_hidden, rng);
    AdamState opt_policy(policy.net.n_params(), cfg.lr);
    AdamState opt_encoder(encoder.net().n_params(), cfg.lr);
    ReplayBuffer buffer(cfg.buffer_capacity, cfg.post_process);
    const std::vector<GoalQuery> queries =
        make_eval_queries(*env, cfg.n_eval_queries, cfg.eval_seed);

    if (metrics)
        *metrics << "episode,env_steps,gcsl_loss,trail_sub_loss,trail_edge_loss,trail_sc_loss,"
                    "eval_success_gcsl,eval_success_trail\n";

    std::int64_t env_steps = 0;
    for (int ep = 0; ep < cfg.episodes; ++ep) {
        auto [traj, success] = collect_episode(*env, policy, &encoder, cfg.collector, rng);
        (void)success;
        const int steps = static_cast<int>(traj.actions.size());
        env_steps += steps;
        buffer.push(std::move(traj));

        double gcsl_loss = 0.0;
        TrailLosses trail_losses;
        const int n_updates = buffer.empty() ? 0 : steps * cfg.updates_per_env_step;
        try {
            for (int u = 0; u < n_updates; ++u) {
                gcsl_loss += gcsl_train_step(policy, sample_gcsl(buffer, cfg.batch_size, rng),
                                             opt_policy, cfg.clip_norm);
                if (cfg.train_trail) {
                    TrailLosses l = trail_train_step(encoder, buffer, cfg.trail, opt_encoder,
                                                     cfg.batch_size, rng, cfg.clip_norm);
                    trail_losses.total += l.total;
                    trail_losses.sub += l.sub;
                    trail_losses.edge += l.edge;
                    trail_losses.sc += l.sc;
                }
            }
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("training diverged at episode " + std::to_string(ep) +
                                     ": " + e.what());
        }
        if (n_updates > 0) {
            gcsl_loss /= n_updates;
            trail_losses.sub /= n_updates;
            trail_losses.edge /= n_updates;
            trail_losses.sc /= n_updates;
        }

        double eval_gcsl = std::numeric_limits<double>::quiet_NaN();
        double eval_trail = std::numeric_limits<double>::quiet_NaN();
        if (cfg.eval_every > 0 && (ep + 1) % cfg.eval_every == 0) {
            eval_gcsl =
                evaluate(policy, nullptr, *env, queries, EvalMode::Gcsl, cfg.eval_seed)
                    .success_rate;
            eval_trail =
                evaluate(policy, &encoder, *env, queries, EvalMode::Trail, cfg.eval_seed)
                    .success_rate;
        }
        if (metrics) {
            *metrics << ep << ',' << env_steps << ',' << fmt_real(gcsl_loss) << ','
                     << fmt_real(trail_losses.sub) << ',' << fmt_real(trail_losses.edge) << ','
                     << fmt_real(trail_losses.sc) << ',' << fmt_real(eval_gcsl) << ','
                     << fmt_real(eval_trail) << '\n';
        }
    }

    TrainResult result{std::move(policy), std::move(encoder), queries, {}, {}};
    result.final_gcsl = evaluate(result.policy, nullptr, *env, result.eval_queries,
                                 EvalMode::Gcsl, cfg.eval_seed);
    result.final_trail = evaluate(result.policy, &result.encoder, *env, result.eval_queries,
                                  EvalMode::Trail, cfg.eval_seed);
    return result;
}

void write_length_histograms(std::ostream& out, const std::vector<int>& hist_gcsl,
                             const std::vector<int>& hist_trail) {
    out << "bin_lo,bin_hi,count_gcsl,count_trail\n";
    const std::size_t n = std::max(hist_gcsl.size(), hist_trail.size());
    for (std::size_t b = 0; b < n; ++b) {
        const int cg = b < hist_gcsl.size() ? hist_gcsl[b] : 0;
        const int ct = b < hist_trail.size() ? hist_trail[b] : 0;
        out << b << ',' << b + 1 << ',' << cg << ',' << ct << '\n';
    }
}

BcResult run_bc(const BcConfig& cfg) {
    const bool large = cfg.env_name == "large_rooms";
    if (!large && cfg.env_name != "double_spiral")
        throw std::invalid_argument("BC supports large_rooms and double_spiral, got " +
                                    cfg.env_name);
    if (cfg.variant != "gcsl" && cfg.variant != "trail_t1" && cfg.variant != "trail_t05" &&
        cfg.variant != "trail_t05_reg")
        throw std::invalid_argument("unknown BC variant: " + cfg.variant);

    GridEnv env = large ? make_discrete_rooms(5, 5, 15, cfg.data_seed, 400)
                        : make_double_spiral(cfg.data_seed);
    env.reseed(mix_seed(cfg.data_seed, 0xdec0));

    // Distinct (start, goal) queries, then shortest-path demos.
    std::set<std::pair<StateVec, StateVec>> seen;
    std::vector<Trajectory> demos;
    while (static_cast<int>(demos.size()) < cfg.n_train + cfg.n_test) {
        auto [start, goal] = env.reset();
        if (!seen.insert({start, goal}).second) continue;
        demos.push_back(shortest_path(env, start, goal));
    }
    const auto query_of = [](const Trajectory& t) {
        return std::make_pair(t.states.front(), t.states.back());
    };
    std::set<std::pair<StateVec, StateVec>> train_queries;
    for (int i = 0; i < cfg.n_train; ++i) train_queries.insert(query_of(demos[i]));
    for (int i = cfg.n_train; i < cfg.n_train + cfg.n_test; ++i)
        if (train_queries.count(query_of(demos[i])))
            throw std::runtime_error("BC train/test query leakage detected");

    const bool use_trail = cfg.variant != "gcsl";
    const double t_query = cfg.variant == "trail_t1" ? 1.0 : 0.5;
    TrailLossConfig trail_cfg;
    trail_cfg.n_modes = cfg.n_modes;
    trail_cfg.alpha_edge = trail_cfg.alpha_sc = cfg.variant == "trail_t05_reg" ? 0.01 : 0.0;

    const int state_dim = env.spec().state_dim;
    BcResult result;
    for (std::uint64_t seed : cfg.seeds) {
        std::mt19937_64 rng(seed);
        Policy policy =
            Policy::make_discrete(state_dim, env.spec().action_space.n_actions, cfg.hidden, rng);
        TrajectoryEncoder encoder(state_dim, cfg.n_modes, cfg.hidden, rng);
        AdamState opt_policy(policy.net.n_params(), cfg.lr);
        AdamState opt_encoder(encoder.net().n_params(), cfg.lr);
        ReplayBuffer buffer(cfg.n_train, /*post_process=*/true);
        for (int i = 0; i < cfg.n_train; ++i) buffer.push(demos[i]);

        for (int b = 0; b < cfg.n_batches; ++b) {
            gcsl_train_step(policy, sample_gcsl(buffer, cfg.batch_size, rng), opt_policy);
            if (use_trail)
                trail_train_step(encoder, buffer, trail_cfg, opt_encoder, cfg.batch_size, rng);
        }

        int correct = 0, total = 0;
        for (int i = cfg.n_train; i < cfg.n_train + cfg.n_test; ++i) {
            const Trajectory& demo = demos[i];
            if (demo.actions.empty()) continue;
            const StateVec& s = demo.states.front();
            const StateVec& g = demo.states.back();
            StateVec target = g;
            if (use_trail) target = encoder.mode_mean(s, g, t_query, best_mode(encoder, s, g));
            const Action a = policy.act(s, target, rng, /*greedy=*/true);
            correct += std::get<int>(a) == std::get<int>(demo.actions.front());
            ++total;
        }
        result.per_seed.push_back(static_cast<double>(correct) / total);
    }
    result.mean = mean_of(result.per_seed);
    result.std_dev = pop_std(result.per_seed);
    return result;
}

void run_bias_analysis(const ReplayBuffer& buffer, std::ostream& out, std::size_t n_samples,
                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::vector<double> empirical = gap_histogram(buffer, n_samples, rng);
    const std::vector<double> analytic = analytic_gap_distribution(buffer);
    out << "gap,empirical,analytic\n";
    const std::size_t n = std::max(empirical.size(), analytic.size());
    for (std::size_t g = 1; g < n; ++g) {
        const double e = g < empirical.size() ? empirical[g] : 0.0;
        const double a = g < analytic.size() ? analytic[g] : 0.0;
        out << g << ',' << fmt_real(e) << ',' << fmt_real(a) << '\n';
    }
}

std::vector<AblationRow> run_ablation(const Policy& frozen, const TrainConfig& base,
                                      const std::string& axis) {
    base.validate();
    struct GridPoint {
        std::string label;
        TrailLossConfig cfg;
    };
    std::vector<GridPoint> grid;
    if (axis == "K") {
        for (int k : {1, 2, 3, 5, 10}) {
            TrailLossConfig c = base.trail;
            c.n_modes = k;
            grid.push_back({"K=" + std::to_string(k), c});
        }
    } else if (axis == "alphas") {
        for (double ae : {0.0, 0.01, 1.0}) {
            for (double asc : {0.0, 0.01, 1.0}) {
                TrailLossConfig c = base.trail;
                c.alpha_edge = ae;
                c.alpha_sc = asc;
                grid.push_back({"edge=" + fmt_real(ae) + " sc=" + fmt_real(asc), c});
            }
        }
    } else {
        throw std::invalid_argument("unknown ablation axis: " + axis);
    }

    std::vector<AblationRow> table;
    for (const auto& point : grid) {
        std::vector<double> per_seed;
        for (std::uint64_t seed : base.seeds) {
            auto env = make_env(base.env);
            env->reseed(mix_seed(seed, 0xab1a7e));
            std::mt19937_64 rng(mix_seed(seed, 0xf2e5));
            TrajectoryEncoder encoder(env->spec().state_dim, point.cfg.n_modes,
                                      base.encoder_hidden, rng);
            AdamState opt(encoder.net().n_params(), base.lr);
            ReplayBuffer buffer(base.buffer_capacity, base.post_process);
            for (int ep = 0; ep < base.episodes; ++ep) {
                auto [traj, ok] = collect_episode(*env, frozen, nullptr, Collector::Gcsl, rng);
                (void)ok;
                const int steps = static_cast<int>(traj.actions.size());
                buffer.push(std::move(traj));
                if (buffer.empty()) continue;
                for (int u = 0; u < steps * base.updates_per_env_step; ++u)
                    trail_train_step(encoder, buffer, point.cfg, opt, base.batch_size, rng);
            }
            const auto queries = make_eval_queries(*env, base.n_eval_queries, base.eval_seed);
            per_seed.push_back(
                evaluate(frozen, &encoder, *env, queries, EvalMode::Trail, base.eval_seed)
                    .success_rate);
        }
        table.push_back({point.label, mean_of(per_seed), pop_std(per_seed)});
    }
    return table;
}

} // namespace trail
