// Command-line front end: train / eval / bc / bias / ablate.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "trail/config.hpp"
#include "trail/io.hpp"
#include "trail/model_io.hpp"
#include "trail/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

trail::TrainConfig load_train_config(const std::string& path) {
    return trail::train_config_from(trail::parse_config_text(trail::read_text_file(path)));
}

void write_manifest(const fs::path& out_dir, const trail::TrainConfig& cfg,
                    const std::string& started, const std::string& finished) {
    json manifest;
    manifest["config"] = trail::train_config_to_text(cfg);
    manifest["seeds"] = cfg.seeds;
    manifest["out_dir"] = out_dir.string();
    manifest["build"] = std::string("trail ") + __DATE__ + " " + __TIME__;
    manifest["started"] = started;
    if (!finished.empty()) manifest["finished"] = finished;
    trail::write_text_file((out_dir / "manifest.json").string(), manifest.dump(2) + "\n");
}

void write_eval_csv(const fs::path& path, const trail::EvalReport& report) {
    std::ostringstream out;
    out << "id,success,length\n";
    for (const auto& o : report.outcomes)
        out << o.id << ',' << (o.success ? 1 : 0) << ',' << o.length << '\n';
    trail::write_text_file(path.string(), out.str());
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed_override) {
    trail::TrainConfig cfg = load_train_config(config_path);
    if (seed_override) cfg.seeds = {*seed_override};
    fs::create_directories(out_dir);
    const std::string started = iso_now();
    write_manifest(out_dir, cfg, started, "");

    {
        auto env = trail::make_env(cfg.env);
        trail::save_queries((fs::path(out_dir) / "queries.csv").string(),
                            trail::make_eval_queries(*env, cfg.n_eval_queries, cfg.eval_seed));
    }

    for (std::uint64_t seed : cfg.seeds) {
        const std::string tag = std::to_string(seed);
        std::ostringstream metrics;
        trail::TrainResult result = trail::train(cfg, seed, &metrics);
        trail::write_text_file((fs::path(out_dir) / ("metrics_" + tag + ".csv")).string(),
                               metrics.str());
        trail::save_checkpoint((fs::path(out_dir) / ("policy_" + tag + ".ckpt")).string(),
                               trail::policy_checkpoint(result.policy));
        trail::save_checkpoint((fs::path(out_dir) / ("encoder_" + tag + ".ckpt")).string(),
                               trail::encoder_checkpoint(result.encoder));
        std::ostringstream hist;
        trail::write_length_histograms(hist, result.final_gcsl.length_hist,
                                       result.final_trail.length_hist);
        trail::write_text_file((fs::path(out_dir) / ("length_hist_" + tag + ".csv")).string(),
                               hist.str());
        std::cout << "seed " << seed
                  << " eval_success_gcsl=" << trail::fmt_real(result.final_gcsl.success_rate)
                  << " eval_success_trail=" << trail::fmt_real(result.final_trail.success_rate)
                  << "\n";
    }
    write_manifest(out_dir, cfg, started, iso_now());
    return 0;
}

int cmd_eval(const std::string& policy_path, const std::string& encoder_path,
             const std::string& config_path, const std::string& queries_path,
             const std::string& mode_name, const std::string& out_dir, std::uint64_t seed) {
    if (mode_name != "gcsl" && mode_name != "trail")
        throw std::invalid_argument("mode must be gcsl or trail, got " + mode_name);
    const trail::EvalMode mode =
        mode_name == "gcsl" ? trail::EvalMode::Gcsl : trail::EvalMode::Trail;
    if (mode == trail::EvalMode::Trail && encoder_path.empty())
        throw std::invalid_argument("mode=trail requires --encoder");

    trail::TrainConfig cfg = load_train_config(config_path);
    auto env = trail::make_env(cfg.env);
    trail::Policy policy = trail::policy_from_checkpoint(trail::load_checkpoint(policy_path),
                                                         env->spec().action_space);
    if (policy.state_dim != env->spec().state_dim)
        throw std::invalid_argument(
            "checkpoint state dim " + std::to_string(policy.state_dim) + " vs env state dim " +
            std::to_string(env->spec().state_dim));
    std::optional<trail::TrajectoryEncoder> encoder;
    if (!encoder_path.empty()) {
        encoder = trail::encoder_from_checkpoint(trail::load_checkpoint(encoder_path));
        if (encoder->state_dim() != env->spec().state_dim)
            throw std::invalid_argument("encoder state dim " +
                                        std::to_string(encoder->state_dim()) +
                                        " vs env state dim " +
                                        std::to_string(env->spec().state_dim));
    }

    const auto queries = trail::load_queries(queries_path);
    const trail::EvalReport report = trail::evaluate(
        policy, encoder ? &*encoder : nullptr, *env, queries, mode, seed);
    std::cout << "success_rate=" << trail::fmt_real(report.success_rate) << "\n";
    fs::create_directories(out_dir);
    write_eval_csv(fs::path(out_dir) / ("eval_" + mode_name + ".csv"), report);
    std::ostringstream hist;
    const std::vector<int> empty(report.length_hist.size(), 0);
    trail::write_length_histograms(hist, mode == trail::EvalMode::Gcsl ? report.length_hist : empty,
                                   mode == trail::EvalMode::Trail ? report.length_hist : empty);
    trail::write_text_file((fs::path(out_dir) / ("length_hist_" + mode_name + ".csv")).string(),
                           hist.str());
    return 0;
}

int cmd_bc(const std::string& env_name, const std::string& out_dir,
           const std::vector<std::uint64_t>& seeds, int n_batches) {
    fs::create_directories(out_dir);
    std::ostringstream table;
    table << "variant,mean_accuracy,std_accuracy\n";
    for (const std::string variant : {"gcsl", "trail_t1", "trail_t05", "trail_t05_reg"}) {
        trail::BcConfig cfg;
        cfg.env_name = env_name;
        cfg.variant = variant;
        cfg.seeds = seeds;
        if (n_batches > 0) cfg.n_batches = n_batches;
        else cfg.n_batches = env_name == "double_spiral" ? 80000 : 160000;
        const trail::BcResult result = trail::run_bc(cfg);
        table << variant << ',' << trail::fmt_real(result.mean) << ','
              << trail::fmt_real(result.std_dev) << '\n';
        std::cout << env_name << ' ' << variant << " accuracy=" << trail::fmt_real(result.mean)
                  << " +- " << trail::fmt_real(result.std_dev) << "\n";
    }
    trail::write_text_file((fs::path(out_dir) / ("bc_" + env_name + ".csv")).string(),
                           table.str());
    return 0;
}

int cmd_bias(const std::string& config_path, const std::string& out_dir, std::uint64_t seed,
             int episodes, int n_samples) {
    trail::TrainConfig cfg = load_train_config(config_path);
    auto env = trail::make_env(cfg.env);
    env->reseed(seed);
    std::mt19937_64 rng(seed + 1);
    trail::Policy policy = env->spec().action_space.kind == trail::ActionSpaceSpec::Kind::Discrete
                               ? trail::Policy::make_discrete(env->spec().state_dim,
                                                              env->spec().action_space.n_actions,
                                                              cfg.policy_hidden, rng)
                               : trail::Policy::make_continuous(
                                     env->spec().state_dim, env->spec().action_space.dim,
                                     env->spec().action_space.max_norm, cfg.trail.n_modes,
                                     cfg.policy_hidden, rng);
    trail::ReplayBuffer buffer(cfg.buffer_capacity, cfg.post_process);
    for (int ep = 0; ep < episodes; ++ep) {
        auto [traj, ok] =
            trail::collect_episode(*env, policy, nullptr, trail::Collector::Gcsl, rng);
        (void)ok;
        buffer.push(std::move(traj));
    }
    std::ostringstream out;
    trail::run_bias_analysis(buffer, out, n_samples, seed + 2);
    fs::create_directories(out_dir);
    trail::write_text_file((fs::path(out_dir) / "bias.csv").string(), out.str());
    std::cout << "wrote " << (fs::path(out_dir) / "bias.csv").string() << "\n";
    return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& policy_path,
               const std::string& axis, const std::string& out_dir) {
    trail::TrainConfig cfg = load_train_config(config_path);
    auto env = trail::make_env(cfg.env);
    trail::Policy policy = trail::policy_from_checkpoint(trail::load_checkpoint(policy_path),
                                                         env->spec().action_space);
    const auto table = trail::run_ablation(policy, cfg, axis);
    std::ostringstream out;
    out << "point,mean_success,std_success\n";
    for (const auto& row : table) {
        out << row.label << ',' << trail::fmt_real(row.mean) << ','
            << trail::fmt_real(row.std_dev) << '\n';
        std::cout << row.label << " success=" << trail::fmt_real(row.mean) << " +- "
                  << trail::fmt_real(row.std_dev) << "\n";
    }
    fs::create_directories(out_dir);
    trail::write_text_file((fs::path(out_dir) / ("ablation_" + axis + ".csv")).string(),
                           out.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Goal-conditioned self-supervised RL with sub-goal trajectory encoders"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", queries_path, policy_path, encoder_path;
    std::string mode = "gcsl", env_name = "large_rooms", axis = "K";
    std::optional<std::uint64_t> seed_override;
    std::uint64_t eval_seed = 1000;
    std::vector<std::uint64_t> bc_seeds{0, 1, 2};
    int bias_episodes = 200, bias_samples = 200000, bc_batches = 0;

    auto* train = app.add_subcommand("train", "Interleaved collect/optimize run");
    train->add_option("--config", config_path)->required();
    train->add_option("--out", out_dir);
    train->add_option("--seed", seed_override, "Single-seed override of train.seeds");

    auto* eval = app.add_subcommand("eval", "Greedy rollout evaluation on frozen queries");
    eval->add_option("--policy", policy_path)->required();
    eval->add_option("--encoder", encoder_path);
    eval->add_option("--config", config_path)->required();
    eval->add_option("--queries", queries_path)->required();
    eval->add_option("--mode", mode)->check(CLI::IsMember({"gcsl", "trail"}));
    eval->add_option("--out", out_dir);
    eval->add_option("--seed", eval_seed);

    auto* bc = app.add_subcommand("bc", "Behavioral cloning on shortest-path demos");
    bc->add_option("--env", env_name)->check(CLI::IsMember({"large_rooms", "double_spiral"}));
    bc->add_option("--out", out_dir);
    bc->add_option("--seeds", bc_seeds);
    bc->add_option("--batches", bc_batches, "Override per-variant batch budget");

    auto* bias = app.add_subcommand("bias", "Hindsight gap histogram vs analytic curve");
    bias->add_option("--config", config_path)->required();
    bias->add_option("--out", out_dir);
    bias->add_option("--seed", eval_seed);
    bias->add_option("--episodes", bias_episodes);
    bias->add_option("--samples", bias_samples);

    auto* ablate = app.add_subcommand("ablate", "Encoder grid sweep against a frozen policy");
    ablate->add_option("--config", config_path)->required();
    ablate->add_option("--policy", policy_path)->required();
    ablate->add_option("--axis", axis)->check(CLI::IsMember({"K", "alphas"}));
    ablate->add_option("--out", out_dir);

    CLI11_PARSE(app, argc, argv);
    try {
        if (train->parsed()) return cmd_train(config_path, out_dir, seed_override);
        if (eval->parsed())
            return cmd_eval(policy_path, encoder_path, config_path, queries_path, mode, out_dir,
                            eval_seed);
        if (bc->parsed()) return cmd_bc(env_name, out_dir, bc_seeds, bc_batches);
        if (bias->parsed())
            return cmd_bias(config_path, out_dir, eval_seed, bias_episodes, bias_samples);
        if (ablate->parsed()) return cmd_ablate(config_path, policy_path, axis, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
