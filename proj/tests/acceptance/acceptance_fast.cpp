// Property-suite acceptance criteria (1-5) plus determinism/formats (11).
// Each criterion prints one PASS/FAIL line; exit code is nonzero on any FAIL.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "acceptance.hpp"
#include "trail/checkpoint.hpp"
#include "trail/encoder.hpp"
#include "trail/heads.hpp"
#include "trail/net.hpp"
#include "trail/replay.hpp"
#include "trail/runner.hpp"

using namespace trail;

namespace {

StateVec random_state(int d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    StateVec s(d);
    for (double& v : s) v = u(rng);
    return s;
}

// Error per coordinate relative to the gradient's magnitude. Normalizing each
// coordinate by itself is ill-conditioned here: near-zero partials sit below
// the FD resolution floor (eps*|loss|/2h ~ 1e-10 at h = 1e-5), so they would
// report roundoff, not gradient bugs.
double max_fd_rel_error(std::vector<double>& params, const std::vector<double>& grad,
                        const std::function<double()>& loss_fn) {
    const double h = 1e-5;
    double scale = 1e-6;
    for (double g : grad) scale = std::max(scale, std::abs(g));
    double max_rel = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        const double orig = params[p];
        params[p] = orig + h;
        const double hi = loss_fn();
        params[p] = orig - h;
        const double lo = loss_fn();
        params[p] = orig;
        const double fd = (hi - lo) / (2 * h);
        const double denom = std::max({std::abs(fd), std::abs(grad[p]), scale});
        max_rel = std::max(max_rel, std::abs(fd - grad[p]) / denom);
    }
    return max_rel;
}

// FD probes step each parameter by 1e-5; a hidden preactivation within that
// distance of zero puts a ReLU kink inside the probe interval, where the loss
// is not differentiable and central differences return the slope average.
// Draws that close to a kink are rejected and re-rolled.
double min_abs_preact(const DenseNet& net, const std::vector<double>& inputs) {
    const auto& dims = net.dims();
    const auto& p = net.params();
    const int n = static_cast<int>(inputs.size()) / dims.front();
    double min_abs = std::numeric_limits<double>::infinity();
    std::vector<double> cur = inputs;
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int in = dims[l], out = dims[l + 1];
        std::vector<double> next(static_cast<std::size_t>(n) * out);
        for (int i = 0; i < n; ++i)
            for (int o = 0; o < out; ++o) {
                double z = p[off + static_cast<std::size_t>(in) * out + o];
                for (int j = 0; j < in; ++j)
                    z += p[off + static_cast<std::size_t>(o) * in + j] * cur[i * in + j];
                if (l + 2 < dims.size()) {
                    min_abs = std::min(min_abs, std::abs(z));
                    z = std::max(z, 0.0);
                }
                next[static_cast<std::size_t>(i) * out + o] = z;
            }
        off += static_cast<std::size_t>(in) * out + out;
        cur = std::move(next);
    }
    return min_abs;
}

constexpr double kKinkMargin = 1e-3;

// Criterion 1: analytic vs central finite-difference gradients for every loss.
void criterion_gradients() {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    int n_nets = 0;

    for (int rep = 0; rep < 52; ++rep) {
        const int d = 1 + static_cast<int>(rng() % 4);
        const int k = 1 + static_cast<int>(rng() % 3);
        const std::size_t n = 6;

        // categorical NLL through a policy-shaped net (input [s || g])
        {
            const int n_actions = 2 + static_cast<int>(rng() % 3);
            DenseNet net({2 * d, 8, n_actions});
            std::vector<double> inputs;
            std::vector<int> labels;
            do {
                net.init_he(rng);
                inputs.clear();
                labels.clear();
                for (std::size_t i = 0; i < n; ++i) {
                    for (int j = 0; j < 2 * d; ++j) inputs.push_back(u(rng));
                    labels.push_back(static_cast<int>(rng() % n_actions));
                }
            } while (min_abs_preact(net, inputs) < kKinkMargin);
            auto loss_of = [&] {
                const auto raw = net.forward(inputs, static_cast<int>(n));
                double total = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    total += categorical_nll(raw.data() + i * n_actions, n_actions, labels[i]);
                return total / static_cast<double>(n);
            };
            DenseNet::Cache cache;
            const auto raw = net.forward(inputs, static_cast<int>(n), &cache);
            std::vector<double> upstream(n * n_actions, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<double> g(n_actions);
                categorical_nll(raw.data() + i * n_actions, n_actions, labels[i], g.data());
                for (int j = 0; j < n_actions; ++j)
                    upstream[i * n_actions + j] = g[j] / static_cast<double>(n);
            }
            std::vector<double> grad(net.n_params(), 0.0);
            net.backward(cache, upstream, grad);
            worst = std::max(worst, max_fd_rel_error(net.params(), grad, loss_of));
        }

        std::optional<TrajectoryEncoder> drawn;
        std::vector<TrailSample> batch;
        std::vector<std::pair<StateVec, StateVec>> pairs;
        std::vector<std::pair<double, double>> ts;
        while (!drawn) {
            TrajectoryEncoder candidate(d, k, {8, 8}, rng);
            batch.clear();
            pairs.clear();
            ts.clear();
            std::vector<double> rows;
            auto add_row = [&](const StateVec& s, const StateVec& g, double t) {
                rows.insert(rows.end(), s.begin(), s.end());
                rows.insert(rows.end(), g.begin(), g.end());
                rows.push_back(t);
            };
            for (std::size_t i = 0; i < n; ++i) {
                TrailSample s{random_state(d, rng), random_state(d, rng), random_state(d, rng),
                              0.5 * (u(rng) + 1.0)};
                pairs.emplace_back(s.s, s.g);
                const double t1 = 0.5 * (u(rng) + 1.0);
                const double t2 = 0.5 * (u(rng) + 1.0);
                ts.emplace_back(t1, t2);
                add_row(s.s, s.g, s.t);
                add_row(s.s, s.g, 0.0);
                add_row(s.s, s.g, 1.0);
                add_row(s.s, s.g, t1 * t2);
                batch.push_back(std::move(s));
            }
            if (min_abs_preact(candidate.net(), rows) >= kKinkMargin)
                drawn.emplace(std::move(candidate));
        }
        TrajectoryEncoder& enc = *drawn;

        // MDN NLL (the sub-goal loss)
        std::vector<double> grad_sub(enc.net().n_params(), 0.0);
        subgoal_loss(enc, batch, &grad_sub);
        worst = std::max(worst, max_fd_rel_error(enc.net().params(), grad_sub,
                                                 [&] { return subgoal_loss(enc, batch); }));

        // edge loss under frozen mode selection
        std::vector<int> m0, m1;
        for (const auto& [s, g] : pairs) {
            m0.push_back(enc.top_mode(s, g, 0.0));
            m1.push_back(enc.top_mode(s, g, 1.0));
        }
        std::vector<double> grad_edge(enc.net().n_params(), 0.0);
        edge_loss_fixed(enc, pairs, m0, m1, &grad_edge);
        worst = std::max(worst,
                         max_fd_rel_error(enc.net().params(), grad_edge,
                                          [&] { return edge_loss_fixed(enc, pairs, m0, m1); }));

        // self-consistency, non-target branch (targets held constant)
        std::vector<int> modes;
        std::vector<StateVec> targets;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto& [s, g] = pairs[i];
            const auto& [t1, t2] = ts[i];
            const int km = enc.top_mode(s, g, t1);
            modes.push_back(km);
            targets.push_back(enc.mode_mean(s, enc.mode_mean(s, g, t1, km), t2, km));
        }
        std::vector<double> grad_sc(enc.net().n_params(), 0.0);
        self_consistency_loss_fixed(enc, pairs, modes, ts, targets, &grad_sc);
        worst = std::max(worst, max_fd_rel_error(enc.net().params(), grad_sc, [&] {
                             return self_consistency_loss_fixed(enc, pairs, modes, ts, targets);
                         }));

        // composite J_TraIL with the same frozen selections
        const double alpha = 0.01;
        std::vector<double> grad_total(enc.net().n_params(), 0.0);
        for (std::size_t p = 0; p < grad_total.size(); ++p)
            grad_total[p] = grad_sub[p] + alpha * (grad_edge[p] + grad_sc[p]);
        worst = std::max(worst, max_fd_rel_error(enc.net().params(), grad_total, [&] {
                             return subgoal_loss(enc, batch) +
                                    alpha * (edge_loss_fixed(enc, pairs, m0, m1) +
                                             self_consistency_loss_fixed(enc, pairs, modes, ts,
                                                                         targets));
                         }));
        ++n_nets;
    }

    char detail[128];
    std::snprintf(detail, sizeof(detail), "%d nets, max relative error %.3g", n_nets, worst);
    acceptance::report(1, n_nets >= 50 && worst < 1e-4, detail);
}

// Criterion 2: hindsight gap distribution on fixed-length-5 trajectories.
void criterion_gap_bias() {
    std::mt19937_64 rng(22);
    ReplayBuffer buffer(64, false);
    for (int e = 0; e < 32; ++e) {
        Trajectory traj;
        for (int i = 0; i < 5; ++i) traj.states.push_back(random_state(2, rng));
        traj.actions.assign(4, Action{0});
        buffer.push(std::move(traj));
    }
    const auto hist = gap_histogram(buffer, 1'000'000, rng);
    const double expected[] = {25.0 / 48.0, 13.0 / 48.0, 7.0 / 48.0, 1.0 / 16.0};
    double max_abs = 0.0;
    bool monotone = true;
    for (int g = 1; g <= 4; ++g) {
        max_abs = std::max(max_abs, std::abs(hist[g] - expected[g - 1]));
        if (g > 1 && hist[g] > hist[g - 1]) monotone = false;
    }
    char detail[128];
    std::snprintf(detail, sizeof(detail), "1e6 draws, max |err| %.4f, monotone %s", max_abs,
                  monotone ? "yes" : "no");
    acceptance::report(2, max_abs < 0.005 && monotone, detail);
}

// Criterion 3: trimming properties on randomized trajectories.
void criterion_trim() {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int n_cases = 0;
    bool ok = true;
    for (int rep = 0; rep < 100'000 && ok; ++rep) {
        const int d = 1 + static_cast<int>(rng() % 3);
        Trajectory traj;
        StateVec cur = random_state(d, rng);
        traj.states.push_back(cur);
        const int steps = static_cast<int>(rng() % 12);
        const int flavor = rep % 3; // mixed / no-op (all distinct) / full collapse
        for (int i = 0; i < steps; ++i) {
            if (flavor == 0 && rng() % 3 == 0) {
                // duplicate the previous state
            } else if (flavor != 2) {
                cur = random_state(d, rng);
            }
            traj.states.push_back(cur);
            traj.actions.push_back(Action{static_cast<int>(rng() % 4)});
        }
        const Trajectory once = trim(traj);
        const Trajectory twice = trim(once);
        ok = ok && once.states.size() == once.actions.size() + 1;
        ok = ok && !once.states.empty();
        for (std::size_t i = 0; i + 1 < once.states.size(); ++i)
            ok = ok && once.states[i] != once.states[i + 1];
        ok = ok && twice.states == once.states && twice.actions == once.actions;
        if (flavor == 2 && steps > 0) ok = ok && once.states.size() == 1;
        if (flavor == 1) ok = ok && once.states.size() == traj.states.size();
        ++n_cases;
    }
    char detail[64];
    std::snprintf(detail, sizeof(detail), "%d randomized trajectories", n_cases);
    acceptance::report(3, ok, detail);
}

// Exact straight-line single-mode encoder: edge/self-consistency identically zero.
class LinearInterpolator : public SubgoalModel {
public:
    int n_modes() const override { return 1; }
    int top_mode(const StateVec&, const StateVec&, double) const override { return 0; }
    StateVec mode_mean(const StateVec& s, const StateVec& g, double t, int) const override {
        StateVec m(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) m[i] = s[i] + t * (g[i] - s[i]);
        return m;
    }
};

void criterion_nulls() {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    LinearInterpolator lin;
    std::vector<std::pair<StateVec, StateVec>> pairs;
    std::vector<std::pair<double, double>> ts;
    for (int i = 0; i < 10'000; ++i) {
        pairs.emplace_back(random_state(3, rng), random_state(3, rng));
        ts.emplace_back(u01(rng), u01(rng));
    }
    const double edge = edge_loss_value(lin, pairs);
    const double sc = self_consistency_value(lin, pairs, ts);
    char detail[128];
    std::snprintf(detail, sizeof(detail), "1e4 cases, edge %.3g, self-consistency %.3g", edge, sc);
    acceptance::report(4, edge < 1e-12 && sc < 1e-12, detail);
}

// Criterion 5: BestMode vs exhaustive argmin, ties resolved to the lowest index.
void criterion_best_mode() {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int n_cases = 0;
    bool ok = true;
    for (int rep = 0; rep < 10'000 && ok; ++rep) {
        const int d = 1 + static_cast<int>(rng() % 4);
        const int k = 1 + static_cast<int>(rng() % 5);
        MdnSpec spec{k, d};
        std::vector<double> raw0(spec.raw_size()), raw1(spec.raw_size());
        for (double& v : raw0) v = u(rng);
        for (double& v : raw1) v = u(rng);
        if (rep % 7 == 0 && k > 1) {
            // exact tie: clone mode 0's centers into the last mode at both t
            for (int j = 0; j < d; ++j) {
                raw0[k + (k - 1) * d + j] = raw0[k + j];
                raw1[k + (k - 1) * d + j] = raw1[k + j];
            }
        }
        const StateVec s = random_state(d, rng);
        const StateVec g = random_state(d, rng);
        int brute = 0;
        double best = 0.0;
        for (int m = 0; m < k; ++m) {
            const auto mu0 = mdn_mode_mean(spec, raw0.data(), s.data(), m);
            const auto mu1 = mdn_mode_mean(spec, raw1.data(), s.data(), m);
            double cost = 0.0;
            for (int j = 0; j < d; ++j) {
                cost += (mu0[j] - s[j]) * (mu0[j] - s[j]);
                cost += (mu1[j] - g[j]) * (mu1[j] - g[j]);
            }
            if (m == 0 || cost < best) {
                best = cost;
                brute = m;
            }
        }
        ok = best_mode_from_raw(spec, raw0.data(), raw1.data(), s, g) == brute;
        ++n_cases;
    }
    char detail[64];
    std::snprintf(detail, sizeof(detail), "%d mixture outputs incl. ties", n_cases);
    acceptance::report(5, ok, detail);
}

// Criterion 11: byte-identical metrics, bit-exact checkpoints, corrupt header rejected.
void criterion_determinism() {
    TrainConfig cfg;
    cfg.env.name = "discrete_rooms";
    cfg.env.rooms_x = 1;
    cfg.env.rooms_y = 1;
    cfg.env.room_size = 3;
    cfg.env.horizon = 12;
    cfg.episodes = 6;
    cfg.batch_size = 16;
    cfg.policy_hidden = {8, 8};
    cfg.encoder_hidden = {8, 8};
    cfg.eval_every = 3;
    cfg.n_eval_queries = 8;
    cfg.validate();

    std::ostringstream a, b;
    const TrainResult ra = train(cfg, 5, &a);
    train(cfg, 5, &b);
    const bool metrics_ok = !a.str().empty() && a.str() == b.str();

    const auto tmp = std::filesystem::temp_directory_path() / "trail_acceptance_ckpt.bin";
    Checkpoint ckpt;
    ckpt.kind = "policy";
    ckpt.head = "categorical";
    ckpt.dims = {4, 8, 8, 4};
    ckpt.params = ra.policy.net.params();
    ckpt.params[0] = 1e-300;
    ckpt.params[1] = -0.0;
    save_checkpoint(tmp.string(), ckpt);
    const Checkpoint back = load_checkpoint(tmp.string());
    bool roundtrip_ok = back.params.size() == ckpt.params.size() && back.dims == ckpt.dims;
    for (std::size_t i = 0; roundtrip_ok && i < ckpt.params.size(); ++i)
        roundtrip_ok = std::memcmp(&back.params[i], &ckpt.params[i], sizeof(double)) == 0;

    {
        std::fstream io(tmp, std::ios::in | std::ios::out | std::ios::binary);
        io.put('X');
    }
    bool corrupt_ok = false;
    try {
        load_checkpoint(tmp.string());
    } catch (const std::exception&) {
        corrupt_ok = true;
    }
    std::filesystem::remove(tmp);

    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "metrics byte-identical %s, checkpoint bit-exact %s, corrupt header rejected %s",
                  metrics_ok ? "yes" : "no", roundtrip_ok ? "yes" : "no",
                  corrupt_ok ? "yes" : "no");
    acceptance::report(11, metrics_ok && roundtrip_ok && corrupt_ok, detail);
}

} // namespace

int main() {
    criterion_gradients();
    criterion_gap_bias();
    criterion_trim();
    criterion_nulls();
    criterion_best_mode();
    criterion_determinism();
    return acceptance::exit_code();
}
