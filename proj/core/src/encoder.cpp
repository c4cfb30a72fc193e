#include "trail/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trail {

namespace {

std::vector<int> full_dims(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> dims{in};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    return dims;
}

std::vector<double> pair_inputs(int state_dim,
                                const std::vector<std::pair<StateVec, StateVec>>& pairs,
                                const std::vector<double>& ts) {
    std::vector<double> inputs;
    inputs.reserve(pairs.size() * (2 * state_dim + 1));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        inputs.insert(inputs.end(), pairs[i].first.begin(), pairs[i].first.end());
        inputs.insert(inputs.end(), pairs[i].second.begin(), pairs[i].second.end());
        inputs.push_back(ts[i]);
    }
    return inputs;
}

} // namespace

TrajectoryEncoder::TrajectoryEncoder(int state_dim, int n_modes, const std::vector<int>& hidden,
                                     std::mt19937_64& rng)
    : state_dim_(state_dim), mdn_{n_modes, state_dim},
      net_(full_dims(2 * state_dim + 1, hidden, MdnSpec{n_modes, state_dim}.raw_size())) {
    net_.init_he(rng);
}

TrajectoryEncoder::TrajectoryEncoder(int state_dim, MdnSpec mdn, DenseNet net)
    : state_dim_(state_dim), mdn_(mdn), net_(std::move(net)) {
    if (net_.output_dim() != mdn_.raw_size() || net_.input_dim() != 2 * state_dim + 1)
        throw std::invalid_argument("encoder net shape does not match the MDN head");
}

std::vector<double> TrajectoryEncoder::raw_at(const StateVec& s, const StateVec& g,
                                              double t) const {
    std::vector<double> input;
    input.reserve(2 * state_dim_ + 1);
    input.insert(input.end(), s.begin(), s.end());
    input.insert(input.end(), g.begin(), g.end());
    input.push_back(t);
    return net_.forward(input, 1);
}

int TrajectoryEncoder::top_mode(const StateVec& s, const StateVec& g, double t) const {
    return mdn_best_logit_mode(mdn_, raw_at(s, g, t).data());
}

StateVec TrajectoryEncoder::mode_mean(const StateVec& s, const StateVec& g, double t,
                                      int k) const {
    return mdn_mode_mean(mdn_, raw_at(s, g, t).data(), s.data(), k);
}

StateVec TrajectoryEncoder::sample(const StateVec& s, const StateVec& g, double t,
                                   std::mt19937_64& rng, std::optional<int> mode) const {
    return mdn_sample(mdn_, raw_at(s, g, t).data(), s.data(), rng, mode);
}

std::vector<double> TrajectoryEncoder::batch_input(const std::vector<TrailSample>& batch) const {
    std::vector<double> inputs;
    inputs.reserve(batch.size() * (2 * state_dim_ + 1));
    for (const auto& sample : batch) {
        inputs.insert(inputs.end(), sample.s.begin(), sample.s.end());
        inputs.insert(inputs.end(), sample.g.begin(), sample.g.end());
        inputs.push_back(sample.t);
    }
    return inputs;
}

double subgoal_loss(const TrajectoryEncoder& enc, const std::vector<TrailSample>& batch,
                    std::vector<double>* grad) {
    if (batch.empty()) throw std::invalid_argument("empty sub-goal batch");
    const int n = static_cast<int>(batch.size());
    const int out_dim = enc.net().output_dim();
    DenseNet::Cache cache;
    std::vector<double> raw = enc.net().forward(enc.batch_input(batch), n, grad ? &cache : nullptr);
    std::vector<double> upstream(grad ? raw.size() : 0, 0.0);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* r = raw.data() + static_cast<std::size_t>(i) * out_dim;
        double* u = grad ? upstream.data() + static_cast<std::size_t>(i) * out_dim : nullptr;
        loss += mdn_nll(enc.mdn(), r, batch[i].s.data(), batch[i].m.data(), u);
    }
    loss /= n;
    if (grad) {
        for (double& u : upstream) u /= n;
        enc.net().backward(cache, upstream, *grad);
    }
    return loss;
}

namespace {

// Shared core of edge_loss / edge_loss_fixed: consumes already-computed
// forwards at t=0 and t=1 so callers pay for them exactly once.
double edge_core(const TrajectoryEncoder& enc,
                 const std::vector<std::pair<StateVec, StateVec>>& pairs,
                 const std::vector<double>& raw0, const std::vector<double>& raw1,
                 const DenseNet::Cache& cache0, const DenseNet::Cache& cache1,
                 const std::vector<int>& modes_t0, const std::vector<int>& modes_t1,
                 std::vector<double>* grad) {
    const int n = static_cast<int>(pairs.size());
    const int d = enc.state_dim();
    const int K = enc.mdn().n_modes;
    const int out_dim = enc.net().output_dim();
    std::vector<double> up0(grad ? raw0.size() : 0, 0.0);
    std::vector<double> up1(grad ? raw1.size() : 0, 0.0);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto& [s, g] = pairs[i];
        const double* c0 = raw0.data() + static_cast<std::size_t>(i) * out_dim + K +
                           static_cast<std::size_t>(modes_t0[i]) * d;
        const double* c1 = raw1.data() + static_cast<std::size_t>(i) * out_dim + K +
                           static_cast<std::size_t>(modes_t1[i]) * d;
        for (int j = 0; j < d; ++j) {
            const double r0 = c0[j];              // mu(s,g,0) - s = c
            const double r1 = s[j] + c1[j] - g[j]; // mu(s,g,1) - g
            loss += r0 * r0 + r1 * r1;
            if (grad) {
                up0[static_cast<std::size_t>(i) * out_dim + K + modes_t0[i] * d + j] =
                    2.0 * r0 / n;
                up1[static_cast<std::size_t>(i) * out_dim + K + modes_t1[i] * d + j] =
                    2.0 * r1 / n;
            }
        }
    }
    loss /= n;
    if (grad) {
        enc.net().backward(cache0, up0, *grad);
        enc.net().backward(cache1, up1, *grad);
    }
    return loss;
}

std::pair<DenseNet::Cache, DenseNet::Cache> edge_forwards(const TrajectoryEncoder& enc,
                                                          const std::vector<std::pair<StateVec, StateVec>>& pairs,
                                                          std::vector<double>& raw0,
                                                          std::vector<double>& raw1, bool cached) {
    const int n = static_cast<int>(pairs.size());
    const int d = enc.state_dim();
    const std::vector<double> zeros(pairs.size(), 0.0);
    const std::vector<double> ones(pairs.size(), 1.0);
    std::pair<DenseNet::Cache, DenseNet::Cache> caches;
    raw0 = enc.net().forward(pair_inputs(d, pairs, zeros), n, cached ? &caches.first : nullptr);
    raw1 = enc.net().forward(pair_inputs(d, pairs, ones), n, cached ? &caches.second : nullptr);
    return caches;
}

} // namespace

double edge_loss_fixed(const TrajectoryEncoder& enc,
                       const std::vector<std::pair<StateVec, StateVec>>& pairs,
                       const std::vector<int>& modes_t0, const std::vector<int>& modes_t1,
                       std::vector<double>* grad) {
    if (pairs.empty()) throw std::invalid_argument("empty edge-loss batch");
    std::vector<double> raw0, raw1;
    const auto caches = edge_forwards(enc, pairs, raw0, raw1, grad != nullptr);
    return edge_core(enc, pairs, raw0, raw1, caches.first, caches.second, modes_t0, modes_t1,
                     grad);
}

double edge_loss(const TrajectoryEncoder& enc,
                 const std::vector<std::pair<StateVec, StateVec>>& pairs,
                 std::vector<double>* grad) {
    if (pairs.empty()) throw std::invalid_argument("empty edge-loss batch");
    const int n = static_cast<int>(pairs.size());
    const int out_dim = enc.net().output_dim();
    std::vector<double> raw0, raw1;
    const auto caches = edge_forwards(enc, pairs, raw0, raw1, grad != nullptr);
    std::vector<int> modes0(pairs.size()), modes1(pairs.size());
    for (int i = 0; i < n; ++i) {
        modes0[i] = mdn_best_logit_mode(enc.mdn(), raw0.data() + static_cast<std::size_t>(i) * out_dim);
        modes1[i] = mdn_best_logit_mode(enc.mdn(), raw1.data() + static_cast<std::size_t>(i) * out_dim);
    }
    return edge_core(enc, pairs, raw0, raw1, caches.first, caches.second, modes0, modes1, grad);
}

double self_consistency_loss_fixed(const TrajectoryEncoder& enc,
                                   const std::vector<std::pair<StateVec, StateVec>>& pairs,
                                   const std::vector<int>& modes,
                                   const std::vector<std::pair<double, double>>& ts,
                                   const std::vector<StateVec>& targets,
                                   std::vector<double>* grad) {
    if (pairs.empty()) throw std::invalid_argument("empty self-consistency batch");
    const int n = static_cast<int>(pairs.size());
    const int d = enc.state_dim();
    const int K = enc.mdn().n_modes;
    const int out_dim = enc.net().output_dim();
    std::vector<double> t12(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) t12[i] = ts[i].first * ts[i].second;
    DenseNet::Cache cache;
    std::vector<double> inputs = pair_inputs(d, pairs, t12);
    std::vector<double> raw = enc.net().forward(inputs, n, grad ? &cache : nullptr);
    std::vector<double> upstream(grad ? raw.size() : 0, 0.0);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto& s = pairs[i].first;
        const double* c = raw.data() + static_cast<std::size_t>(i) * out_dim + K +
                          static_cast<std::size_t>(modes[i]) * d;
        for (int j = 0; j < d; ++j) {
            const double r = s[j] + c[j] - targets[i][j];
            loss += r * r;
            if (grad)
                upstream[static_cast<std::size_t>(i) * out_dim + K + modes[i] * d + j] =
                    2.0 * r / n;
        }
    }
    loss /= n;
    if (grad) enc.net().backward(cache, upstream, *grad);
    return loss;
}

double self_consistency_loss(const TrajectoryEncoder& enc,
                             const std::vector<std::pair<StateVec, StateVec>>& pairs,
                             std::mt19937_64& rng, std::vector<double>* grad) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::pair<double, double>> ts;
    std::vector<int> modes;
    std::vector<StateVec> targets;
    ts.reserve(pairs.size());
    modes.reserve(pairs.size());
    targets.reserve(pairs.size());
    for (const auto& p : pairs) {
        (void)p;
        const double t1 = u(rng);
        const double t2 = u(rng);
        ts.emplace_back(t1, t2);
    }
    const int n = static_cast<int>(pairs.size());
    const int d = enc.state_dim();
    const int K = enc.mdn().n_modes;
    const int out_dim = enc.net().output_dim();
    std::vector<double> t1s(pairs.size()), t2s(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        t1s[i] = ts[i].first;
        t2s[i] = ts[i].second;
    }
    const std::vector<double> raw1 = enc.net().forward(pair_inputs(d, pairs, t1s), n);
    std::vector<std::pair<StateVec, StateVec>> hops(pairs.size());
    for (int i = 0; i < n; ++i) {
        const double* r = raw1.data() + static_cast<std::size_t>(i) * out_dim;
        const int k = mdn_best_logit_mode(enc.mdn(), r);
        modes.push_back(k);
        StateVec m1 = pairs[i].first;
        for (int j = 0; j < d; ++j) m1[j] += r[K + k * d + j];
        hops[i] = {pairs[i].first, std::move(m1)};
    }
    const std::vector<double> raw2 = enc.net().forward(pair_inputs(d, hops, t2s), n);
    for (int i = 0; i < n; ++i) {
        const double* r = raw2.data() + static_cast<std::size_t>(i) * out_dim;
        StateVec m2 = hops[i].first; // anchored at s
        for (int j = 0; j < d; ++j) m2[j] += r[K + modes[i] * d + j];
        targets.push_back(std::move(m2)); // stop-gradient target
    }
    return self_consistency_loss_fixed(enc, pairs, modes, ts, targets, grad);
}

double edge_loss_value(const SubgoalModel& model,
                       const std::vector<std::pair<StateVec, StateVec>>& pairs) {
    double loss = 0.0;
    for (const auto& [s, g] : pairs) {
        StateVec m0 = model.mode_mean(s, g, 0.0, model.top_mode(s, g, 0.0));
        StateVec m1 = model.mode_mean(s, g, 1.0, model.top_mode(s, g, 1.0));
        for (std::size_t j = 0; j < s.size(); ++j) {
            loss += (m0[j] - s[j]) * (m0[j] - s[j]) + (m1[j] - g[j]) * (m1[j] - g[j]);
        }
    }
    return loss / static_cast<double>(pairs.size());
}

double self_consistency_value(const SubgoalModel& model,
                              const std::vector<std::pair<StateVec, StateVec>>& pairs,
                              const std::vector<std::pair<double, double>>& ts) {
    double loss = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [s, g] = pairs[i];
        const auto [t1, t2] = ts[i];
        int k = model.top_mode(s, g, t1);
        StateVec m1 = model.mode_mean(s, g, t1, k);
        StateVec m2 = model.mode_mean(s, m1, t2, k);
        StateVec pred = model.mode_mean(s, g, t1 * t2, k);
        for (std::size_t j = 0; j < s.size(); ++j) loss += (pred[j] - m2[j]) * (pred[j] - m2[j]);
    }
    return loss / static_cast<double>(pairs.size());
}

TrailLosses trail_train_step(TrajectoryEncoder& enc, const ReplayBuffer& buffer,
                             const TrailLossConfig& cfg, AdamState& opt, std::size_t batch_size,
                             std::mt19937_64& rng, std::optional<double> clip_norm) {
    TrailLosses losses;
    std::vector<double> grad(enc.net().n_params(), 0.0);
    losses.sub = subgoal_loss(enc, sample_trail(buffer, batch_size, rng), &grad);
    if (cfg.alpha_edge > 0.0) {
        std::vector<double> ge(grad.size(), 0.0);
        losses.edge = edge_loss(enc, sample_pairs(buffer, batch_size, rng), &ge);
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += cfg.alpha_edge * ge[i];
    }
    if (cfg.alpha_sc > 0.0) {
        std::vector<double> gs(grad.size(), 0.0);
        losses.sc = self_consistency_loss(enc, sample_pairs(buffer, batch_size, rng), rng, &gs);
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += cfg.alpha_sc * gs[i];
    }
    losses.total = losses.sub + cfg.alpha_edge * losses.edge + cfg.alpha_sc * losses.sc;
    if (!std::isfinite(losses.total))
        throw std::runtime_error("non-finite loss in trail_train_step");
    adam_step(opt, enc.net().params(), grad, clip_norm);
    return losses;
}

int best_mode(const SubgoalModel& model, const StateVec& s, const StateVec& g) {
    int best = 0;
    double best_cost = 0.0;
    for (int k = 0; k < model.n_modes(); ++k) {
        StateVec m0 = model.mode_mean(s, g, 0.0, k);
        StateVec m1 = model.mode_mean(s, g, 1.0, k);
        double cost = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j)
            cost += (m0[j] - s[j]) * (m0[j] - s[j]) + (m1[j] - g[j]) * (m1[j] - g[j]);
        if (k == 0 || cost < best_cost) {
            best = k;
            best_cost = cost;
        }
    }
    return best;
}

int best_mode_from_raw(const MdnSpec& spec, const double* raw_t0, const double* raw_t1,
                       const StateVec& s, const StateVec& g) {
    int best = 0;
    double best_cost = 0.0;
    for (int k = 0; k < spec.n_modes; ++k) {
        StateVec m0 = mdn_mode_mean(spec, raw_t0, s.data(), k);
        StateVec m1 = mdn_mode_mean(spec, raw_t1, s.data(), k);
        double cost = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j)
            cost += (m0[j] - s[j]) * (m0[j] - s[j]) + (m1[j] - g[j]) * (m1[j] - g[j]);
        if (k == 0 || cost < best_cost) {
            best = k;
            best_cost = cost;
        }
    }
    return best;
}

Action get_action(const Policy& policy, const TrajectoryEncoder& enc, const StateVec& s,
                  const StateVec& g, int i, int T, std::mt19937_64& rng, bool stochastic) {
    if (i < 0 || i >= T) throw std::out_of_range("step index out of [0, T)");
    const double t = std::max(0.5, static_cast<double>(i + 1) / T);
    const std::vector<double> raw0 = enc.raw_at(s, g, 0.0);
    const std::vector<double> raw1 = enc.raw_at(s, g, 1.0);
    const int k = best_mode_from_raw(enc.mdn(), raw0.data(), raw1.data(), s, g);
    StateVec m = stochastic ? enc.sample(s, g, t, rng, k) : enc.mode_mean(s, g, t, k);
    return policy.act(s, m, rng, /*greedy=*/!stochastic);
}

} // namespace trail
