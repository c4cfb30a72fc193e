#include "trail/policy.hpp"

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

int sample_categorical(const double* logits, int n, std::mt19937_64& rng) {
    double lmax = logits[argmax_lowest_tie(logits, n)];
    std::vector<double> w(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += w[i] = std::exp(logits[i] - lmax);
    std::uniform_real_distribution<double> u(0.0, sum);
    double r = u(rng);
    for (int i = 0; i < n; ++i) {
        if (r < w[i]) return i;
        r -= w[i];
    }
    return n - 1;
}

} // namespace

Policy Policy::make_discrete(int state_dim, int n_actions, const std::vector<int>& hidden,
                             std::mt19937_64& rng) {
    Policy p{DenseNet(full_dims(2 * state_dim, hidden, n_actions)), {}, state_dim, {}};
    p.action_space.kind = ActionSpaceSpec::Kind::Discrete;
    p.action_space.n_actions = n_actions;
    p.net.init_he(rng);
    return p;
}

Policy Policy::make_continuous(int state_dim, int action_dim, double max_norm, int n_modes,
                               const std::vector<int>& hidden, std::mt19937_64& rng) {
    MdnSpec mdn{n_modes, action_dim};
    Policy p{DenseNet(full_dims(2 * state_dim, hidden, mdn.raw_size())), {}, state_dim, mdn};
    p.action_space.kind = ActionSpaceSpec::Kind::Continuous;
    p.action_space.dim = action_dim;
    p.action_space.max_norm = max_norm;
    p.net.init_he(rng);
    return p;
}

std::vector<double> Policy::head_raw(const StateVec& s, const StateVec& g) const {
    std::vector<double> input;
    input.reserve(2 * state_dim);
    input.insert(input.end(), s.begin(), s.end());
    input.insert(input.end(), g.begin(), g.end());
    return net.forward(input, 1);
}

Action Policy::act(const StateVec& s, const StateVec& g, std::mt19937_64& rng,
                   bool greedy) const {
    std::vector<double> raw = head_raw(s, g);
    if (action_space.kind == ActionSpaceSpec::Kind::Discrete) {
        if (greedy) return argmax_lowest_tie(raw.data(), action_space.n_actions);
        return sample_categorical(raw.data(), action_space.n_actions, rng);
    }
    const std::vector<double> anchor(action_space.dim, 0.0);
    if (greedy) return mdn_mode_mean(mdn, raw.data(), anchor.data(), mdn_best_logit_mode(mdn, raw.data()));
    return mdn_sample(mdn, raw.data(), anchor.data(), rng);
}

double gcsl_train_step(Policy& policy, const std::vector<GcslSample>& batch, AdamState& opt,
                       std::optional<double> clip_norm) {
    if (batch.empty()) throw std::invalid_argument("empty training batch");
    const int n = static_cast<int>(batch.size());
    const int in_dim = policy.net.input_dim();
    const int out_dim = policy.net.output_dim();
    std::vector<double> inputs;
    inputs.reserve(static_cast<std::size_t>(n) * in_dim);
    for (const auto& sample : batch) {
        inputs.insert(inputs.end(), sample.s.begin(), sample.s.end());
        inputs.insert(inputs.end(), sample.g.begin(), sample.g.end());
    }
    DenseNet::Cache cache;
    std::vector<double> raw = policy.net.forward(inputs, n, &cache);
    std::vector<double> upstream(raw.size(), 0.0);
    const std::vector<double> zero_anchor(policy.action_space.dim, 0.0);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* r = raw.data() + static_cast<std::size_t>(i) * out_dim;
        double* u = upstream.data() + static_cast<std::size_t>(i) * out_dim;
        if (policy.action_space.kind == ActionSpaceSpec::Kind::Discrete) {
            loss += categorical_nll(r, out_dim, std::get<int>(batch[i].a), u);
        } else {
            loss += mdn_nll(policy.mdn, r, zero_anchor.data(),
                            std::get<std::vector<double>>(batch[i].a).data(), u);
        }
    }
    loss /= n;
    if (!std::isfinite(loss))
        throw std::runtime_error("non-finite loss in gcsl_train_step");
    for (double& u : upstream) u /= n;
    std::vector<double> grad(policy.net.n_params(), 0.0);
    policy.net.backward(cache, upstream, grad);
    adam_step(opt, policy.net.params(), grad, clip_norm);
    return loss;
}

} // namespace trail
