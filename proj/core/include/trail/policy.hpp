#pragma once

#include <optional>
#include <random>

#include "trail/adam.hpp"
#include "trail/heads.hpp"
#include "trail/net.hpp"
#include "trail/replay.hpp"
#include "trail/types.hpp"

namespace trail {

// Goal-conditioned policy pi(a | s, g). Input layout is [s || g]; the head is
// categorical for discrete action spaces and an MDN (anchored at zero) for
// continuous ones.
struct Policy {
    DenseNet net;
    ActionSpaceSpec action_space;
    int state_dim = 0;
    MdnSpec mdn; // continuous head only

    static Policy make_discrete(int state_dim, int n_actions, const std::vector<int>& hidden,
                                std::mt19937_64& rng);
    static Policy make_continuous(int state_dim, int action_dim, double max_norm, int n_modes,
                                  const std::vector<int>& hidden, std::mt19937_64& rng);

    // Raw head output for one (s, g) query.
    std::vector<double> head_raw(const StateVec& s, const StateVec& g) const;

    // greedy: argmax logit (discrete) or mean of the argmax-logit mode
    // (continuous). Otherwise samples from the policy distribution.
    Action act(const StateVec& s, const StateVec& g, std::mt19937_64& rng, bool greedy) const;
};

// One Adam step on the mean action NLL of the batch; returns the pre-step
// mean loss. Throws std::runtime_error on non-finite loss.
double gcsl_train_step(Policy& policy, const std::vector<GcslSample>& batch, AdamState& opt,
                       std::optional<double> clip_norm = std::nullopt);

} // namespace trail
