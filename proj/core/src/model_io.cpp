#include "trail/model_io.hpp"

#include <stdexcept>
#include <string>

namespace trail {

namespace {

DenseNet net_from(const Checkpoint& ckpt) {
    DenseNet net(ckpt.dims);
    if (net.n_params() != ckpt.params.size())
        throw std::invalid_argument("checkpoint param count " +
                                    std::to_string(ckpt.params.size()) +
                                    " does not match dims (need " +
                                    std::to_string(net.n_params()) + ")");
    net.params() = ckpt.params;
    return net;
}

} // namespace

Checkpoint policy_checkpoint(const Policy& policy) {
    Checkpoint ckpt;
    ckpt.kind = "policy";
    ckpt.dims = policy.net.dims();
    ckpt.params = policy.net.params();
    if (policy.action_space.kind == ActionSpaceSpec::Kind::Discrete) {
        ckpt.head = "categorical";
    } else {
        ckpt.head = "mdn";
        ckpt.mdn_k = policy.mdn.n_modes;
        ckpt.mdn_d = policy.mdn.dim;
    }
    return ckpt;
}

Policy policy_from_checkpoint(const Checkpoint& ckpt, const ActionSpaceSpec& action_space) {
    if (ckpt.kind != "policy")
        throw std::invalid_argument("expected a policy checkpoint, got kind=" + ckpt.kind);
    Policy policy{net_from(ckpt), action_space, ckpt.dims.front() / 2, {}};
    if (action_space.kind == ActionSpaceSpec::Kind::Discrete) {
        if (ckpt.head != "categorical")
            throw std::invalid_argument("discrete action space needs a categorical head, got " +
                                        ckpt.head);
        if (ckpt.dims.back() != action_space.n_actions)
            throw std::invalid_argument(
                "checkpoint head size " + std::to_string(ckpt.dims.back()) +
                " vs env action count " + std::to_string(action_space.n_actions));
    } else {
        if (ckpt.head != "mdn")
            throw std::invalid_argument("continuous action space needs an mdn head, got " +
                                        ckpt.head);
        policy.mdn = MdnSpec{ckpt.mdn_k, ckpt.mdn_d};
        if (ckpt.mdn_d != action_space.dim)
            throw std::invalid_argument("checkpoint action dim " + std::to_string(ckpt.mdn_d) +
                                        " vs env action dim " +
                                        std::to_string(action_space.dim));
        if (ckpt.dims.back() != policy.mdn.raw_size())
            throw std::invalid_argument("checkpoint output size " +
                                        std::to_string(ckpt.dims.back()) +
                                        " vs mdn raw size " +
                                        std::to_string(policy.mdn.raw_size()));
    }
    return policy;
}

Checkpoint encoder_checkpoint(const TrajectoryEncoder& enc) {
    Checkpoint ckpt;
    ckpt.kind = "encoder";
    ckpt.head = "mdn";
    ckpt.dims = enc.net().dims();
    ckpt.mdn_k = enc.mdn().n_modes;
    ckpt.mdn_d = enc.mdn().dim;
    ckpt.params = enc.net().params();
    return ckpt;
}

TrajectoryEncoder encoder_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.kind != "encoder")
        throw std::invalid_argument("expected an encoder checkpoint, got kind=" + ckpt.kind);
    if (ckpt.head != "mdn")
        throw std::invalid_argument("encoder checkpoints use an mdn head, got " + ckpt.head);
    const int state_dim = (ckpt.dims.front() - 1) / 2;
    if (2 * state_dim + 1 != ckpt.dims.front() || ckpt.mdn_d != state_dim)
        throw std::invalid_argument("encoder checkpoint input dim " +
                                    std::to_string(ckpt.dims.front()) +
                                    " inconsistent with mdn dim " + std::to_string(ckpt.mdn_d));
    return TrajectoryEncoder(state_dim, MdnSpec{ckpt.mdn_k, ckpt.mdn_d}, net_from(ckpt));
}

} // namespace trail
