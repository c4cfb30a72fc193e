#pragma once

#include "trail/checkpoint.hpp"
#include "trail/encoder.hpp"
#include "trail/policy.hpp"

namespace trail {

Checkpoint policy_checkpoint(const Policy& policy);
// The action space (from the target env) supplies what the header does not
// carry: discrete vs continuous and the command clip. Dim mismatches throw
// std::invalid_argument naming both sides.
Policy policy_from_checkpoint(const Checkpoint& ckpt, const ActionSpaceSpec& action_space);

Checkpoint encoder_checkpoint(const TrajectoryEncoder& enc);
TrajectoryEncoder encoder_from_checkpoint(const Checkpoint& ckpt);

} // namespace trail
