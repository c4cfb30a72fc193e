#pragma once

#include <cstdint>
#include <variant>
#include <vector>

namespace trail {

// Normalized observation: every component lies in [-1, 1].
using StateVec = std::vector<double>;

// Discrete action index or continuous displacement command.
using Action = std::variant<int, std::vector<double>>;

struct ActionSpaceSpec {
    enum class Kind { Discrete, Continuous };
    Kind kind = Kind::Discrete;
    int n_actions = 0;     // discrete
    int dim = 0;           // continuous
    double max_norm = 0.0; // continuous command clip
};

struct GoalEnvSpec {
    int state_dim = 0;
    ActionSpaceSpec action_space;
    int horizon = 0;
    double goal_tolerance = 0.0; // exact-match (0) for discrete
};

struct GoalQuery {
    StateVec start;
    StateVec goal;
    std::int64_t id = 0;
};

} // namespace trail
