#pragma once

#include <optional>
#include <random>
#include <utility>

#include "trail/adam.hpp"
#include "trail/heads.hpp"
#include "trail/net.hpp"
#include "trail/policy.hpp"
#include "trail/replay.hpp"
#include "trail/types.hpp"

namespace trail {

// Minimal surface needed by mode selection and the consistency losses; lets
// tests substitute hard-wired encoders (e.g. an exact linear interpolator).
class SubgoalModel {
public:
    virtual ~SubgoalModel() = default;
    virtual int n_modes() const = 0;
    // argmax-logit mode of the query (s, g, t), lowest index on ties
    virtual int top_mode(const StateVec& s, const StateVec& g, double t) const = 0;
    virtual StateVec mode_mean(const StateVec& s, const StateVec& g, double t, int k) const = 0;
};

// Trajectory encoder pi_S(m | s, g, t): input layout [s || g || t], MDN head
// with mode means anchored at s.
class TrajectoryEncoder : public SubgoalModel {
public:
    TrajectoryEncoder(int state_dim, int n_modes, const std::vector<int>& hidden,
                      std::mt19937_64& rng);
    TrajectoryEncoder(int state_dim, MdnSpec mdn, DenseNet net); // from checkpoint

    int n_modes() const override { return mdn_.n_modes; }
    int top_mode(const StateVec& s, const StateVec& g, double t) const override;
    StateVec mode_mean(const StateVec& s, const StateVec& g, double t, int k) const override;
    StateVec sample(const StateVec& s, const StateVec& g, double t, std::mt19937_64& rng,
                    std::optional<int> mode = std::nullopt) const;

    std::vector<double> raw_at(const StateVec& s, const StateVec& g, double t) const;

    int state_dim() const { return state_dim_; }
    const MdnSpec& mdn() const { return mdn_; }
    DenseNet& net() { return net_; }
    const DenseNet& net() const { return net_; }

    std::vector<double> batch_input(const std::vector<TrailSample>& batch) const;

private:
    int state_dim_;
    MdnSpec mdn_;
    DenseNet net_;
};

struct TrailLossConfig {
    double alpha_edge = 0.01;
    double alpha_sc = 0.01;
    int n_modes = 2;
};

struct TrailLosses {
    double total = 0.0;
    double sub = 0.0;
    double edge = 0.0;
    double sc = 0.0;
};

// Mean MDN NLL of m given (s, g, t). Accumulates the mean-loss gradient into
// `grad` when non-null.
double subgoal_loss(const TrajectoryEncoder& enc, const std::vector<TrailSample>& batch,
                    std::vector<double>* grad = nullptr);

// ||mu_{k*}(s,g,0) - s||^2 + ||mu_{k*}(s,g,1) - g||^2, mean over pairs; k* is
// the argmax-logit mode at each t, held constant for the gradient.
double edge_loss(const TrajectoryEncoder& enc,
                 const std::vector<std::pair<StateVec, StateVec>>& pairs,
                 std::vector<double>* grad = nullptr);

// Same loss with externally fixed mode selections (finite-difference checks
// perturb parameters without flipping the argmax).
double edge_loss_fixed(const TrajectoryEncoder& enc,
                       const std::vector<std::pair<StateVec, StateVec>>& pairs,
                       const std::vector<int>& modes_t0, const std::vector<int>& modes_t1,
                       std::vector<double>* grad = nullptr);

// ||mu_{k'}(s,g,t1*t2) - m2||^2 with m2 = mu_{k'}(s, mu_{k'}(s,g,t1), t2) held
// as a constant target; k' = top mode at (s,g,t1); t1,t2 ~ U(0,1) per pair.
double self_consistency_loss(const TrajectoryEncoder& enc,
                             const std::vector<std::pair<StateVec, StateVec>>& pairs,
                             std::mt19937_64& rng, std::vector<double>* grad = nullptr);

// Fixed-selection core: modes, t draws and targets supplied by the caller.
double self_consistency_loss_fixed(const TrajectoryEncoder& enc,
                                   const std::vector<std::pair<StateVec, StateVec>>& pairs,
                                   const std::vector<int>& modes,
                                   const std::vector<std::pair<double, double>>& ts,
                                   const std::vector<StateVec>& targets,
                                   std::vector<double>* grad = nullptr);

// Value-only variants over any SubgoalModel (consistency null checks).
double edge_loss_value(const SubgoalModel& model,
                       const std::vector<std::pair<StateVec, StateVec>>& pairs);
double self_consistency_value(const SubgoalModel& model,
                              const std::vector<std::pair<StateVec, StateVec>>& pairs,
                              const std::vector<std::pair<double, double>>& ts);

// One Adam step on J_sub + alpha_edge*J_edge + alpha_sc*J_sc, each component
// on an independent batch draw from the buffer. Zero-weight components are
// skipped entirely (no RNG consumption).
TrailLosses trail_train_step(TrajectoryEncoder& enc, const ReplayBuffer& buffer,
                             const TrailLossConfig& cfg, AdamState& opt, std::size_t batch_size,
                             std::mt19937_64& rng,
                             std::optional<double> clip_norm = std::nullopt);

// Mode whose t=0 mean is nearest s and t=1 mean nearest g (combined squared
// distance, lowest index on ties).
int best_mode(const SubgoalModel& model, const StateVec& s, const StateVec& g);
int best_mode_from_raw(const MdnSpec& spec, const double* raw_t0, const double* raw_t1,
                       const StateVec& s, const StateVec& g);

// Sub-goal-mediated action selection: t = max(0.5, (i+1)/T), k = best mode,
// m = mode mean (or a sample when stochastic), a = pi(s, m).
Action get_action(const Policy& policy, const TrajectoryEncoder& enc, const StateVec& s,
                  const StateVec& g, int i, int T, std::mt19937_64& rng, bool stochastic);

} // namespace trail
