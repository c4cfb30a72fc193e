#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <ostream>
#include <random>
#include <utility>
#include <vector>

#include "trail/env.hpp"
#include "trail/types.hpp"

namespace trail {

// Hindsight-relabeled policy target: take action a in state s to reach g,
// which was visited gap steps later in the source trajectory.
struct GcslSample {
    StateVec s;
    Action a;
    StateVec g;
    int gap = 0;
};

// Sub-goal target: m was visited at relative position t between s and g.
struct TrailSample {
    StateVec s;
    StateVec g;
    StateVec m;
    double t = 0.0;
};

// Removes consecutive duplicate states (and the action leading into each
// duplicate) until no adjacent pair is equal.
Trajectory trim(const Trajectory& traj, double eps = 1e-9);

// Episode ring buffer with FIFO eviction. Trajectories are trimmed on push
// unless post-processing is disabled; single-state episodes are skipped.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 2000, bool post_process = true);

    void push(Trajectory traj);
    std::size_t size() const { return episodes_.size(); }
    bool empty() const { return episodes_.empty(); }
    std::uint64_t skipped() const { return skipped_; }
    std::size_t capacity() const { return capacity_; }
    const Trajectory& at(std::size_t i) const { return episodes_[i]; }

private:
    std::size_t capacity_;
    bool post_process_;
    std::deque<Trajectory> episodes_;
    std::uint64_t skipped_ = 0;
};

// Hindsight draws per the GCSL scheme: episode uniform, i ~ U(1, T-1),
// j ~ U(i+1, T) with T the episode's own state count (1-based indexing).
std::vector<GcslSample> sample_gcsl(const ReplayBuffer& buffer, std::size_t n,
                                    std::mt19937_64& rng);

// Extends the GCSL draw with k ~ U(i, j); m = state at k, t = (k-i)/(j-i).
std::vector<TrailSample> sample_trail(const ReplayBuffer& buffer, std::size_t n,
                                      std::mt19937_64& rng);

// Ordered within-trajectory (s, g) pairs sharing the GCSL (tau, i, j) scheme.
std::vector<std::pair<StateVec, StateVec>> sample_pairs(const ReplayBuffer& buffer, std::size_t n,
                                                        std::mt19937_64& rng);

// Empirical gap distribution over n_samples GCSL draws; result[g] is the
// probability of gap g (index 0 unused).
std::vector<double> gap_histogram(const ReplayBuffer& buffer, std::size_t n_samples,
                                  std::mt19937_64& rng);

// Exact per-gap probabilities implied by the buffer contents.
std::vector<double> analytic_gap_distribution(const ReplayBuffer& buffer);

// Probability that a hindsight update targets a goal exactly K steps away,
// given the distribution of trajectory-suffix lengths: sum_{k>=K} p_k / k.
double analytic_u_k(const std::map<int, double>& length_dist, int K);

// One JSON episode per line, for offline inspection.
void append_episode_log(std::ostream& out, const Trajectory& traj, bool success);

} // namespace trail
