#include "trail/replay.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace trail {

namespace {

bool states_equal(const StateVec& a, const StateVec& b, double eps) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > eps) return false;
    return true;
}

struct IndexDraw {
    const Trajectory* traj;
    int i; // 1-based
    int j;
};

IndexDraw draw_indices(const ReplayBuffer& buffer, std::mt19937_64& rng) {
    if (buffer.empty()) throw std::runtime_error("sampling from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, buffer.size() - 1);
    const Trajectory& traj = buffer.at(pick(rng));
    const int T = static_cast<int>(traj.states.size());
    std::uniform_int_distribution<int> di(1, T - 1);
    int i = di(rng);
    std::uniform_int_distribution<int> dj(i + 1, T);
    int j = dj(rng);
    return {&traj, i, j};
}

} // namespace

Trajectory trim(const Trajectory& traj, double eps) {
    if (traj.states.empty()) throw std::invalid_argument("cannot trim an empty trajectory");
    if (traj.actions.size() + 1 != traj.states.size())
        throw std::invalid_argument("trajectory length mismatch");
    Trajectory out;
    out.states.push_back(traj.states.front());
    for (std::size_t i = 0; i + 1 < traj.states.size(); ++i) {
        if (states_equal(out.states.back(), traj.states[i + 1], eps)) continue;
        out.states.push_back(traj.states[i + 1]);
        out.actions.push_back(traj.actions[i]);
    }
    return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, bool post_process)
    : capacity_(capacity), post_process_(post_process) {
    if (capacity == 0) throw std::invalid_argument("capacity must be positive");
}

void ReplayBuffer::push(Trajectory traj) {
    if (post_process_) traj = trim(traj);
    if (traj.states.size() < 2) {
        ++skipped_;
        return;
    }
    episodes_.push_back(std::move(traj));
    if (episodes_.size() > capacity_) episodes_.pop_front();
}

std::vector<GcslSample> sample_gcsl(const ReplayBuffer& buffer, std::size_t n,
                                    std::mt19937_64& rng) {
    std::vector<GcslSample> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        IndexDraw d = draw_indices(buffer, rng);
        out.push_back({d.traj->states[d.i - 1], d.traj->actions[d.i - 1], d.traj->states[d.j - 1],
                       d.j - d.i});
    }
    return out;
}

std::vector<TrailSample> sample_trail(const ReplayBuffer& buffer, std::size_t n,
                                      std::mt19937_64& rng) {
    std::vector<TrailSample> out;
    out.reserve(n);
    for (std::size_t c = 0; c < n; ++c) {
        IndexDraw d = draw_indices(buffer, rng);
        std::uniform_int_distribution<int> dk(d.i, d.j);
        int k = dk(rng);
        out.push_back({d.traj->states[d.i - 1], d.traj->states[d.j - 1], d.traj->states[k - 1],
                       static_cast<double>(k - d.i) / (d.j - d.i)});
    }
    return out;
}

std::vector<std::pair<StateVec, StateVec>> sample_pairs(const ReplayBuffer& buffer, std::size_t n,
                                                        std::mt19937_64& rng) {
    std::vector<std::pair<StateVec, StateVec>> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        IndexDraw d = draw_indices(buffer, rng);
        out.emplace_back(d.traj->states[d.i - 1], d.traj->states[d.j - 1]);
    }
    return out;
}

std::vector<double> gap_histogram(const ReplayBuffer& buffer, std::size_t n_samples,
                                  std::mt19937_64& rng) {
    std::size_t max_len = 1;
    for (std::size_t e = 0; e < buffer.size(); ++e)
        max_len = std::max(max_len, buffer.at(e).states.size());
    std::vector<double> hist(max_len, 0.0);
    for (std::size_t k = 0; k < n_samples; ++k) {
        IndexDraw d = draw_indices(buffer, rng);
        hist[d.j - d.i] += 1.0;
    }
    for (double& h : hist) h /= static_cast<double>(n_samples);
    return hist;
}

std::vector<double> analytic_gap_distribution(const ReplayBuffer& buffer) {
    if (buffer.empty()) throw std::runtime_error("empty replay buffer");
    std::size_t max_len = 1;
    for (std::size_t e = 0; e < buffer.size(); ++e)
        max_len = std::max(max_len, buffer.at(e).states.size());
    std::vector<double> dist(max_len, 0.0);
    const double per_episode = 1.0 / static_cast<double>(buffer.size());
    for (std::size_t e = 0; e < buffer.size(); ++e) {
        const int T = static_cast<int>(buffer.at(e).states.size());
        for (int i = 1; i <= T - 1; ++i) {
            const double p_i = per_episode / (T - 1);
            for (int g = 1; g <= T - i; ++g) dist[g] += p_i / (T - i);
        }
    }
    return dist;
}

double analytic_u_k(const std::map<int, double>& length_dist, int K) {
    double total = 0.0;
    for (const auto& [len, p] : length_dist) {
        if (p < 0.0) throw std::invalid_argument("negative probability in length distribution");
        if (len >= K && len > 0) total += p / len;
    }
    return total;
}

void append_episode_log(std::ostream& out, const Trajectory& traj, bool success) {
    nlohmann::json j;
    j["states"] = traj.states;
    auto& acts = j["actions"] = nlohmann::json::array();
    for (const auto& a : traj.actions) {
        if (std::holds_alternative<int>(a))
            acts.push_back(std::get<int>(a));
        else
            acts.push_back(std::get<std::vector<double>>(a));
    }
    j["success"] = success;
    out << j.dump() << "\n";
}

} // namespace trail
