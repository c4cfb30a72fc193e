#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "trail/types.hpp"

namespace trail {

// One episode's worth of states and actions (states.size() == actions.size() + 1).
struct Trajectory {
    std::vector<StateVec> states;
    std::vector<Action> actions;
};

class GoalEnv {
public:
    virtual ~GoalEnv() = default;

    const GoalEnvSpec& spec() const { return spec_; }

    // Samples (start, goal) from rho0 using the env's seeded RNG.
    std::pair<StateVec, StateVec> reset();
    // Resets from a frozen query; throws std::invalid_argument on invalid queries.
    std::pair<StateVec, StateVec> reset(const GoalQuery& query);

    // Steps the dynamics. Once the goal has been reached within the episode the
    // state is absorbing and further steps return it unchanged.
    StateVec step(const Action& a);

    virtual bool is_success(const StateVec& s, const StateVec& g) const = 0;
    virtual bool valid_state(const StateVec& s) const = 0;
    virtual std::unique_ptr<GoalEnv> clone() const = 0;

    const StateVec& state() const { return state_; }
    const StateVec& goal() const { return goal_; }

    void reseed(std::uint64_t seed) { rng_.seed(seed); }

protected:
    virtual std::pair<StateVec, StateVec> sample_query(std::mt19937_64& rng) = 0;
    virtual StateVec step_impl(const Action& a) = 0;

    GoalEnvSpec spec_;
    StateVec state_;
    StateVec goal_;
    std::mt19937_64 rng_;
    bool has_state_ = false;
    bool absorbed_ = false;
};

struct Cell {
    int x = 0;
    int y = 0;
    bool operator==(const Cell&) const = default;
};

// Grid of wall / free / door cells. Construction verifies full connectivity
// of the non-wall cells.
class GridLayout {
public:
    enum CellType : std::uint8_t { Wall = 0, Free = 1, Door = 2 };

    GridLayout(int width, int height, std::uint64_t seed);

    int width() const { return width_; }
    int height() const { return height_; }
    std::uint64_t seed() const { return seed_; }
    CellType at(int x, int y) const {
        return static_cast<CellType>(cells_[static_cast<std::size_t>(y) * width_ + x]);
    }
    void set(int x, int y, CellType t) { cells_[static_cast<std::size_t>(y) * width_ + x] = t; }
    bool passable(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_ && at(x, y) != Wall;
    }
    int n_doors() const;
    std::vector<Cell> free_cells() const; // non-wall, row-major order

    void check_connectivity() const; // throws std::logic_error if disconnected

    // `#` wall, `.` free, `D` door.
    std::string render() const;

private:
    int width_;
    int height_;
    std::uint64_t seed_;
    std::vector<std::uint8_t> cells_;
};

// Discrete gridworld with 4 cardinal move actions (0 up, 1 down, 2 left, 3 right).
// A blocked move leaves the state unchanged; success is exact cell equality.
class GridEnv : public GoalEnv {
public:
    GridEnv(GridLayout layout, int horizon, std::uint64_t seed);

    bool is_success(const StateVec& s, const StateVec& g) const override;
    bool valid_state(const StateVec& s) const override;
    std::unique_ptr<GoalEnv> clone() const override;

    const GridLayout& layout() const { return layout_; }
    Cell to_cell(const StateVec& s) const;
    StateVec to_state(Cell c) const;

protected:
    std::pair<StateVec, StateVec> sample_query(std::mt19937_64& rng) override;
    StateVec step_impl(const Action& a) override;

private:
    GridLayout layout_;
    std::vector<Cell> free_cells_;
};

// 2x2 rooms in [-1,1]^2 with continuous positions and displacement actions.
// Commands are clipped to norm <= max_norm before isotropic Gaussian noise is
// added; collisions reject the displacement component crossing a wall.
class ContinuousRoomsEnv : public GoalEnv {
public:
    ContinuousRoomsEnv(double noise_sigma, std::uint64_t seed, double door_width, int horizon);

    bool is_success(const StateVec& s, const StateVec& g) const override;
    bool valid_state(const StateVec& s) const override;
    std::unique_ptr<GoalEnv> clone() const override;

    double noise_sigma() const { return noise_sigma_; }

protected:
    std::pair<StateVec, StateVec> sample_query(std::mt19937_64& rng) override;
    StateVec step_impl(const Action& a) override;

private:
    // A zero-thickness wall segment on line coord==0, open on [door_lo, door_hi].
    struct WallSeg {
        int axis;      // 0: wall line x==0, 1: wall line y==0
        double seg_lo; // extent along the wall
        double seg_hi;
        double door_lo;
        double door_hi;
    };
    bool crosses(const double* p, const double* d, int axis) const;

    double noise_sigma_;
    double door_width_;
    std::vector<WallSeg> walls_;
};

GridEnv make_discrete_rooms(int rooms_x, int rooms_y, int room_size, std::uint64_t seed,
                            int horizon = 50);
GridEnv make_double_spiral(std::uint64_t seed, int horizon = 400);
ContinuousRoomsEnv make_continuous_rooms(double noise_sigma, std::uint64_t seed = 0,
                                         double door_width = 0.2, int horizon = 50);

// Shortest trajectory via BFS with fixed expansion order (up, down, left, right).
// Throws std::invalid_argument for invalid endpoints, std::runtime_error if
// unreachable.
Trajectory shortest_path(const GridEnv& env, const StateVec& s, const StateVec& g);

// Frozen query sets: `id,start...,goal...`, 17 significant digits.
void save_queries(const std::string& path, const std::vector<GoalQuery>& queries);
std::vector<GoalQuery> load_queries(const std::string& path);

// Named env construction for configs and the CLI.
struct EnvParams {
    std::string name; // discrete_rooms | large_rooms | double_spiral | continuous_rooms
    int rooms_x = 3;
    int rooms_y = 3;
    int room_size = 5;
    double noise_sigma = 0.0;
    double door_width = 0.2;
    int horizon = 50;
    std::uint64_t seed = 0;
};
std::unique_ptr<GoalEnv> make_env(const EnvParams& params);

} // namespace trail
