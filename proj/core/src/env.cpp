#include "trail/env.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "trail/io.hpp"

namespace trail {

namespace {
// Action order fixed everywhere: up, down, left, right.
constexpr int kDx[4] = {0, 0, -1, 1};
constexpr int kDy[4] = {-1, 1, 0, 0};
} // namespace

// --- GoalEnv ---

std::pair<StateVec, StateVec> GoalEnv::reset() {
    auto [s, g] = sample_query(rng_);
    state_ = s;
    goal_ = g;
    has_state_ = true;
    absorbed_ = false;
    return {state_, goal_};
}

std::pair<StateVec, StateVec> GoalEnv::reset(const GoalQuery& query) {
    if (static_cast<int>(query.start.size()) != spec_.state_dim ||
        static_cast<int>(query.goal.size()) != spec_.state_dim) {
        throw std::invalid_argument("query dimension mismatch");
    }
    if (!valid_state(query.start)) throw std::invalid_argument("query start is not a valid state");
    if (!valid_state(query.goal)) throw std::invalid_argument("query goal is not a valid state");
    if (is_success(query.start, query.goal)) {
        throw std::invalid_argument("query start already satisfies the goal");
    }
    state_ = query.start;
    goal_ = query.goal;
    has_state_ = true;
    absorbed_ = false;
    return {state_, goal_};
}

StateVec GoalEnv::step(const Action& a) {
    if (!has_state_) throw std::logic_error("step before reset");
    if (absorbed_ || is_success(state_, goal_)) {
        absorbed_ = true;
        return state_;
    }
    state_ = step_impl(a);
    if (is_success(state_, goal_)) absorbed_ = true;
    return state_;
}

// --- GridLayout ---

GridLayout::GridLayout(int width, int height, std::uint64_t seed)
    : width_(width), height_(height), seed_(seed),
      cells_(static_cast<std::size_t>(width) * height, Wall) {
    if (width < 1 || height < 1) throw std::invalid_argument("layout size must be positive");
}

int GridLayout::n_doors() const {
    int n = 0;
    for (auto c : cells_)
        if (c == Door) ++n;
    return n;
}

std::vector<Cell> GridLayout::free_cells() const {
    std::vector<Cell> out;
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x)
            if (at(x, y) != Wall) out.push_back({x, y});
    return out;
}

void GridLayout::check_connectivity() const {
    auto free = free_cells();
    if (free.empty()) throw std::logic_error("layout has no free cells");
    std::vector<std::uint8_t> seen(cells_.size(), 0);
    std::deque<Cell> queue{free.front()};
    seen[static_cast<std::size_t>(free.front().y) * width_ + free.front().x] = 1;
    std::size_t count = 0;
    while (!queue.empty()) {
        Cell c = queue.front();
        queue.pop_front();
        ++count;
        for (int a = 0; a < 4; ++a) {
            int nx = c.x + kDx[a], ny = c.y + kDy[a];
            if (!passable(nx, ny)) continue;
            auto idx = static_cast<std::size_t>(ny) * width_ + nx;
            if (!seen[idx]) {
                seen[idx] = 1;
                queue.push_back({nx, ny});
            }
        }
    }
    if (count != free.size()) throw std::logic_error("layout is not connected");
}

std::string GridLayout::render() const {
    std::string out;
    out.reserve(static_cast<std::size_t>(height_) * (width_ + 1));
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            CellType t = at(x, y);
            out += t == Wall ? '#' : (t == Door ? 'D' : '.');
        }
        out += '\n';
    }
    return out;
}

// --- GridEnv ---

GridEnv::GridEnv(GridLayout layout, int horizon, std::uint64_t seed)
    : layout_(std::move(layout)) {
    layout_.check_connectivity();
    free_cells_ = layout_.free_cells();
    if (free_cells_.size() < 2) throw std::invalid_argument("need at least two free cells");
    spec_.state_dim = 2;
    spec_.action_space.kind = ActionSpaceSpec::Kind::Discrete;
    spec_.action_space.n_actions = 4;
    spec_.horizon = horizon;
    spec_.goal_tolerance = 0.0;
    rng_.seed(seed);
}

Cell GridEnv::to_cell(const StateVec& s) const {
    return {static_cast<int>(std::llround((s[0] + 1.0) * 0.5 * (layout_.width() - 1))),
            static_cast<int>(std::llround((s[1] + 1.0) * 0.5 * (layout_.height() - 1)))};
}

StateVec GridEnv::to_state(Cell c) const {
    return {-1.0 + 2.0 * c.x / (layout_.width() - 1), -1.0 + 2.0 * c.y / (layout_.height() - 1)};
}

bool GridEnv::is_success(const StateVec& s, const StateVec& g) const {
    return to_cell(s) == to_cell(g);
}

bool GridEnv::valid_state(const StateVec& s) const {
    if (s.size() != 2) return false;
    Cell c = to_cell(s);
    return layout_.passable(c.x, c.y);
}

std::unique_ptr<GoalEnv> GridEnv::clone() const {
    return std::make_unique<GridEnv>(*this);
}

std::pair<StateVec, StateVec> GridEnv::sample_query(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, free_cells_.size() - 1);
    Cell start = free_cells_[pick(rng)];
    Cell goal = start;
    while (goal == start) goal = free_cells_[pick(rng)];
    return {to_state(start), to_state(goal)};
}

StateVec GridEnv::step_impl(const Action& a) {
    int idx = std::get<int>(a);
    if (idx < 0 || idx >= 4) throw std::out_of_range("discrete action out of range");
    Cell c = to_cell(state_);
    int nx = c.x + kDx[idx], ny = c.y + kDy[idx];
    if (layout_.passable(nx, ny)) return to_state({nx, ny});
    return state_;
}

// --- factories ---

GridEnv make_discrete_rooms(int rooms_x, int rooms_y, int room_size, std::uint64_t seed,
                            int horizon) {
    if (rooms_x < 1 || rooms_y < 1) throw std::invalid_argument("need at least one room");
    if (room_size < 2) throw std::invalid_argument("room_size must be >= 2");
    const int pitch = room_size + 1;
    GridLayout layout(rooms_x * pitch + 1, rooms_y * pitch + 1, seed);
    for (int y = 0; y < layout.height(); ++y)
        for (int x = 0; x < layout.width(); ++x)
            if (x % pitch != 0 && y % pitch != 0) layout.set(x, y, GridLayout::Free);
    // one door per shared wall segment, uniform over the segment interior
    std::mt19937_64 rng(seed);
    for (int ry = 0; ry < rooms_y; ++ry) {
        for (int rx = 0; rx + 1 < rooms_x; ++rx) { // vertical wall to the right room
            int wx = (rx + 1) * pitch;
            std::uniform_int_distribution<int> pos(ry * pitch + 1, ry * pitch + room_size);
            layout.set(wx, pos(rng), GridLayout::Door);
        }
    }
    for (int ry = 0; ry + 1 < rooms_y; ++ry) { // horizontal wall to the room below
        for (int rx = 0; rx < rooms_x; ++rx) {
            int wy = (ry + 1) * pitch;
            std::uniform_int_distribution<int> pos(rx * pitch + 1, rx * pitch + room_size);
            layout.set(pos(rng), wy, GridLayout::Door);
        }
    }
    return GridEnv(std::move(layout), horizon, seed);
}

GridEnv make_double_spiral(std::uint64_t seed, int horizon) {
    // Two interleaved rectangular spiral arms on a 33x33 grid. Arm B is arm A
    // rotated 180 degrees about cell (16,16), truncated at (29,29), and joined
    // to arm A's outer end by a short connector at the bottom-right. The result
    // is a single corridor: two endpoint cells, all other cells of degree 2.
    const int size = 33;
    GridLayout layout(size, size, seed);
    auto carve = [&layout](int x, int y) { layout.set(x, y, GridLayout::Free); };
    int x = 15, y = 15;
    carve(x, y);
    carve(32 - x, 32 - y);
    bool truncated_b = false;
    int dir = 3; // right (walk order: E, S, W, N)
    static constexpr int wx[4] = {0, 0, -1, 1};
    static constexpr int wy[4] = {-1, 1, 0, 0};
    static constexpr int order[4] = {3, 1, 2, 0}; // E, S, W, N cycle
    int seg_len = 4;
    for (int seg = 0; seg < 14; ++seg) {
        dir = order[seg % 4];
        for (int i = 0; i < seg_len; ++i) {
            int nx = x + wx[dir], ny = y + wy[dir];
            if (nx < 0 || nx >= size || ny < 0 || ny >= size) goto done;
            x = nx;
            y = ny;
            carve(x, y);
            if (!truncated_b) {
                carve(32 - x, 32 - y);
                if (32 - x == 29 && 32 - y == 29) truncated_b = true;
            }
        }
        if (seg % 2 == 1) seg_len += 4;
    }
done:
    carve(30, 31);
    carve(29, 31);
    carve(29, 30);
    return GridEnv(std::move(layout), horizon, seed);
}

ContinuousRoomsEnv make_continuous_rooms(double noise_sigma, std::uint64_t seed,
                                         double door_width, int horizon) {
    return ContinuousRoomsEnv(noise_sigma, seed, door_width, horizon);
}

// --- ContinuousRoomsEnv ---

ContinuousRoomsEnv::ContinuousRoomsEnv(double noise_sigma, std::uint64_t seed, double door_width,
                                       int horizon)
    : noise_sigma_(noise_sigma), door_width_(door_width) {
    if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
    if (door_width <= 0.0 || door_width >= 1.0) throw std::invalid_argument("bad door width");
    spec_.state_dim = 2;
    spec_.action_space.kind = ActionSpaceSpec::Kind::Continuous;
    spec_.action_space.dim = 2;
    spec_.action_space.max_norm = 0.1;
    spec_.horizon = horizon;
    spec_.goal_tolerance = 0.2;
    rng_.seed(seed);
    // four shared wall segments, door position uniform over the segment interior
    std::mt19937_64 door_rng(seed ^ 0x9e3779b97f4a7c15ull);
    const double margin = door_width / 2 + 0.05;
    auto add = [&](int axis, double lo, double hi) {
        std::uniform_real_distribution<double> pos(lo + margin, hi - margin);
        double center = pos(door_rng);
        walls_.push_back({axis, lo, hi, center - door_width / 2, center + door_width / 2});
    };
    add(0, -1.0, 0.0); // x==0, lower half
    add(0, 0.0, 1.0);  // x==0, upper half
    add(1, -1.0, 0.0); // y==0, left half
    add(1, 0.0, 1.0);  // y==0, right half
}

bool ContinuousRoomsEnv::is_success(const StateVec& s, const StateVec& g) const {
    double dx = s[0] - g[0], dy = s[1] - g[1];
    return std::sqrt(dx * dx + dy * dy) <= spec_.goal_tolerance;
}

bool ContinuousRoomsEnv::valid_state(const StateVec& s) const {
    return s.size() == 2 && s[0] >= -1.0 && s[0] <= 1.0 && s[1] >= -1.0 && s[1] <= 1.0;
}

std::unique_ptr<GoalEnv> ContinuousRoomsEnv::clone() const {
    return std::make_unique<ContinuousRoomsEnv>(*this);
}

std::pair<StateVec, StateVec> ContinuousRoomsEnv::sample_query(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    StateVec start{u(rng), u(rng)};
    StateVec goal{u(rng), u(rng)};
    while (is_success(start, goal)) goal = {u(rng), u(rng)};
    return {start, goal};
}

bool ContinuousRoomsEnv::crosses(const double* p, const double* d, int axis) const {
    // does the straight move p -> p+d cross the wall line of `axis` outside a door?
    double a = p[axis], da = d[axis];
    if (da == 0.0) return false;
    if ((a >= 0.0) == (a + da >= 0.0)) return false; // same side, no crossing
    double t = -a / da;
    double other = p[1 - axis] + d[1 - axis] * t;
    for (const auto& w : walls_) {
        if (w.axis != axis) continue;
        if (other < w.seg_lo || other > w.seg_hi) continue;
        return other < w.door_lo || other > w.door_hi;
    }
    return false;
}

StateVec ContinuousRoomsEnv::step_impl(const Action& a) {
    const auto& cmd = std::get<std::vector<double>>(a);
    if (cmd.size() != 2) throw std::invalid_argument("continuous action must have dim 2");
    double dx = cmd[0], dy = cmd[1];
    double n = std::sqrt(dx * dx + dy * dy);
    if (n > spec_.action_space.max_norm) {
        dx *= spec_.action_space.max_norm / n;
        dy *= spec_.action_space.max_norm / n;
    }
    if (noise_sigma_ > 0.0) {
        std::normal_distribution<double> noise(0.0, noise_sigma_);
        dx += noise(rng_);
        dy += noise(rng_);
    }
    double p[2] = {state_[0], state_[1]};
    double d[2] = {dx, dy};
    // reject components leaving the unit square
    for (int ax = 0; ax < 2; ++ax)
        if (p[ax] + d[ax] < -1.0 || p[ax] + d[ax] > 1.0) d[ax] = 0.0;
    // reject components crossing an interior wall (x first, then y with updated d)
    if (crosses(p, d, 0)) d[0] = 0.0;
    if (crosses(p, d, 1)) d[1] = 0.0;
    return {p[0] + d[0], p[1] + d[1]};
}

// --- planner ---

Trajectory shortest_path(const GridEnv& env, const StateVec& s, const StateVec& g) {
    if (!env.valid_state(s)) throw std::invalid_argument("invalid start state");
    if (!env.valid_state(g)) throw std::invalid_argument("invalid goal state");
    const auto& layout = env.layout();
    Cell start = env.to_cell(s), goal = env.to_cell(g);
    Trajectory traj;
    if (start == goal) {
        traj.states.push_back(env.to_state(start));
        return traj;
    }
    const int w = layout.width();
    auto key = [w](Cell c) { return c.y * w + c.x; };
    std::vector<int> parent_action(static_cast<std::size_t>(w) * layout.height(), -1);
    std::vector<int> parent_cell(parent_action.size(), -1);
    std::deque<Cell> queue{start};
    parent_action[key(start)] = 4; // visited marker for the root
    bool found = false;
    while (!queue.empty() && !found) {
        Cell c = queue.front();
        queue.pop_front();
        for (int a = 0; a < 4; ++a) {
            int nx = c.x + kDx[a], ny = c.y + kDy[a];
            if (!layout.passable(nx, ny)) continue;
            Cell nc{nx, ny};
            if (parent_action[key(nc)] != -1) continue;
            parent_action[key(nc)] = a;
            parent_cell[key(nc)] = key(c);
            if (nc == goal) {
                found = true;
                break;
            }
            queue.push_back(nc);
        }
    }
    if (!found) throw std::runtime_error("goal unreachable from start");
    std::vector<Cell> cells{goal};
    std::vector<int> acts;
    Cell c = goal;
    while (!(c == start)) {
        acts.push_back(parent_action[key(c)]);
        int pk = parent_cell[key(c)];
        c = {pk % w, pk / w};
        cells.push_back(c);
    }
    std::reverse(cells.begin(), cells.end());
    std::reverse(acts.begin(), acts.end());
    for (Cell cc : cells) traj.states.push_back(env.to_state(cc));
    for (int a : acts) traj.actions.emplace_back(a);
    return traj;
}

// --- query I/O ---

void save_queries(const std::string& path, const std::vector<GoalQuery>& queries) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    if (queries.empty()) {
        out << "id\n";
        return;
    }
    std::size_t dim = queries.front().start.size();
    out << "id";
    for (std::size_t i = 0; i < dim; ++i) out << ",start" << i;
    for (std::size_t i = 0; i < dim; ++i) out << ",goal" << i;
    out << "\n";
    for (const auto& q : queries) {
        out << q.id;
        for (double v : q.start) out << ',' << fmt_real(v);
        for (double v : q.goal) out << ',' << fmt_real(v);
        out << "\n";
    }
}

std::vector<GoalQuery> load_queries(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty query file: " + path);
    std::size_t n_cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (n_cols < 3 || n_cols % 2 == 0) throw std::runtime_error("bad query header in " + path);
    std::size_t dim = (n_cols - 1) / 2;
    std::vector<GoalQuery> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        GoalQuery q;
        std::getline(ss, field, ',');
        q.id = std::stoll(field);
        for (std::size_t i = 0; i < 2 * dim; ++i) {
            if (!std::getline(ss, field, ',')) throw std::runtime_error("short query row in " + path);
            (i < dim ? q.start : q.goal).push_back(std::stod(field));
        }
        out.push_back(std::move(q));
    }
    return out;
}

std::unique_ptr<GoalEnv> make_env(const EnvParams& p) {
    if (p.name == "discrete_rooms") {
        return std::make_unique<GridEnv>(
            make_discrete_rooms(p.rooms_x, p.rooms_y, p.room_size, p.seed, p.horizon));
    }
    if (p.name == "large_rooms") {
        return std::make_unique<GridEnv>(make_discrete_rooms(5, 5, 15, p.seed, p.horizon));
    }
    if (p.name == "double_spiral") {
        return std::make_unique<GridEnv>(make_double_spiral(p.seed, p.horizon));
    }
    if (p.name == "continuous_rooms") {
        return std::make_unique<ContinuousRoomsEnv>(
            make_continuous_rooms(p.noise_sigma, p.seed, p.door_width, p.horizon));
    }
    throw std::invalid_argument("unknown env name: " + p.name);
}

} // namespace trail
