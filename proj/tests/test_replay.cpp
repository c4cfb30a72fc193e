#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "trail/replay.hpp"

using namespace trail;

namespace {

Trajectory make_traj(const std::vector<double>& xs) {
    Trajectory t;
    for (double x : xs) t.states.push_back({x});
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) t.actions.push_back(static_cast<int>(i));
    return t;
}

// Straight-line trajectory 0,1,...,len-1 (always length `len` states).
Trajectory line_traj(int len) {
    std::vector<double> xs;
    for (int i = 0; i < len; ++i) xs.push_back(i);
    return make_traj(xs);
}

} // namespace

TEST_CASE("trim removes duplicates and their incoming actions") {
    Trajectory t = make_traj({0, 1, 1, 2}); // actions 0,1,2
    Trajectory r = trim(t);
    REQUIRE(r.states.size() == 3);
    CHECK(r.states[0][0] == 0);
    CHECK(r.states[1][0] == 1);
    CHECK(r.states[2][0] == 2);
    REQUIRE(r.actions.size() == 2);
    CHECK(std::get<int>(r.actions[0]) == 0);
    CHECK(std::get<int>(r.actions[1]) == 2); // action into the duplicate dropped
}

TEST_CASE("trim: identity on clean input, full collapse, idempotence") {
    Trajectory clean = make_traj({0, 1, 2});
    Trajectory r = trim(clean);
    CHECK(r.states == clean.states);
    CHECK(r.actions.size() == clean.actions.size());

    Trajectory all_same = make_traj({3, 3, 3});
    Trajectory c = trim(all_same);
    CHECK(c.states.size() == 1);
    CHECK(c.actions.empty());

    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 2000; ++rep) {
        std::vector<double> xs;
        const int len = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < len; ++i) xs.push_back(static_cast<double>(rng() % 3));
        Trajectory once = trim(make_traj(xs));
        Trajectory twice = trim(once);
        CHECK(once.states == twice.states);
        CHECK(once.actions.size() == once.states.size() - 1);
        for (std::size_t i = 0; i + 1 < once.states.size(); ++i)
            CHECK(once.states[i] != once.states[i + 1]);
    }
}

TEST_CASE("trim uses a tolerance for continuous duplicates") {
    Trajectory t;
    t.states = {{0.5}, {0.5 + 1e-12}, {0.7}};
    t.actions = {std::vector<double>{0.0}, std::vector<double>{0.2}};
    Trajectory r = trim(t);
    CHECK(r.states.size() == 2);
}

TEST_CASE("push: FIFO eviction, trimming, skip counter") {
    ReplayBuffer buf(3);
    for (int i = 0; i < 5; ++i) {
        Trajectory t = make_traj({static_cast<double>(i), static_cast<double>(i + 1)});
        buf.push(t);
    }
    CHECK(buf.size() == 3);
    CHECK(buf.at(0).states[0][0] == 2); // oldest two evicted

    buf.push(make_traj({9, 9, 10})); // stored trimmed
    CHECK(buf.at(2).states.size() == 2);

    const auto skipped_before = buf.skipped();
    buf.push(make_traj({4, 4, 4})); // collapses to one state
    CHECK(buf.size() == 3);
    CHECK(buf.skipped() == skipped_before + 1);
}

TEST_CASE("push without post-processing keeps duplicates") {
    ReplayBuffer buf(4, /*post_process=*/false);
    buf.push(make_traj({0, 1, 1, 2}));
    CHECK(buf.at(0).states.size() == 4);
}

TEST_CASE("samplers reject an empty buffer") {
    ReplayBuffer buf(4);
    std::mt19937_64 rng(0);
    CHECK_THROWS_AS(sample_gcsl(buf, 1, rng), std::runtime_error);
    CHECK_THROWS_AS(sample_trail(buf, 1, rng), std::runtime_error);
    CHECK_THROWS_AS(sample_pairs(buf, 1, rng), std::runtime_error);
}

TEST_CASE("gap distribution on fixed-length-5 trajectories matches enumeration") {
    ReplayBuffer buf(8);
    for (int i = 0; i < 8; ++i) buf.push(line_traj(5));
    std::mt19937_64 rng(2);
    const int n = 400000;
    const auto samples = sample_gcsl(buf, n, rng);
    std::map<int, int> counts;
    for (const auto& s : samples) counts[s.gap]++;
    // Exact enumeration: i ~ U(1,4), j ~ U(i+1,5) => P(gap) over {1,2,3,4}
    const double want[5] = {0.0, 25.0 / 48, 13.0 / 48, 7.0 / 48, 1.0 / 16};
    for (int g = 1; g <= 4; ++g)
        CHECK(static_cast<double>(counts[g]) / n == doctest::Approx(want[g]).epsilon(0.02));
    // analytic enumeration helper agrees exactly
    const auto analytic = analytic_gap_distribution(buf);
    REQUIRE(analytic.size() >= 5);
    for (int g = 1; g <= 4; ++g) CHECK(analytic[g] == doctest::Approx(want[g]).epsilon(1e-12));
}

TEST_CASE("length-2 trajectories admit only gap-1 samples onto the final state") {
    ReplayBuffer buf(2);
    buf.push(line_traj(2));
    std::mt19937_64 rng(3);
    for (const auto& s : sample_gcsl(buf, 200, rng)) {
        CHECK(s.gap == 1);
        CHECK(s.s[0] == 0.0);
        CHECK(s.g[0] == 1.0);
    }
}

TEST_CASE("sample_trail endpoints and interior arithmetic") {
    ReplayBuffer buf(4);
    for (int i = 0; i < 4; ++i) buf.push(line_traj(7));
    std::mt19937_64 rng(4);
    bool saw_zero = false, saw_one = false, saw_interior = false;
    for (const auto& s : sample_trail(buf, 5000, rng)) {
        CHECK(s.t >= 0.0);
        CHECK(s.t <= 1.0);
        if (s.t == 0.0) {
            CHECK(s.m == s.s);
            saw_zero = true;
        } else if (s.t == 1.0) {
            CHECK(s.m == s.g);
            saw_one = true;
        } else {
            // m must sit at fraction t along [s, g] of this straight-line data
            CHECK(s.m[0] == doctest::Approx(s.s[0] + s.t * (s.g[0] - s.s[0])).epsilon(1e-12));
            saw_interior = true;
        }
    }
    CHECK(saw_zero);
    CHECK(saw_one);
    CHECK(saw_interior);
}

TEST_CASE("sample_pairs preserves within-trajectory ordering") {
    ReplayBuffer buf(4);
    for (int i = 0; i < 4; ++i) buf.push(line_traj(6));
    std::mt19937_64 rng(5);
    for (const auto& [s, g] : sample_pairs(buf, 2000, rng)) CHECK(s[0] < g[0]);

    ReplayBuffer two(1);
    two.push(line_traj(2));
    for (const auto& [s, g] : sample_pairs(two, 50, rng)) {
        CHECK(s[0] == 0.0);
        CHECK(g[0] == 1.0);
    }
}

TEST_CASE("gap_histogram sums to one and matches bin(1) on fixed-length-5 data") {
    ReplayBuffer buf(8);
    for (int i = 0; i < 8; ++i) buf.push(line_traj(5));
    std::mt19937_64 rng(6);
    const auto hist = gap_histogram(buf, 200000, rng);
    double sum = 0.0;
    for (double p : hist) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hist[1] == doctest::Approx(25.0 / 48).epsilon(0.02));
    for (std::size_t g = 1; g + 1 < hist.size(); ++g) CHECK(hist[g] >= hist[g + 1]);

    ReplayBuffer two(4);
    for (int i = 0; i < 4; ++i) two.push(line_traj(2));
    const auto h2 = gap_histogram(two, 1000, rng);
    CHECK(h2[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("analytic_u_k: Eq. 3 hand values, monotone differences, tail zero") {
    // suffix lengths uniform over {1..4} as in fixed T=5 episodes
    std::map<int, double> p{{1, 0.25}, {2, 0.25}, {3, 0.25}, {4, 0.25}};
    CHECK(analytic_u_k(p, 1) == doctest::Approx(25.0 / 48).epsilon(1e-12));
    for (int k = 1; k <= 4; ++k) {
        const double diff = analytic_u_k(p, k) - analytic_u_k(p, k + 1);
        CHECK(diff == doctest::Approx(p[k] / k).epsilon(1e-12));
        CHECK(diff >= 0.0);
    }
    CHECK(analytic_u_k(p, 5) == 0.0);
}

TEST_CASE("episode log emits one JSON line per episode") {
    std::ostringstream out;
    append_episode_log(out, line_traj(3), true);
    append_episode_log(out, line_traj(2), false);
    std::istringstream in(out.str());
    std::string l1, l2, rest;
    CHECK(std::getline(in, l1));
    CHECK(std::getline(in, l2));
    CHECK(!std::getline(in, rest));
    CHECK(l1.find("\"success\":true") != std::string::npos);
    CHECK(l2.find("\"success\":false") != std::string::npos);
}
