#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "trail/policy.hpp"

using namespace trail;

namespace {

GcslSample sample1(std::vector<double> s, int a, std::vector<double> g) {
    return GcslSample{std::move(s), Action{a}, std::move(g), 1};
}

} // namespace

TEST_CASE("uniform (zero-parameter) policy scores ln(n_actions)") {
    std::mt19937_64 rng(1);
    Policy p = Policy::make_discrete(2, 4, {8, 8}, rng);
    for (double& v : p.net.params()) v = 0.0;
    AdamState opt(p.net.n_params());
    const double loss =
        gcsl_train_step(p, {sample1({0.1, 0.2}, 2, {0.3, 0.4})}, opt);
    CHECK(loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("repeated steps memorize a single discrete sample") {
    std::mt19937_64 rng(2);
    Policy p = Policy::make_discrete(2, 4, {16, 16}, rng);
    AdamState opt(p.net.n_params(), 1e-2);
    double loss = 0.0;
    for (int i = 0; i < 400; ++i)
        loss = gcsl_train_step(p, {sample1({0.1, 0.2}, 2, {0.3, 0.4})}, opt);
    CHECK(loss < 1e-2);
    CHECK(std::get<int>(p.act({0.1, 0.2}, {0.3, 0.4}, rng, true)) == 2);
}

TEST_CASE("reported pre-step loss matches an independent evaluation") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        Policy p = Policy::make_discrete(2, 3, {8, 8}, rng);
        std::vector<GcslSample> batch;
        for (int i = 0; i < 5; ++i)
            batch.push_back(sample1({u(rng), u(rng)}, static_cast<int>(rng() % 3),
                                    {u(rng), u(rng)}));
        auto loss_at = [&](const Policy& pol) {
            double total = 0.0;
            for (const auto& s : batch) {
                std::vector<double> raw = pol.head_raw(s.s, s.g);
                total += categorical_nll(raw.data(), 3, std::get<int>(s.a));
            }
            return total / batch.size();
        };
        Policy probe = p;
        AdamState opt(p.net.n_params(), 0.0);
        const double reported = gcsl_train_step(probe, batch, opt);
        CHECK(reported == doctest::Approx(loss_at(p)).epsilon(1e-10));
    }
}

TEST_CASE("continuous policy act: greedy returns the best mode mean") {
    std::mt19937_64 rng(4);
    Policy p = Policy::make_continuous(2, 2, 0.1, 2, {8}, rng);
    std::vector<double> raw = p.head_raw({0.1, 0.2}, {0.3, 0.4});
    const int k = mdn_best_logit_mode(p.mdn, raw.data());
    const std::vector<double> zero(2, 0.0);
    const std::vector<double> want = mdn_mode_mean(p.mdn, raw.data(), zero.data(), k);
    const Action a = p.act({0.1, 0.2}, {0.3, 0.4}, rng, true);
    CHECK(std::get<std::vector<double>>(a) == want);
}

TEST_CASE("greedy discrete action is the argmax logit and shift-invariant") {
    std::mt19937_64 rng(5);
    Policy p = Policy::make_discrete(1, 4, {8}, rng);
    std::vector<double> raw = p.head_raw({0.5}, {-0.5});
    const int want = argmax_lowest_tie(raw.data(), 4);
    CHECK(std::get<int>(p.act({0.5}, {-0.5}, rng, true)) == want);
    // add a constant to the output biases: argmax unchanged
    Policy shifted = p;
    auto& params = shifted.net.params();
    for (std::size_t i = params.size() - 4; i < params.size(); ++i) params[i] += 3.25;
    CHECK(std::get<int>(shifted.act({0.5}, {-0.5}, rng, true)) == want);
}

TEST_CASE("stochastic discrete sampling saturates on one-hot logits") {
    std::mt19937_64 rng(6);
    Policy p = Policy::make_discrete(1, 4, {4}, rng);
    // single hidden unit path is messy; drive the head bias directly instead
    for (double& v : p.net.params()) v = 0.0;
    p.net.params()[p.net.n_params() - 4 + 2] = 35.0; // bias of logit 2
    for (int i = 0; i < 100000; ++i)
        CHECK(std::get<int>(p.act({0.0}, {0.0}, rng, false)) == 2);
}

TEST_CASE("convergence on a gap-1 demonstration set reproduces actions") {
    // tiny deterministic dataset: action = direction of the goal step
    std::mt19937_64 rng(7);
    Policy p = Policy::make_discrete(1, 2, {16, 16}, rng);
    AdamState opt(p.net.n_params(), 5e-3);
    std::vector<GcslSample> data;
    for (int i = -4; i <= 4; ++i) {
        const double x = i / 5.0;
        data.push_back(sample1({x}, 0, {x - 0.2})); // move down toward smaller goal
        data.push_back(sample1({x}, 1, {x + 0.2}));
    }
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    for (int step = 0; step < 3000; ++step) {
        std::vector<GcslSample> batch;
        for (int b = 0; b < 16; ++b) batch.push_back(data[pick(rng)]);
        gcsl_train_step(p, batch, opt);
    }
    int correct = 0;
    for (const auto& s : data)
        correct += std::get<int>(p.act(s.s, s.g, rng, true)) == std::get<int>(s.a);
    CHECK(correct >= static_cast<int>(data.size() * 99 / 100));
}

TEST_CASE("empty batch and NaN protection") {
    std::mt19937_64 rng(8);
    Policy p = Policy::make_discrete(1, 2, {4}, rng);
    AdamState opt(p.net.n_params());
    CHECK_THROWS_AS(gcsl_train_step(p, {}, opt), std::invalid_argument);
}
