#include <cmath>
#include <random>

#include "doctest.h"
#include "epibsl/dynamics.hpp"
#include "epibsl/rng.hpp"
#include "test_support.hpp"

using namespace epibsl;
using namespace epibsl::testing;

namespace {

Instance min_counterexample() {
    return Instance::make({2, 9}, {1, 5}, AggregationFunction::min(2), 1e-3);
}

// Exact Beta-Bernoulli predictive probability of a specific bit sequence.
double predictive(const BetaParam& p, const std::vector<int>& bits) {
    double a = p.alpha, b = p.beta, prob = 1.0;
    for (int x : bits) {
        const double g = a / (a + b);
        prob *= x ? g : 1.0 - g;
        (x ? a : b) += 1.0;
    }
    return prob;
}

}  // namespace

TEST_CASE("counter rng is random access") {
    CounterRng r(42);
    std::vector<std::uint64_t> seq;
    for (int i = 0; i < 10; ++i) seq.push_back(r());
    for (int i = 9; i >= 0; --i) CHECK(CounterRng(42).at(static_cast<std::uint64_t>(i)) == seq[static_cast<std::size_t>(i)]);
    CHECK(mix(1, 2) != mix(2, 1));
    CHECK(mix(7, 0) != mix(7, 1));
}

TEST_CASE("simulation is deterministic per seed and mode") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = random_instance(gen, 1 + trial % 3, trial % 2 == 0);
        for (auto mode : {SamplingMode::MuFirst, SamplingMode::SequentialPosterior}) {
            const auto a = run_simulation(inst, 30, 1234 + trial, mode);
            const auto b = run_simulation(inst, 30, 1234 + trial, mode);
            REQUIRE(a.episodes.size() == b.episodes.size());
            for (std::size_t e = 0; e < a.episodes.size(); ++e) {
                CHECK(a.episodes[e].policy == b.episodes[e].policy);
                CHECK(a.episodes[e].actions == b.episodes[e].actions);
                CHECK(a.episodes[e].rewards == b.episodes[e].rewards);
                CHECK(a.episodes[e].utility == b.episodes[e].utility);
            }
            CHECK(a.final_state == b.final_state);
            CHECK(a.mu.has_value() == (mode == SamplingMode::MuFirst));
        }
    }
}

TEST_CASE("cost 1 with f=min never pulls") {
    const auto inst = Instance::make({3, 1}, {1, 1}, AggregationFunction::min(2), 1.0);
    const auto rec = run_simulation(inst, 50, 9);
    CHECK(rec.pulls(Action::Arm1) == 0);
    CHECK(rec.pulls(Action::Arm2) == 0);
    for (const auto& ep : rec.episodes) {
        CHECK(ep.actions == std::vector<Action>{Action::Skip, Action::Skip});
        CHECK(ep.utility == 0.0);
    }
}

TEST_CASE("pinned arm-2 successes keep playing arm 2 in the min counterexample") {
    const auto inst = min_counterexample();
    auto tape = RewardTape::mu_first({0.5, 0.5}, 3).with_prefix(Action::Arm2, {1, 1});
    const auto rec = run_simulation(inst, 1, std::move(tape));
    const auto& ep = rec.episodes.front();
    CHECK(ep.actions == std::vector<Action>{Action::Arm2, Action::Arm2});
    CHECK(ep.rewards == std::vector<std::uint8_t>{1, 1});
    CHECK(inst.f()(0b11) == 1.0);
    CHECK(ep.utility == doctest::Approx(1.0 - 2e-3).epsilon(1e-15));
    CHECK(rec.final_state.pulls2 == 2);
    CHECK(rec.final_state.successes2 == 2);
}

TEST_CASE("mu sampling matches the prior mean") {
    const BetaParam p1{2, 9}, p2{1, 5};
    double s1 = 0.0, s2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto mu = sample_mu(p1, p2, mix(77, static_cast<std::uint64_t>(i)));
        REQUIRE(mu.mu1 >= 0.0);
        REQUIRE(mu.mu1 <= 1.0);
        s1 += mu.mu1;
        s2 += mu.mu2;
    }
    CHECK(std::abs(s1 / n - 2.0 / 11) < 0.005);
    CHECK(std::abs(s2 / n - 1.0 / 6) < 0.005);
}

TEST_CASE("event detectors") {
    const auto inst = Instance::make({2, 2}, {1, 3}, AggregationFunction::min(2), 1e-3);
    SUBCASE("first arm-1 failure breaks stability at n = 1") {
        auto tape = RewardTape::mu_first({0.5, 0.2}, 1).with_prefix(Action::Arm1, {0, 1, 1});
        const auto rec = run_simulation(inst, 1, std::move(tape));
        // (2 + 0) / (4 + 1) = 0.4 < 0.5 - 0.25 / 4.
        CHECK_FALSE(detect_ev1(rec, 1));
    }
    SUBCASE("successes keep arm 1 stable") {
        auto tape = RewardTape::mu_first({0.5, 0.2}, 1).with_prefix(Action::Arm1, {1, 1, 0, 1});
        const auto rec = run_simulation(inst, 1, std::move(tape));
        CHECK(detect_ev1(rec, 4));  // 3/5, 4/6, 4/7, 5/8 all >= 0.4375
        CHECK_FALSE(detect_ev1(
            run_simulation(inst, 1,
                           RewardTape::mu_first({0.5, 0.2}, 1)
                               .with_prefix(Action::Arm1, {1, 0, 0, 0})),
            4));
    }
    SUBCASE("ev2 reads arm 2's tape only") {
        auto tape = RewardTape::mu_first({0.9, 0.9}, 1)
                        .with_prefix(Action::Arm2, {0, 0, 0, 1})
                        .with_prefix(Action::Arm1, {1, 1, 1, 1});
        const auto rec = run_simulation(inst, 1, std::move(tape));
        CHECK(detect_ev2(rec, 3));
        CHECK_FALSE(detect_ev2(rec, 4));
        CHECK(detect_ev2(rec, 0));
    }
}

TEST_CASE("ev1 over a longer horizon implies it over a shorter one") {
    const auto inst = Instance::make({2, 2}, {1, 3}, AggregationFunction::min(2), 1e-3);
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto rec = run_simulation(inst, 5, seed);
        bool prev = true;
        for (std::int64_t n = 1; n <= 40; ++n) {
            const bool now = detect_ev1(rec, n);
            CHECK((!now || prev));
            prev = now;
        }
    }
}

TEST_CASE("posterior trajectory replays from episode records") {
    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 30; ++trial) {
        const auto inst = random_instance(gen, 1 + trial % 3, trial % 2 == 1);
        const auto mode = trial % 3 == 0 ? SamplingMode::SequentialPosterior : SamplingMode::MuFirst;
        const auto rec = run_simulation(inst, 40, static_cast<std::uint64_t>(trial), mode);
        PosteriorState s = inst.initial_state();
        std::vector<std::uint8_t> seen1, seen2;
        for (std::size_t e = 0; e < rec.episodes.size(); ++e) {
            CHECK(rec.posteriors[e] == s);
            const auto& ep = rec.episodes[e];
            CHECK(ep.policy == solve_posterior_optimal(s, inst).policy);
            double cost = 0.0;
            std::uint32_t bits = 0;
            for (std::size_t j = 0; j < ep.actions.size(); ++j) {
                const Action a = ep.actions[j];
                if (a == Action::Skip) {
                    CHECK(ep.rewards[j] == 0);
                    continue;
                }
                s.observe(a, ep.rewards[j]);
                (a == Action::Arm1 ? seen1 : seen2).push_back(ep.rewards[j]);
                cost += inst.cost();
                if (ep.rewards[j]) bits |= 1u << j;
            }
            CHECK(ep.utility == doctest::Approx(inst.f()(bits) - cost).epsilon(1e-12));
        }
        CHECK(rec.final_state == s);
        // Each pull consumes exactly one tape entry, in order.
        CHECK(rec.tape.consumed(Action::Arm1) == rec.pulls(Action::Arm1));
        CHECK(rec.tape.consumed(Action::Arm2) == rec.pulls(Action::Arm2));
        CHECK(rec.tape.prefix(Action::Arm1, static_cast<std::int64_t>(seen1.size())) == seen1);
        CHECK(rec.tape.prefix(Action::Arm2, static_cast<std::int64_t>(seen2.size())) == seen2);
    }
}

TEST_CASE("prefix looks ahead without consuming and agrees with later draws") {
    for (auto mode : {SamplingMode::MuFirst, SamplingMode::SequentialPosterior}) {
        auto tape = mode == SamplingMode::MuFirst ? RewardTape::mu_first({0.4, 0.6}, 21)
                                                  : RewardTape::sequential({1, 2}, {3, 1}, 21);
        const auto ahead = tape.prefix(Action::Arm2, 50);
        CHECK(tape.consumed(Action::Arm2) == 0);
        for (std::size_t i = 0; i < 50; ++i) CHECK(tape.draw(Action::Arm2) == ahead[i]);
        CHECK(tape.prefix(Action::Arm1, 5).size() == 5);
        CHECK_THROWS(tape.draw(Action::Skip));
    }
}

TEST_CASE("both sampling modes give the Beta-Bernoulli predictive law") {
    const BetaParam p{2, 3};
    const int n = 100000;
    // 8 outcomes of the first three tape entries; chi-square critical value at 7 dof, p=0.001.
    const double critical = 24.32;
    for (auto mode : {SamplingMode::MuFirst, SamplingMode::SequentialPosterior}) {
        std::vector<int> counts(8, 0);
        for (int i = 0; i < n; ++i) {
            const std::uint64_t seed = mix(99, static_cast<std::uint64_t>(i));
            const auto tape = mode == SamplingMode::MuFirst
                                  ? RewardTape::mu_first(sample_mu(p, p, mix(seed, 1)), seed)
                                  : RewardTape::sequential(p, p, seed);
            const auto b = tape.prefix(Action::Arm1, 3);
            ++counts[static_cast<std::size_t>(b[0] | b[1] << 1 | b[2] << 2)];
        }
        double chi2 = 0.0;
        for (int k = 0; k < 8; ++k) {
            const double expect = n * predictive(p, {k & 1, (k >> 1) & 1, (k >> 2) & 1});
            chi2 += (counts[static_cast<std::size_t>(k)] - expect) *
                    (counts[static_cast<std::size_t>(k)] - expect) / expect;
        }
        INFO("mode " << to_string(mode) << " chi2 " << chi2);
        CHECK(chi2 < critical);
    }
}

TEST_CASE("simulation rejects bad arguments") {
    const auto inst = min_counterexample();
    CHECK_THROWS(run_simulation(inst, 0, 1));
    CHECK_THROWS(RewardTape::mu_first({1.2, 0.5}, 1));
    auto t = RewardTape::mu_first({0.5, 0.5}, 1);
    t.draw(Action::Arm1);
    CHECK_THROWS(t.with_prefix(Action::Arm1, {1}));
}
