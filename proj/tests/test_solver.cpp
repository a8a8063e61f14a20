#include <doctest.h>

#include <functional>
#include <set>

#include "epibsl/solver.hpp"
#include "test_support.hpp"

using namespace epibsl;
using namespace epibsl::testing;

namespace {

Instance hard_general_instance() {
    // f(0,0)=0, f(1,0)=1, f(0,1)=1.2, f(1,1)=1.2 ; bit j = round j
    return Instance::make({2.54375, 2.08125}, {450, 550},
                          AggregationFunction::general(2, {0, 1, 1.2, 1.2}), 0.13);
}

Instance min_counterexample() {
    return Instance::make({2, 9}, {1, 5}, AggregationFunction::min(2), 1e-3);
}

}  // namespace

TEST_CASE("hard general-f instance: optimal tree and utilities") {
    const auto inst = hard_general_instance();
    const auto s = inst.initial_state();
    const auto r = solve_posterior_optimal(s, inst);
    CHECK(r.policy.to_string() == "2(1,S)");
    CHECK(std::abs(r.posterior_utility - 0.6115) <= 1e-9);
    CHECK(std::abs(evaluate_under_posterior(PolicyTree::parse("1(2,S)"), s, inst) - 0.6045) <= 1e-9);
    CHECK(std::abs(evaluate_under_posterior(PolicyTree::parse("S(1)"), s, inst) - 0.53) <= 1e-9);
    CHECK(considers(r.policy, Action::Arm1));
    CHECK(considers(r.policy, Action::Arm2));
}

TEST_CASE("min counterexample: posterior-bad arm is played first") {
    const auto inst = min_counterexample();
    const auto s = inst.initial_state();
    const auto r = solve_posterior_optimal(s, inst);
    CHECK(r.policy.to_string() == "2(S,2)");

    // Two successes in a row: (1/6)(2/7) = 1/21 via arm 2, (2/11)(1/4) = 1/22 via arm 1.
    CHECK(std::abs(mean(s.arm2) * optimistic_mean(s.arm2, 1) - 1.0 / 21) <= 1e-12);
    CHECK(std::abs(mean(s.arm1) * optimistic_mean(s.arm1, 1) - 1.0 / 22) <= 1e-12);

    // PU = -c - c*P(first success) + P(two successes) for both "repeat on success" trees.
    const double margin = evaluate_under_posterior(PolicyTree::parse("2(S,2)"), s, inst) -
                          evaluate_under_posterior(PolicyTree::parse("1(S,1)"), s, inst);
    CHECK(std::abs(margin - (1e-3 * (2.0 / 11 - 1.0 / 6) + (1.0 / 21 - 1.0 / 22))) <= 1e-12);
    CHECK(margin > 0.0);
}

TEST_CASE("cost 1 with f=min makes skipping optimal everywhere") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 50; ++trial) {
        const BetaParam p1 = random_beta(gen);
        BetaParam p2 = random_beta(gen);
        if (mean(p1) <= mean(p2)) continue;
        for (int m = 1; m <= 3; ++m) {
            const auto inst = Instance::make(p1, p2, AggregationFunction::min(m), 1.0);
            const auto r = solve_posterior_optimal(inst.initial_state(), inst);
            CHECK(r.policy == PolicyTree::constant(Action::Skip, m));
            CHECK(r.posterior_utility == 0.0);
            if (m == 2) {
                CHECK(brute_force_posterior_max(inst.initial_state(), inst) <= 0.0);
            }
        }
    }
}

TEST_CASE("evaluate_under_truth") {
    const auto inst = Instance::make({1, 1}, {1, 2}, AggregationFunction::min(2), 0.01);
    CHECK(evaluate_under_truth(PolicyTree::parse("2(S,2)"), {0.5, 0.9}, inst) ==
          doctest::Approx(0.791).epsilon(1e-14));
    CHECK(evaluate_under_truth(PolicyTree::constant(Action::Skip, 2), {0.3, 0.7}, inst) == 0.0);
    const auto sum_inst = Instance::make({1, 1}, {1, 2}, AggregationFunction::sum(2), 0.01);
    CHECK(evaluate_under_truth(PolicyTree::parse("1(1,1)"), {0.5, 0.2}, sum_inst) ==
          doctest::Approx(0.98).epsilon(1e-14));
    CHECK_THROWS(evaluate_under_truth(PolicyTree::parse("1(1,1)"), {1.5, 0.2}, sum_inst));
    CHECK_THROWS(evaluate_under_truth(PolicyTree::parse("1"), {0.5, 0.2}, sum_inst));
}

TEST_CASE("evaluate_under_posterior of all-Skip is zero") {
    std::mt19937_64 gen(3);
    for (int m = 1; m <= 4; ++m) {
        const auto inst = random_instance(gen, m, m % 2 == 0);
        CHECK(evaluate_under_posterior(PolicyTree::constant(Action::Skip, m), inst.initial_state(),
                                       inst) == 0.0);
    }
}

TEST_CASE("solve_known_mu agrees with brute force") {
    const auto inst = Instance::make({1, 1}, {1, 2}, AggregationFunction::min(2), 0.01);
    const MuVec mu{0.5, 0.9};
    const auto all = solve_known_mu(mu, inst);
    CHECK(all.value == doctest::Approx(0.791).epsilon(1e-14));
    CHECK(std::abs(all.value - brute_force_truth_max(mu, inst, ActionSet::all())) <= 1e-12);
    const auto bad = solve_known_mu(mu, inst, {Action::Skip, Action::Arm1});
    CHECK(bad.value == doctest::Approx(0.235).epsilon(1e-14));
    CHECK(std::abs(bad.value - brute_force_truth_max(mu, inst, {Action::Skip, Action::Arm1})) <= 1e-12);
    CHECK_FALSE(considers(bad.policy, Action::Arm2));
    CHECK(solve_known_mu(mu, inst, {Action::Skip}).value == 0.0);
    CHECK_THROWS(solve_known_mu(mu, inst, {Action::Arm1}));

    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 1 + trial % 3;
        const auto ri = random_instance(gen, m, trial % 2 == 0);
        const MuVec rmu{u(gen), u(gen)};
        for (ActionSet allowed : {ActionSet::all(), ActionSet{Action::Skip, Action::Arm1},
                                  ActionSet{Action::Skip, Action::Arm2}}) {
            const auto r = solve_known_mu(rmu, ri, allowed);
            CHECK(std::abs(r.value - brute_force_truth_max(rmu, ri, allowed)) <= 1e-10);
            CHECK(std::abs(r.value - evaluate_under_truth(r.policy, rmu, ri)) <= 1e-12);
        }
    }
}

TEST_CASE("considers follows reachable branches only") {
    CHECK_FALSE(considers(PolicyTree::parse("1(S,S)"), Action::Arm2));
    CHECK(considers(PolicyTree::parse("2(1,S)"), Action::Arm1));
    // Skip nodes only have the reward-0 continuation.
    CHECK_FALSE(considers(PolicyTree::parse("S(S)"), Action::Arm2));
    constexpr auto none = PolicyTree::kNone;
    const auto hidden = PolicyTree::from_nodes(
        2, {PolicyTree::Node{Action::Skip, {1, 2}}, PolicyTree::Node{Action::Arm1, {none, none}},
            PolicyTree::Node{Action::Arm2, {none, none}}});
    CHECK(hidden == PolicyTree::parse("S(1,2)"));
    CHECK_FALSE(considers(hidden, Action::Arm2));
    CHECK(considers(hidden, Action::Arm1));
    CHECK(considers(PolicyTree::parse("S(2)"), Action::Arm2));
    CHECK_THROWS(considers(hidden, Action::Skip));
}

TEST_CASE("policy enumeration counts and uniqueness") {
    CHECK(policy_count(1) == 3);
    CHECK(policy_count(2) == 21);
    CHECK(policy_count(3) == 21 + 2 * 21 * 21);
    CHECK(policy_count(4) == 903ull + 2ull * 903 * 903);
    for (int m = 1; m <= 3; ++m) {
        std::set<std::string> seen;
        std::uint64_t n = 0;
        for (const auto& t : PolicyEnumeration(m)) {
            CHECK(t.depth() == m);
            seen.insert(t.to_string());
            ++n;
        }
        CHECK(n == policy_count(m));
        CHECK(seen.size() == n);
    }
    // Root Skip gives 3 trees at m=2, each arm root gives 9.
    PolicyEnumeration e2(2);
    int roots[3] = {0, 0, 0};
    for (const auto& t : e2) ++roots[static_cast<int>(t.root().action)];
    CHECK(roots[static_cast<int>(Action::Skip)] == 3);
    CHECK(roots[static_cast<int>(Action::Arm1)] == 9);
    CHECK(roots[static_cast<int>(Action::Arm2)] == 9);
    CHECK(PolicyEnumeration(4).size() == policy_count(4));
    CHECK_THROWS(PolicyEnumeration(5));
}

TEST_CASE("DP optimum equals brute-force maximum over enumerated trees") {
    std::mt19937_64 gen(2024);
    for (int m = 1; m <= 3; ++m) {
        for (int trial = 0; trial < 60; ++trial) {
            const auto inst = random_instance(gen, m, trial % 2 == 0);
            // Start from a random mid-history posterior to exercise non-prior states.
            auto s = inst.initial_state();
            s.arm1 = random_beta(gen);
            s.arm2 = random_beta(gen);
            const auto r = solve_posterior_optimal(s, inst);
            CHECK(std::abs(r.posterior_utility - brute_force_posterior_max(s, inst)) <= 1e-10);
            CHECK(std::abs(evaluate_under_posterior(r.policy, s, inst) - r.posterior_utility) <= 1e-12);
            CHECK(r.posterior_utility >= 0.0);
        }
    }
}

TEST_CASE("symmetric table and its general expansion give the same optimum") {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 40; ++trial) {
        const int m = 1 + trial % 5;
        const auto sym = random_instance(gen, m, true);
        std::vector<double> expanded(1u << m);
        for (std::uint32_t b = 0; b < expanded.size(); ++b) expanded[b] = sym.f()(b);
        const auto gen_inst = Instance::make(sym.prior1(), sym.prior2(),
                                             AggregationFunction::general(m, expanded), sym.cost());
        const auto a = solve_posterior_optimal(sym.initial_state(), sym);
        const auto b = solve_posterior_optimal(gen_inst.initial_state(), gen_inst);
        CHECK(std::abs(a.posterior_utility - b.posterior_utility) <= 1e-12);
    }
}

TEST_CASE("known-mu optimum never considers the bad arm") {
    for (int m = 1; m <= 3; ++m) {
        for (const auto& f : {AggregationFunction::min(m), AggregationFunction::max(m),
                              AggregationFunction::sum(m)}) {
            for (double cost : {0.001, 0.01, 0.1}) {
                const auto inst = Instance::make({2, 2}, {1, 3}, f, cost);
                for (int a = 1; a <= 19; ++a) {
                    for (int b = 1; b <= 19; ++b) {
                        if (a == b) continue;
                        const MuVec mu{0.05 * a, 0.05 * b};
                        const Action bad = a < b ? Action::Arm1 : Action::Arm2;
                        CHECK_FALSE(considers(solve_known_mu(mu, inst).policy, bad));
                    }
                }
            }
        }
    }
}

TEST_CASE("last round never plays the posterior-worse arm") {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 300; ++trial) {
        const int m = 1 + trial % 4;
        const auto inst = random_instance(gen, m, trial % 3 != 0);
        auto s = inst.initial_state();
        const auto r = solve_posterior_optimal(s, inst);
        const auto& tree = r.policy;
        // Walk every reachable node, tracking the within-episode posteriors.
        std::function<void(std::int32_t, int, BetaParam, BetaParam)> walk =
            [&](std::int32_t i, int depth, BetaParam b1, BetaParam b2) {
                const auto& n = tree.node(i);
                if (depth == m - 1 && mean(b2) < mean(b1)) CHECK(n.action != Action::Arm2);
                if (n.child[0] == PolicyTree::kNone) return;
                if (n.action == Action::Skip) {
                    walk(n.child[0], depth + 1, b1, b2);
                } else {
                    for (int rwd = 0; rwd < 2; ++rwd) {
                        walk(n.child[static_cast<std::size_t>(rwd)], depth + 1,
                             n.action == Action::Arm1 ? update(b1, rwd) : b1,
                             n.action == Action::Arm2 ? update(b2, rwd) : b2);
                    }
                }
            };
        walk(0, 0, s.arm1, s.arm2);
    }
}

TEST_CASE("policy text format") {
    const auto t = PolicyTree::parse("2( 1 , S )");
    CHECK(t.depth() == 2);
    CHECK(t.to_string() == "2(1,S)");
    CHECK(t.pretty() == "Arm2\n  r=0: Arm1\n  r=1: Skip\n");
    CHECK(PolicyTree::parse("S(S(1))").depth() == 3);
    CHECK_THROWS(PolicyTree::parse("2(1)"));
    CHECK_THROWS(PolicyTree::parse("2(1(S,S),S)"));
    CHECK_THROWS(PolicyTree::parse("X"));
    CHECK_THROWS(PolicyTree::parse("1(S,S)x"));
}
