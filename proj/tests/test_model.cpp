#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "epibsl/model.hpp"

using namespace epibsl;

TEST_CASE("mean of Beta parameters") {
    CHECK(mean(BetaParam{2, 9}) == doctest::Approx(2.0 / 11).epsilon(1e-15));
    CHECK(mean(BetaParam{450, 550}) == doctest::Approx(0.45).epsilon(1e-15));
    CHECK(mean(BetaParam{1, 1}) == 0.5);
}

TEST_CASE("posterior update") {
    const auto a = update(BetaParam{1, 5}, 1);
    CHECK(a == BetaParam{2, 5});
    CHECK(mean(a) == doctest::Approx(2.0 / 7));
    const auto b = update(BetaParam{2, 9}, 1);
    CHECK(b == BetaParam{3, 9});
    CHECK(mean(b) == doctest::Approx(0.25));
    CHECK(update(BetaParam{3.5, 1.25}, 0) == BetaParam{3.5, 2.25});
}

TEST_CASE("optimistic and pessimistic means") {
    const BetaParam g2{2.54375, 2.08125};
    CHECK(optimistic_mean(g2, 1) == doctest::Approx(0.63).epsilon(1e-14));
    CHECK(optimistic_mean(BetaParam{450, 550}, 1) == doctest::Approx(451.0 / 1001));
    CHECK(std::abs(optimistic_mean(BetaParam{450, 550}, 1) - 0.45055) < 5e-6);
    CHECK(optimistic_mean(g2, 0) == mean(g2));

    CHECK(std::abs(pessimistic_mean(g2) - 0.45) < 5e-3);
    CHECK(pessimistic_mean(g2) == doctest::Approx(2.54375 / 5.625));
    CHECK(pessimistic_mean(BetaParam{1, 1}) == doctest::Approx(1.0 / 3));
    CHECK(pessimistic_mean(BetaParam{450, 550}) == doctest::Approx(450.0 / 1001));
}

TEST_CASE("rho is the product of consecutive success probabilities") {
    CHECK(rho(BetaParam{1, 1}, 0) == doctest::Approx(0.5));
    CHECK(rho(BetaParam{1, 1}, 1) == doctest::Approx(1.0 / 6));
    CHECK(rho(BetaParam{2, 2}, 2) == doctest::Approx(1.0 / 15));
}

TEST_CASE("posterior arithmetic properties over random parameters") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> logu(std::log(0.1), std::log(100.0));
    for (int trial = 0; trial < 1000; ++trial) {
        const BetaParam p{std::exp(logu(gen)), std::exp(logu(gen))};
        const double g = mean(p);
        CHECK(std::abs(g - (g * optimistic_mean(p, 1) + (1 - g) * pessimistic_mean(p))) <= 1e-12);
        CHECK(pessimistic_mean(p) < g);
        CHECK(g < optimistic_mean(p, 1));
        for (int k = 1; k < 6; ++k) CHECK(optimistic_mean(p, k) > optimistic_mean(p, k - 1));
        CHECK(mean(update(p, 1)) == doctest::Approx(optimistic_mean(p, 1)).epsilon(1e-14));
        CHECK(mean(update(p, 0)) == doctest::Approx(pessimistic_mean(p)).epsilon(1e-14));
        for (int i = 1; i < 5; ++i) {
            CHECK(rho(p, i) == doctest::Approx(rho(p, i - 1) * p.alpha / (p.alpha + p.beta + i)));
            CHECK(rho(p, i) < rho(p, i - 1));
        }
    }
}

TEST_CASE("BetaParam::make rejects non-positive parameters") {
    CHECK_THROWS_AS(BetaParam::make(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(BetaParam::make(1.0, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(BetaParam::make(NAN, 1.0), std::invalid_argument);
    CHECK(BetaParam::make(0.5, 3.0) == BetaParam{0.5, 3.0});
}

TEST_CASE("PosteriorState tracks sufficient statistics") {
    auto s = PosteriorState::from_priors({2, 3}, {1, 1});
    s.observe(Action::Arm1, 1);
    s.observe(Action::Arm1, 0);
    s.observe(Action::Arm2, 0);
    CHECK(s.arm1 == BetaParam{3, 4});
    CHECK(s.arm2 == BetaParam{1, 2});
    CHECK(s.pulls1 == 2);
    CHECK(s.successes1 == 1);
    CHECK(s.pulls2 == 1);
    CHECK(s.successes2 == 0);
    CHECK_THROWS(s.observe(Action::Skip, 0));
}

TEST_CASE("validate_f") {
    SUBCASE("min is accepted") {
        auto r = validate_f(AggregationFunction::symmetric({0, 0, 1}));
        REQUIRE(std::holds_alternative<AggregationFunction>(r));
    }
    SUBCASE("asymmetric m=2 table is accepted") {
        // index bit j = reward of round j: f(1,0) -> 0b01, f(0,1) -> 0b10
        auto r = validate_f(AggregationFunction::general(2, {0, 1, 1.2, 1.2}));
        REQUIRE(std::holds_alternative<AggregationFunction>(r));
        const auto& f = std::get<AggregationFunction>(r);
        CHECK(f(0b01) == 1.0);
        CHECK(f(0b10) == 1.2);
        CHECK_FALSE(f.permutation_invariant());
    }
    SUBCASE("constant function") {
        auto r = validate_f(AggregationFunction::symmetric({1, 1, 1}));
        REQUIRE(std::holds_alternative<FViolation>(r));
        CHECK(std::get<FViolation>(r).kind == FViolation::Kind::ConstantFunction);
    }
    SUBCASE("monotonicity violation names the offending pair") {
        auto r = validate_f(AggregationFunction::general(2, {0, 2, 1, 1.5}));
        REQUIRE(std::holds_alternative<FViolation>(r));
        const auto& v = std::get<FViolation>(r);
        CHECK(v.kind == FViolation::Kind::Monotonicity);
        CHECK(v.lower == 0b01);
        CHECK(v.upper == 0b11);
        CHECK(v.message.find("f(10)") != std::string::npos);
    }
    SUBCASE("normalization subtracts f(0)") {
        const auto f = validated(AggregationFunction::symmetric({0.5, 1, 2}));
        CHECK(f.bottom() == 0.0);
        CHECK(f.top() == 1.5);
    }
    SUBCASE("table size checks") {
        CHECK_THROWS(AggregationFunction::general(2, {0, 1, 1}));
        CHECK_THROWS(AggregationFunction::general(13, std::vector<double>(1u << 13)));
        CHECK_THROWS(AggregationFunction::symmetric({0}));
    }
}

TEST_CASE("named functions and plateau predicates") {
    CHECK(AggregationFunction::min(3).table() == std::vector<double>{0, 0, 0, 1});
    CHECK(AggregationFunction::max(3).table() == std::vector<double>{0, 1, 1, 1});
    CHECK(AggregationFunction::min(3).min_like());
    CHECK(AggregationFunction::max(3).max_like());
    CHECK_FALSE(AggregationFunction::sum(2).min_like());
    CHECK_FALSE(AggregationFunction::sum(2).max_like());
    CHECK(AggregationFunction::general(2, {0, 1, 1, 2}).permutation_invariant());
}

TEST_CASE("Instance validation") {
    const auto f = AggregationFunction::min(2);
    CHECK_NOTHROW(Instance::make({2, 2}, {1, 3}, f, 0.001));
    CHECK(Instance::make({2, 2}, {1, 3}, f, 0.001).delta() == doctest::Approx(0.25));
    CHECK_THROWS_AS(Instance::make({1, 3}, {2, 2}, f, 0.001), std::invalid_argument);
    CHECK_THROWS_AS(Instance::make({1, 1}, {2, 2}, f, 0.001), std::invalid_argument);
    CHECK_THROWS_AS(Instance::make({2, 2}, {1, 3}, f, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Instance::make({2, 2}, {1, 3}, f, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(Instance::make({0, 2}, {1, 3}, f, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(Instance::make({2, 2}, {1, 3}, AggregationFunction::symmetric({1, 1, 1}), 0.1),
                    std::invalid_argument);
}
