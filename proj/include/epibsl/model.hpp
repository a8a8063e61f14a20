#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace epibsl {

/// Absolute tolerance used for equality comparisons across the library.
inline constexpr double kTol = 1e-12;

enum class Action : std::uint8_t { Arm1, Arm2, Skip };

const char* to_string(Action a);

// Beta(alpha, beta) over an arm's Bernoulli mean.
struct BetaParam {
    double alpha = 1.0;
    double beta = 1.0;

    /// Throws std::invalid_argument unless both parameters are strictly positive and finite.
    static BetaParam make(double alpha, double beta);

    friend bool operator==(const BetaParam&, const BetaParam&) = default;
};

double mean(const BetaParam& p);
BetaParam update(const BetaParam& p, int reward);

/// Posterior mean after k hypothetical successes: (a+k)/(a+b+k).
double optimistic_mean(const BetaParam& p, int k = 1);

/// Posterior mean after one hypothetical failure: a/(a+b+1).
double pessimistic_mean(const BetaParam& p);

/// Probability of i+1 consecutive successes: prod_{l=0..i} a/(a+b+l).
double rho(const BetaParam& p, int i);

/// Global posterior over both arms, tracked together with the sufficient statistics.
struct PosteriorState {
    BetaParam arm1;
    BetaParam arm2;
    std::int64_t pulls1 = 0;
    std::int64_t pulls2 = 0;
    std::int64_t successes1 = 0;
    std::int64_t successes2 = 0;

    static PosteriorState from_priors(const BetaParam& prior1, const BetaParam& prior2);

    /// Records one pull of `arm` (Arm1 or Arm2) with the observed reward.
    void observe(Action arm, int reward);

    const BetaParam& param(Action arm) const;

    friend bool operator==(const PosteriorState&, const PosteriorState&) = default;
};

/// Aggregation function over an episode's reward vector.
///
/// Symmetric tables hold m+1 values indexed by the number of ones. General tables hold
/// 2^m values indexed by the reward bit-vector, where bit j is the reward of round j
/// (round 0 is the least significant bit).
class AggregationFunction {
public:
    enum class Kind { Symmetric, General };

    static constexpr int kMaxGeneralM = 12;
    static constexpr int kMaxSymmetricM = 20;

    /// Raw constructors: check table size only. Use validate_f for the monotone/nonconstant
    /// contract and normalization.
    static AggregationFunction symmetric(std::vector<double> table);
    static AggregationFunction general(int m, std::vector<double> table);

    static AggregationFunction min(int m);
    static AggregationFunction max(int m);
    static AggregationFunction sum(int m);

    int m() const { return m_; }
    Kind kind() const { return kind_; }
    bool is_symmetric() const { return kind_ == Kind::Symmetric; }
    const std::vector<double>& table() const { return table_; }

    /// f evaluated on the reward bit-vector `bits` (bit j = round j).
    double operator()(std::uint32_t bits) const;

    /// Symmetric only: f at `ones` ones.
    double at_count(int ones) const;

    /// f(1,...,1) and f(0,...,0).
    double top() const;
    double bottom() const;

    /// True when f(r) depends only on the number of ones in r. Always true for Symmetric.
    bool permutation_invariant() const;

    /// For the min/max style lemmas: f(0) == f(m-1) (min-like) or f(1) == f(m) (max-like).
    /// Both require a symmetric function.
    bool min_like() const;
    bool max_like() const;

    friend bool operator==(const AggregationFunction&, const AggregationFunction&) = default;

private:
    AggregationFunction(Kind kind, int m, std::vector<double> table)
        : kind_(kind), m_(m), table_(std::move(table)) {}

    Kind kind_;
    int m_;
    std::vector<double> table_;
};

struct FViolation {
    enum class Kind { Monotonicity, ConstantFunction, NonFinite };
    Kind kind;
    std::string message;
    // Offending pair for Monotonicity: table indices with value(lower) > value(upper).
    std::uint32_t lower = 0;
    std::uint32_t upper = 0;
};

/// Accepts monotone, nonconstant tables and returns a copy with f(0) subtracted.
std::variant<AggregationFunction, FViolation> validate_f(const AggregationFunction& f);

/// Like validate_f but throws std::invalid_argument carrying the violation message.
AggregationFunction validated(const AggregationFunction& f);

class Instance {
public:
    /// Validates f (normalizing it), cost in (0,1], and prior1 strictly prior-good.
    static Instance make(BetaParam prior1, BetaParam prior2, AggregationFunction f, double cost);

    const BetaParam& prior1() const { return prior1_; }
    const BetaParam& prior2() const { return prior2_; }
    const AggregationFunction& f() const { return f_; }
    double cost() const { return cost_; }
    int m() const { return f_.m(); }

    /// Prior-mean gap mean(prior1) - mean(prior2) > 0.
    double delta() const;

    PosteriorState initial_state() const { return PosteriorState::from_priors(prior1_, prior2_); }

private:
    Instance(BetaParam p1, BetaParam p2, AggregationFunction f, double cost)
        : prior1_(p1), prior2_(p2), f_(std::move(f)), cost_(cost) {}

    BetaParam prior1_;
    BetaParam prior2_;
    AggregationFunction f_;
    double cost_;
};

}  // namespace epibsl
