#pragma once

#include <cstdint>
#include <utility>

#include "epibsl/model.hpp"
#include "epibsl/policy.hpp"

namespace epibsl {

struct SolveResult {
    PolicyTree policy;
    double posterior_utility = 0.0;
};

/// Realized mean rewards of the two arms.
struct MuVec {
    double mu1 = 0.0;
    double mu2 = 0.0;
};

/// Posterior-optimal deterministic policy for one episode starting from `state`.
///
/// Backward induction over within-episode states. Skip continues with reward 0; an arm
/// costs inst.cost() and yields 1 with its current within-episode posterior mean. Ties
/// within kTol prefer Skip, then Arm1, then Arm2.
SolveResult solve_posterior_optimal(const PosteriorState& state, const Instance& inst);

/// Expected utility of `policy` with rewards drawn sequentially from the Beta posteriors.
double evaluate_under_posterior(const PolicyTree& policy, const PosteriorState& state,
                                const Instance& inst);

/// Expected utility with Arm-i rewards i.i.d. Bernoulli(mu_i). Throws if mu is outside [0,1].
double evaluate_under_truth(const PolicyTree& policy, MuVec mu, const Instance& inst);

struct KnownMuResult {
    double value = 0.0;
    PolicyTree policy;
};

/// Best policy for known mu using only `allowed` actions (must contain Skip).
KnownMuResult solve_known_mu(MuVec mu, const Instance& inst, ActionSet allowed = ActionSet::all());

/// True iff a positive-probability path of `policy` plays `arm`. Both children of an arm
/// node are reachable; only child 0 of a Skip node is.
bool considers(const PolicyTree& policy, Action arm);

/// Random-access view over every deterministic policy tree of depth m (m <= 4).
///
/// Index order: all Skip-rooted trees, then Arm1-rooted, then Arm2-rooted; children are
/// enumerated in the order of the depth-(m-1) enumeration.
class PolicyEnumeration {
public:
    static constexpr int kMaxDepth = 4;

    explicit PolicyEnumeration(int m);

    std::uint64_t size() const { return count_; }
    int depth() const { return m_; }
    PolicyTree operator[](std::uint64_t index) const;

    class iterator {
    public:
        using value_type = PolicyTree;
        using difference_type = std::ptrdiff_t;
        iterator(const PolicyEnumeration* e, std::uint64_t i) : e_(e), i_(i) {}
        PolicyTree operator*() const { return (*e_)[i_]; }
        iterator& operator++() {
            ++i_;
            return *this;
        }
        bool operator==(const iterator& o) const { return i_ == o.i_; }
        bool operator!=(const iterator& o) const { return i_ != o.i_; }

    private:
        const PolicyEnumeration* e_;
        std::uint64_t i_;
    };
    iterator begin() const { return {this, 0}; }
    iterator end() const { return {this, count_}; }

private:
    int m_;
    std::uint64_t count_;
    std::vector<PolicyTree> sub_;  // all trees of depth m-1
};

/// N(1) = 3, N(d) = N(d-1) + 2 N(d-1)^2.
std::uint64_t policy_count(int m);

PolicyEnumeration enumerate_policies(const Instance& inst);

}  // namespace epibsl
