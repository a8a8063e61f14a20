#include "epibsl/solver.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <unordered_map>

namespace epibsl {

namespace {

// Within-episode progress: round index, per-arm pulls/successes, reward prefix.
struct Ctx {
    int j = 0;
    int n1 = 0, s1 = 0, n2 = 0, s2 = 0;
    std::uint32_t prefix = 0;

    Ctx after(Action a, int reward) const {
        Ctx c = *this;
        ++c.j;
        if (a == Action::Arm1) {
            ++c.n1;
            c.s1 += reward;
        } else if (a == Action::Arm2) {
            ++c.n2;
            c.s2 += reward;
        }
        if (reward) c.prefix |= 1u << j;
        return c;
    }
};

// Sequential Beta-posterior reward model.
struct PosteriorBelief {
    BetaParam arm1, arm2;
    bool symmetric;

    double p_success(Action a, const Ctx& c) const {
        const BetaParam& p = a == Action::Arm1 ? arm1 : arm2;
        const int n = a == Action::Arm1 ? c.n1 : c.n2;
        const int s = a == Action::Arm1 ? c.s1 : c.s2;
        return (p.alpha + s) / (p.alpha + p.beta + n);
    }
    // For a symmetric f the prefix only matters through s1 + s2.
    std::uint64_t key(const Ctx& c) const {
        std::uint64_t k = static_cast<std::uint64_t>(c.j);
        k = (k << 6) | static_cast<std::uint64_t>(c.n1);
        k = (k << 6) | static_cast<std::uint64_t>(c.s1);
        k = (k << 6) | static_cast<std::uint64_t>(c.n2);
        k = (k << 6) | static_cast<std::uint64_t>(c.s2);
        k = (k << 20) | (symmetric ? 0u : c.prefix);
        return k;
    }
};

// Rewards i.i.d. given mu; no within-episode learning.
struct KnownBelief {
    MuVec mu;
    bool symmetric;

    double p_success(Action a, const Ctx&) const { return a == Action::Arm1 ? mu.mu1 : mu.mu2; }
    std::uint64_t key(const Ctx& c) const {
        const std::uint64_t ones = static_cast<std::uint64_t>(c.s1 + c.s2);
        return (static_cast<std::uint64_t>(c.j) << 32) | (symmetric ? ones : c.prefix);
    }
};

double leaf_value(const AggregationFunction& f, const Ctx& c) {
    return f.is_symmetric() ? f.at_count(c.s1 + c.s2) : f(c.prefix);
}

template <class Belief>
class BackwardInduction {
public:
    BackwardInduction(const Instance& inst, Belief belief, ActionSet allowed)
        : f_(inst.f()), cost_(inst.cost()), m_(inst.m()), belief_(belief), allowed_(allowed) {}

    double value(const Ctx& c) { return solve(c).value; }

    PolicyTree materialize() {
        std::vector<PolicyTree::Node> nodes;
        std::function<std::int32_t(const Ctx&)> build = [&](const Ctx& c) -> std::int32_t {
            const Action a = solve(c).action;
            const auto idx = static_cast<std::int32_t>(nodes.size());
            nodes.push_back(PolicyTree::Node{a, {PolicyTree::kNone, PolicyTree::kNone}});
            if (c.j + 1 < m_) {
                const auto c0 = build(c.after(a, 0));
                nodes[static_cast<std::size_t>(idx)].child[0] = c0;
                if (a != Action::Skip) {
                    const auto c1 = build(c.after(a, 1));
                    nodes[static_cast<std::size_t>(idx)].child[1] = c1;
                }
            }
            return idx;
        };
        build(Ctx{});
        return PolicyTree::from_nodes(m_, std::move(nodes));
    }

private:
    struct Entry {
        double value;
        Action action;
    };

    Entry solve(const Ctx& c) {
        const auto k = belief_.key(c);
        if (auto it = memo_.find(k); it != memo_.end()) return it->second;

        Entry best{continuation(c, Action::Skip, 0), Action::Skip};
        for (Action arm : {Action::Arm1, Action::Arm2}) {
            if (!allowed_.contains(arm)) continue;
            const double p = belief_.p_success(arm, c);
            const double v = -cost_ + p * continuation(c, arm, 1) + (1.0 - p) * continuation(c, arm, 0);
            if (v > best.value + kTol) best = Entry{v, arm};
        }
        memo_.emplace(k, best);
        return best;
    }

    double continuation(const Ctx& c, Action a, int reward) {
        const Ctx next = c.after(a, reward);
        return next.j == m_ ? leaf_value(f_, next) : solve(next).value;
    }

    const AggregationFunction& f_;
    double cost_;
    int m_;
    Belief belief_;
    ActionSet allowed_;
    std::unordered_map<std::uint64_t, Entry> memo_;
};

template <class Belief>
double evaluate(const PolicyTree& policy, const Instance& inst, const Belief& belief) {
    if (policy.depth() != inst.m()) {
        throw std::invalid_argument("policy depth " + std::to_string(policy.depth()) +
                                    " does not match episode length " + std::to_string(inst.m()));
    }
    const double cost = inst.cost();
    std::function<double(std::int32_t, const Ctx&)> rec = [&](std::int32_t i,
                                                              const Ctx& c) -> double {
        const auto& n = policy.node(i);
        auto cont = [&](int reward) {
            const Ctx next = c.after(n.action, reward);
            return next.j == inst.m() ? leaf_value(inst.f(), next)
                                      : rec(n.child[static_cast<std::size_t>(reward)], next);
        };
        if (n.action == Action::Skip) return cont(0);
        const double p = belief.p_success(n.action, c);
        // Skip zero-probability branches so degenerate mu never multiplies an unreachable value.
        double v = -cost;
        if (p > 0.0) v += p * cont(1);
        if (p < 1.0) v += (1.0 - p) * cont(0);
        return v;
    };
    return rec(0, Ctx{});
}

void check_mu(MuVec mu) {
    auto ok = [](double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; };
    if (!ok(mu.mu1) || !ok(mu.mu2)) throw std::invalid_argument("mu must lie in [0,1]");
}

}  // namespace

SolveResult solve_posterior_optimal(const PosteriorState& state, const Instance& inst) {
    BackwardInduction<PosteriorBelief> dp(
        inst, PosteriorBelief{state.arm1, state.arm2, inst.f().is_symmetric()}, ActionSet::all());
    const double v = dp.value(Ctx{});
    return SolveResult{dp.materialize(), v};
}

double evaluate_under_posterior(const PolicyTree& policy, const PosteriorState& state,
                                const Instance& inst) {
    return evaluate(policy, inst, PosteriorBelief{state.arm1, state.arm2, false});
}

double evaluate_under_truth(const PolicyTree& policy, MuVec mu, const Instance& inst) {
    check_mu(mu);
    return evaluate(policy, inst, KnownBelief{mu, false});
}

KnownMuResult solve_known_mu(MuVec mu, const Instance& inst, ActionSet allowed) {
    check_mu(mu);
    if (!allowed.contains(Action::Skip)) {
        throw std::invalid_argument("solve_known_mu: allowed actions must include Skip");
    }
    BackwardInduction<KnownBelief> dp(inst, KnownBelief{mu, inst.f().is_symmetric()}, allowed);
    const double v = dp.value(Ctx{});
    return KnownMuResult{v, dp.materialize()};
}

bool considers(const PolicyTree& policy, Action arm) {
    if (arm == Action::Skip) throw std::invalid_argument("considers: arm must be Arm1 or Arm2");
    std::vector<std::int32_t> stack{0};
    while (!stack.empty()) {
        const auto& n = policy.node(stack.back());
        stack.pop_back();
        if (n.action == arm) return true;
        if (n.child[0] != PolicyTree::kNone) stack.push_back(n.child[0]);
        if (n.action != Action::Skip && n.child[1] != PolicyTree::kNone) stack.push_back(n.child[1]);
    }
    return false;
}

// ---------------------------------------------------------------------------

std::uint64_t policy_count(int m) {
    if (m < 1) throw std::invalid_argument("policy_count: m must be >= 1");
    std::uint64_t n = 3;
    for (int d = 2; d <= m; ++d) n = n + 2 * n * n;
    return n;
}

PolicyEnumeration::PolicyEnumeration(int m) : m_(m), count_(0) {
    if (m < 1 || m > kMaxDepth) {
        throw std::invalid_argument("policy enumeration supports 1 <= m <= " +
                                    std::to_string(kMaxDepth));
    }
    count_ = policy_count(m);
    if (m > 1) {
        PolicyEnumeration inner(m - 1);
        sub_.reserve(inner.size());
        for (auto t : inner) sub_.push_back(std::move(t));
    }
}

PolicyTree PolicyEnumeration::operator[](std::uint64_t index) const {
    if (index >= count_) throw std::out_of_range("policy index out of range");
    if (m_ == 1) {
        static constexpr Action order[] = {Action::Skip, Action::Arm1, Action::Arm2};
        return PolicyTree::leaf(order[index]);
    }
    const std::uint64_t n = sub_.size();
    if (index < n) return PolicyTree::skip_then(sub_[index]);
    index -= n;
    const Action arm = index < n * n ? Action::Arm1 : Action::Arm2;
    index %= n * n;
    return PolicyTree::arm_then(arm, sub_[index / n], sub_[index % n]);
}

PolicyEnumeration enumerate_policies(const Instance& inst) { return PolicyEnumeration(inst.m()); }

}  // namespace epibsl
