#include "epibsl/dynamics.hpp"

#include <random>
#include <stdexcept>

#include "epibsl/rng.hpp"

namespace epibsl {

namespace {

// Stream tags under a run seed.
constexpr std::uint64_t kTagMu = 0x6d75;
constexpr std::uint64_t kTagArm1 = 0x7431;
constexpr std::uint64_t kTagArm2 = 0x7432;

double sample_beta(CounterRng& rng, const BetaParam& p) {
    for (;;) {
        std::gamma_distribution<double> ga(p.alpha, 1.0);
        std::gamma_distribution<double> gb(p.beta, 1.0);
        const double x = ga(rng);
        const double y = gb(rng);
        if (x + y > 0.0) return x / (x + y);
    }
}

std::size_t arm_index(Action arm) {
    if (arm == Action::Skip) throw std::invalid_argument("reward tapes exist for Arm1 and Arm2 only");
    return arm == Action::Arm1 ? 0 : 1;
}

}  // namespace

const char* to_string(SamplingMode mode) {
    return mode == SamplingMode::MuFirst ? "mu_first" : "sequential_posterior";
}

MuVec sample_mu(const BetaParam& prior1, const BetaParam& prior2, std::uint64_t seed) {
    CounterRng r1(mix(seed, 1));
    CounterRng r2(mix(seed, 2));
    return MuVec{sample_beta(r1, prior1), sample_beta(r2, prior2)};
}

// ---------------------------------------------------------------------------

RewardTape RewardTape::mu_first(MuVec mu, std::uint64_t seed) {
    if (!(mu.mu1 >= 0.0 && mu.mu1 <= 1.0 && mu.mu2 >= 0.0 && mu.mu2 <= 1.0)) {
        throw std::invalid_argument("mu must lie in [0,1]");
    }
    RewardTape t;
    t.mode_ = SamplingMode::MuFirst;
    t.mu_ = mu;
    t.arms_[0].key = mix(seed, kTagArm1);
    t.arms_[1].key = mix(seed, kTagArm2);
    return t;
}

RewardTape RewardTape::sequential(const BetaParam& prior1, const BetaParam& prior2,
                                  std::uint64_t seed) {
    RewardTape t;
    t.mode_ = SamplingMode::SequentialPosterior;
    t.arms_[0].key = mix(seed, kTagArm1);
    t.arms_[1].key = mix(seed, kTagArm2);
    t.arms_[0].prior = prior1;
    t.arms_[1].prior = prior2;
    return t;
}

RewardTape& RewardTape::with_prefix(Action arm, std::vector<std::uint8_t> bits) {
    auto& t = tape(arm);
    if (!t.bits.empty()) throw std::logic_error("with_prefix after draws");
    for (auto& b : bits) b = b != 0;
    t.pinned = std::move(bits);
    return *this;
}

RewardTape::ArmTape& RewardTape::tape(Action arm) { return arms_[arm_index(arm)]; }
const RewardTape::ArmTape& RewardTape::tape(Action arm) const { return arms_[arm_index(arm)]; }

int RewardTape::generate(const ArmTape& t, double p_mu, std::int64_t index,
                         const BetaParam& post) const {
    const auto i = static_cast<std::size_t>(index);
    if (i < t.pinned.size()) return t.pinned[i];
    const double p = mode_ == SamplingMode::MuFirst ? p_mu : mean(post);
    return CounterRng(t.key).uniform_at(static_cast<std::uint64_t>(index)) < p ? 1 : 0;
}

int RewardTape::draw(Action arm) {
    const auto idx = arm_index(arm);
    auto& t = arms_[idx];
    BetaParam post = t.prior;
    if (mode_ == SamplingMode::SequentialPosterior) {
        for (auto b : t.bits) post = update(post, b);
    }
    const double p_mu = mu_ ? (idx == 0 ? mu_->mu1 : mu_->mu2) : 0.0;
    const int bit = generate(t, p_mu, static_cast<std::int64_t>(t.bits.size()), post);
    t.bits.push_back(static_cast<std::uint8_t>(bit));
    return bit;
}

std::int64_t RewardTape::consumed(Action arm) const {
    return static_cast<std::int64_t>(tape(arm).bits.size());
}

std::vector<std::uint8_t> RewardTape::prefix(Action arm, std::int64_t n) const {
    const auto idx = arm_index(arm);
    const auto& t = arms_[idx];
    const double p_mu = mu_ ? (idx == 0 ? mu_->mu1 : mu_->mu2) : 0.0;
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(n));
    BetaParam post = t.prior;
    for (std::int64_t i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const int bit = ui < t.bits.size() ? t.bits[ui] : generate(t, p_mu, i, post);
        out.push_back(static_cast<std::uint8_t>(bit));
        post = update(post, bit);
    }
    return out;
}

// ---------------------------------------------------------------------------

SimulationRecord run_simulation(const Instance& inst, std::int64_t episodes, std::uint64_t seed,
                                SamplingMode mode) {
    if (mode == SamplingMode::MuFirst) {
        const MuVec mu = sample_mu(inst.prior1(), inst.prior2(), mix(seed, kTagMu));
        return run_simulation(inst, episodes, RewardTape::mu_first(mu, seed));
    }
    return run_simulation(inst, episodes, RewardTape::sequential(inst.prior1(), inst.prior2(), seed));
}

SimulationRecord run_simulation(const Instance& inst, std::int64_t episodes, RewardTape tape) {
    if (episodes < 1) throw std::invalid_argument("episode count must be >= 1");
    const int m = inst.m();
    SimulationRecord rec{inst, tape.mu(), tape.mode(), {}, {}, inst.initial_state(), std::move(tape)};
    rec.episodes.reserve(static_cast<std::size_t>(episodes));
    rec.posteriors.reserve(static_cast<std::size_t>(episodes));

    PosteriorState state = inst.initial_state();
    std::optional<PosteriorState> cached_state;
    std::optional<SolveResult> cached;
    for (std::int64_t e = 0; e < episodes; ++e) {
        rec.posteriors.push_back(state);
        // Once exploration stops the posterior stays put and every agent re-solves the same problem.
        if (!cached_state || !(*cached_state == state)) {
            cached = solve_posterior_optimal(state, inst);
            cached_state = state;
        }
        EpisodeRecord ep{cached->policy, cached->posterior_utility, {}, {}, 0.0, 0.0};
        ep.actions.reserve(static_cast<std::size_t>(m));
        ep.rewards.reserve(static_cast<std::size_t>(m));
        std::uint32_t bits = 0;
        std::int32_t node = 0;
        for (int j = 0; j < m; ++j) {
            const auto& n = ep.policy.node(node);
            int reward = 0;
            if (n.action != Action::Skip) {
                reward = rec.tape.draw(n.action);
                state.observe(n.action, reward);
                ep.cost_paid += inst.cost();
            }
            ep.actions.push_back(n.action);
            ep.rewards.push_back(static_cast<std::uint8_t>(reward));
            if (reward) bits |= 1u << j;
            node = n.child[static_cast<std::size_t>(reward)];
        }
        ep.utility = inst.f()(bits) - ep.cost_paid;
        rec.episodes.push_back(std::move(ep));
    }
    rec.final_state = state;
    return rec;
}

bool detect_ev1(const SimulationRecord& record, std::int64_t n_max) {
    const BetaParam& p = record.instance.prior1();
    const double threshold = mean(p) - record.instance.delta() / 4.0;
    const auto tape = record.tape.prefix(Action::Arm1, n_max);
    double successes = 0.0;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        successes += tape[static_cast<std::size_t>(n - 1)];
        if ((p.alpha + successes) / (p.alpha + p.beta + static_cast<double>(n)) < threshold) {
            return false;
        }
    }
    return true;
}

bool detect_ev2(const SimulationRecord& record, std::int64_t n) {
    for (auto b : record.tape.prefix(Action::Arm2, n)) {
        if (b) return false;
    }
    return true;
}

}  // namespace epibsl
