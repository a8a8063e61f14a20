#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "epibsl/model.hpp"
#include "epibsl/policy.hpp"
#include "epibsl/solver.hpp"

namespace epibsl {

enum class SamplingMode { MuFirst, SequentialPosterior };

const char* to_string(SamplingMode mode);

/// Draws (mu1, mu2) independently from the two Beta priors; deterministic per seed.
MuVec sample_mu(const BetaParam& prior1, const BetaParam& prior2, std::uint64_t seed);

/// Per-arm reward sequences, consumed one entry per pull.
///
/// MuFirst: entry l of arm i is Bernoulli(mu_i), independent of everything else.
/// SequentialPosterior: entry l is Bernoulli of the arm's posterior mean given entries < l.
/// Entries can be pinned by `with_prefix`; the pinned bits come first and sequential
/// posterior generation continues from them.
class RewardTape {
public:
    static RewardTape mu_first(MuVec mu, std::uint64_t seed);
    static RewardTape sequential(const BetaParam& prior1, const BetaParam& prior2,
                                 std::uint64_t seed);

    /// Pins the first entries of `arm`'s tape. Must be called before any draw.
    RewardTape& with_prefix(Action arm, std::vector<std::uint8_t> bits);

    SamplingMode mode() const { return mode_; }
    const std::optional<MuVec>& mu() const { return mu_; }

    /// Consumes the next entry of `arm`.
    int draw(Action arm);

    /// Number of entries consumed so far.
    std::int64_t consumed(Action arm) const;

    /// First n entries of `arm`, generating past the consumed ones without consuming them.
    std::vector<std::uint8_t> prefix(Action arm, std::int64_t n) const;

private:
    struct ArmTape {
        std::uint64_t key = 0;
        BetaParam prior;
        std::vector<std::uint8_t> pinned;
        std::vector<std::uint8_t> bits;  // consumed entries
    };

    RewardTape() = default;
    ArmTape& tape(Action arm);
    const ArmTape& tape(Action arm) const;
    int generate(const ArmTape& t, double p_mu, std::int64_t index, const BetaParam& post) const;

    SamplingMode mode_ = SamplingMode::MuFirst;
    std::optional<MuVec> mu_;
    ArmTape arms_[2];
};

struct EpisodeRecord {
    PolicyTree policy;
    double posterior_utility = 0.0;
    std::vector<Action> actions;
    std::vector<std::uint8_t> rewards;
    double cost_paid = 0.0;
    double utility = 0.0;  // f(rewards) - cost_paid
};

struct SimulationRecord {
    Instance instance;
    std::optional<MuVec> mu;
    SamplingMode mode = SamplingMode::MuFirst;
    std::vector<EpisodeRecord> episodes;
    std::vector<PosteriorState> posteriors;  // state at the start of each episode
    PosteriorState final_state;
    RewardTape tape;

    std::int64_t pulls(Action arm) const {
        return arm == Action::Arm1 ? final_state.pulls1 : final_state.pulls2;
    }
};

/// Runs T episodes; each agent plays the posterior-optimal policy for the current history.
/// Identical arguments give identical records.
SimulationRecord run_simulation(const Instance& inst, std::int64_t episodes, std::uint64_t seed,
                                SamplingMode mode = SamplingMode::MuFirst);

/// Same, on a caller-supplied tape.
SimulationRecord run_simulation(const Instance& inst, std::int64_t episodes, RewardTape tape);

/// Arm-1 stability: (a10 + sum_{l<=n} tape1_l) / (a10 + b10 + n) >= mean(prior1) - delta/4
/// for every n in [1, n_max].
bool detect_ev1(const SimulationRecord& record, std::int64_t n_max);

/// First N entries of arm 2's tape are all 0.
bool detect_ev2(const SimulationRecord& record, std::int64_t n);

}  // namespace epibsl
