#pragma once

#include <cstdint>
#include <vector>

#include "epibsl/dynamics.hpp"

namespace epibsl {

/// Failure-event parameters: reward-gap/boundedness margin c in (0, 1/2) and pull budget N.
struct FailureParams {
    double c = 0.05;
    std::int64_t N = 0;

    static FailureParams make(double c, std::int64_t N);
};

/// mu1, mu2 in (c, 1-c), mu2 >= mu1 + c, and arm 2 pulled at most N times in total.
/// Throws if the record has no realized mu.
bool detect_fail(const SimulationRecord& record, const FailureParams& fp);

/// mu2 >= mu1 + c and at most N episode policies consider arm 2.
bool detect_strong_fail(const SimulationRecord& record, const FailureParams& fp);

/// Number of episodes whose policy has a positive-probability path through arm 2.
std::int64_t considers_arm2_episodes(const SimulationRecord& record);

struct RegretReport {
    double u_star = 0.0;
    std::vector<double> values;      // V(policy_e | mu) per episode
    std::vector<double> cumulative;  // cumulative[t-1] = Reg(t)
};

RegretReport pseudoregret(const SimulationRecord& record);

struct RegretCurve {
    std::vector<double> mean;       // mean[t-1] estimates BReg(t)
    std::vector<double> std_error;  // standard error of the mean; 0 when R = 1
    std::int64_t replicates = 0;
};

/// Per-T mean and standard error of equal-length regret curves, summed in the given order.
RegretCurve average_curves(const std::vector<std::vector<double>>& curves);

/// Monte Carlo Bayesian regret from R MuFirst runs seeded by replicate_seed(master, r).
/// The reduction is done in replicate order, so the result does not depend on `threads`.
RegretCurve bayes_regret_mc(const Instance& inst, std::int64_t episodes, std::int64_t replicates,
                            std::uint64_t master_seed, int threads = 0);

/// Best value with all actions minus best value restricted to Skip and the worse arm.
/// Throws if mu1 == mu2.
double ugap(MuVec mu, const Instance& inst);

/// Closed-form lower bounds on ugap for f = min and f = max. The argument order of the two
/// means does not matter; the bounds are written for the larger one being the good arm.
double ugap_bound_min(MuVec mu, int m, double cost);
double ugap_bound_max(MuVec mu, int m, double cost);

/// Which pull-bound theorem a prior constant refers to.
enum class TheoremVariant {
    Symmetric,  // symmetric f, any m
    GeneralM2,  // general f, m = 2
};

/// Prior-dependent bound on arm-2 pulls.
/// Symmetric: 1 + floor((m-1) beta2 / alpha2).
/// GeneralM2: N0 + N1 with N0 = floor(beta2/alpha2) + 1, N1 = floor(gamma2 / (3 delta / 4)) + 1.
std::int64_t n_prior(const Instance& inst, TheoremVariant variant);

/// Largest exploration cost for which the pull bound is proved (strict inequality).
/// Throws std::invalid_argument when the variant does not apply to the instance.
double cost_threshold(const Instance& inst, TheoremVariant variant);

}  // namespace epibsl
