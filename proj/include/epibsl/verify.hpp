#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "epibsl/dynamics.hpp"
#include "epibsl/metrics.hpp"

namespace epibsl {

struct Violation {
    std::string input;
    std::string expected;
    std::string observed;
};

/// Outcome of one checker. `trials` counts inputs that met the preconditions and were
/// asserted; `excluded` counts sampled inputs rejected by the precondition filter.
struct CheckReport {
    std::string name;
    std::int64_t trials = 0;
    std::int64_t excluded = 0;
    std::vector<Violation> violations;
    std::vector<std::pair<std::string, double>> observations;
    std::vector<std::string> notes;

    bool passed() const { return violations.empty(); }
    /// Value of a named observation; throws if absent.
    double observation(const std::string& key) const;
};

/// Root of the m = 2 posterior-optimal policy is not Arm2 whenever the optimistic mean of
/// arm 2 is at most gamma1 - 1e-6. Symmetric f, any cost.
CheckReport check_no_pull_m2(std::int64_t trials, std::uint64_t seed, int threads = 0);

/// Same conclusion for symmetric f and 2 <= m <= 6 when
/// (a2 + m - 1) / (a2 + b2 + m - 1) < gamma1 - 1e-6 and cost is below the symmetric threshold.
CheckReport check_no_pull_symmetric_general_m(int m, std::int64_t trials, std::uint64_t seed,
                                              int threads = 0);

/// Same posterior condition for an f with f(0) = f(m-1) or f(1) = f(m), any cost in (0,1].
/// Throws std::invalid_argument for other f.
CheckReport check_no_pull_min_max(const AggregationFunction& f, std::int64_t trials,
                                  std::uint64_t seed, int threads = 0);

/// General f, m = 2: optimistic arm-2 mean below gamma1 - 1e-6, |pessimistic arm-1 mean -
/// gamma2| > 1e-6, and cost < gamma1 (f(1,1) - f(1,0)) - 1e-9 or cost > f(0,1) - f(1,0) + 1e-9.
/// Also records the known negative-control instance as a precondition-excluded witness.
CheckReport check_no_pull_general_f_m2(std::int64_t trials, std::uint64_t seed, int threads = 0);

/// Golden values of the two small worked examples (the min instance with priors (2,9)/(1,5)
/// and the general-f instance with cost 0.13).
CheckReport reproduce_worked_examples();

/// Reg(T) >= (T - N) ugap(mu) for every T on records where detect_strong_fail(c, N) holds,
/// over a small (c, N) grid. MuFirst records only.
CheckReport check_strong_failure_regret(const std::vector<SimulationRecord>& records);

/// Arm 2 pulled at most n_prior times on records where Ev1 (over m T arm-1 entries) and Ev2
/// (over n_prior arm-2 entries) hold. Records whose cost is not below the variant's
/// threshold, or whose f does not fit the variant, are excluded.
CheckReport check_bounded_pulls(const std::vector<SimulationRecord>& records,
                                TheoremVariant variant);

}  // namespace epibsl
