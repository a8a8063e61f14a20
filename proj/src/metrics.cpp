#include "epibsl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epibsl/parallel.hpp"

namespace epibsl {

namespace {

const MuVec& require_mu(const SimulationRecord& record) {
    if (!record.mu) throw std::invalid_argument("metric needs a realized mu (MuFirst record)");
    return *record.mu;
}

// Guards floor() against quotients like 0.3/0.1 = 2.9999999999999996.
std::int64_t floor_count(double x) { return static_cast<std::int64_t>(std::floor(x + 1e-9)); }

// f at k ones, for symmetric or permutation-invariant general tables.
double f_count(const AggregationFunction& f, int k) {
    if (f.is_symmetric()) return f.at_count(k);
    return f(k == 0 ? 0u : (1u << k) - 1u);
}

}  // namespace

FailureParams FailureParams::make(double c, std::int64_t N) {
    if (!(c > 0.0 && c < 0.5)) throw std::invalid_argument("fail c must lie in (0, 1/2)");
    if (N < 0) throw std::invalid_argument("fail N must be >= 0");
    return FailureParams{c, N};
}

bool detect_fail(const SimulationRecord& record, const FailureParams& fp) {
    const MuVec& mu = require_mu(record);
    const auto inside = [&](double x) { return x > fp.c && x < 1.0 - fp.c; };
    return inside(mu.mu1) && inside(mu.mu2) && mu.mu2 >= mu.mu1 + fp.c &&
           record.pulls(Action::Arm2) <= fp.N;
}

std::int64_t considers_arm2_episodes(const SimulationRecord& record) {
    std::int64_t count = 0;
    const PolicyTree* last = nullptr;
    bool last_considers = false;
    for (const auto& ep : record.episodes) {
        if (!last || !(*last == ep.policy)) {
            last_considers = considers(ep.policy, Action::Arm2);
            last = &ep.policy;
        }
        count += last_considers;
    }
    return count;
}

bool detect_strong_fail(const SimulationRecord& record, const FailureParams& fp) {
    const MuVec& mu = require_mu(record);
    return mu.mu2 >= mu.mu1 + fp.c && considers_arm2_episodes(record) <= fp.N;
}

RegretReport pseudoregret(const SimulationRecord& record) {
    const MuVec& mu = require_mu(record);
    RegretReport rep;
    rep.u_star = solve_known_mu(mu, record.instance).value;
    rep.values.reserve(record.episodes.size());
    rep.cumulative.reserve(record.episodes.size());
    const PolicyTree* last = nullptr;
    double last_value = 0.0;
    double reg = 0.0;
    for (const auto& ep : record.episodes) {
        if (!last || !(*last == ep.policy)) {
            last_value = evaluate_under_truth(ep.policy, mu, record.instance);
            last = &ep.policy;
        }
        rep.values.push_back(last_value);
        reg += rep.u_star - last_value;
        rep.cumulative.push_back(reg);
    }
    return rep;
}

RegretCurve average_curves(const std::vector<std::vector<double>>& curves) {
    if (curves.empty()) throw std::invalid_argument("no curves to average");
    const std::size_t T = curves.front().size();
    std::vector<double> sum(T, 0.0), sumsq(T, 0.0);
    for (const auto& c : curves) {
        if (c.size() != T) throw std::invalid_argument("curves differ in length");
        for (std::size_t t = 0; t < T; ++t) {
            sum[t] += c[t];
            sumsq[t] += c[t] * c[t];
        }
    }
    RegretCurve out;
    out.replicates = static_cast<std::int64_t>(curves.size());
    out.mean.resize(T);
    out.std_error.resize(T, 0.0);
    const double R = static_cast<double>(curves.size());
    for (std::size_t t = 0; t < T; ++t) {
        out.mean[t] = sum[t] / R;
        if (curves.size() > 1) {
            const double var = std::max(0.0, (sumsq[t] - R * out.mean[t] * out.mean[t]) / (R - 1.0));
            out.std_error[t] = std::sqrt(var / R);
        }
    }
    return out;
}

RegretCurve bayes_regret_mc(const Instance& inst, std::int64_t episodes, std::int64_t replicates,
                            std::uint64_t master_seed, int threads) {
    if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    const auto curves = map_replicates(replicates, threads, [&](std::int64_t r) {
        return pseudoregret(run_simulation(inst, episodes, replicate_seed(master_seed, r)))
            .cumulative;
    });
    return average_curves(curves);
}

double ugap(MuVec mu, const Instance& inst) {
    if (mu.mu1 == mu.mu2) throw std::invalid_argument("ugap is undefined for equal means");
    const Action bad = mu.mu1 < mu.mu2 ? Action::Arm1 : Action::Arm2;
    const double best = solve_known_mu(mu, inst).value;
    const double restricted = solve_known_mu(mu, inst, ActionSet{Action::Skip, bad}).value;
    return best - restricted;
}

double ugap_bound_min(MuVec mu, int m, double cost) {
    const double lo = std::min(mu.mu1, mu.mu2), hi = std::max(mu.mu1, mu.mu2);
    return std::max(0.0, std::pow(hi, m) - std::pow(lo, m) - m * cost);
}

double ugap_bound_max(MuVec mu, int m, double cost) {
    const double lo = std::min(mu.mu1, mu.mu2), hi = std::max(mu.mu1, mu.mu2);
    return std::max(0.0, std::pow(1.0 - lo, m) - std::pow(1.0 - hi, m) - m * cost);
}

std::int64_t n_prior(const Instance& inst, TheoremVariant variant) {
    const BetaParam& p2 = inst.prior2();
    switch (variant) {
        case TheoremVariant::Symmetric:
            return 1 + floor_count((inst.m() - 1) * p2.beta / p2.alpha);
        case TheoremVariant::GeneralM2: {
            const std::int64_t n0 = floor_count(p2.beta / p2.alpha) + 1;
            const std::int64_t n1 = floor_count(mean(p2) / (0.75 * inst.delta())) + 1;
            return n0 + n1;
        }
    }
    throw std::invalid_argument("unknown theorem variant");
}

double cost_threshold(const Instance& inst, TheoremVariant variant) {
    const BetaParam& p1 = inst.prior1();
    const double anchor = mean(p1) - inst.delta() / 4.0;
    const auto& f = inst.f();
    const int m = inst.m();
    switch (variant) {
        case TheoremVariant::Symmetric: {
            if (!f.permutation_invariant()) {
                throw std::invalid_argument("symmetric cost threshold needs a symmetric f");
            }
            double best = 1.0;
            for (int j = 0; j <= m; ++j) {
                for (int i = j; i < m; ++i) {
                    const double gain = f_count(f, m - i + j) - f_count(f, j);
                    if (!(gain > 0.0)) continue;
                    double prod = 1.0;
                    for (int l = 0; l <= m - i; ++l) prod *= anchor / (1.0 + l / (p1.alpha + p1.beta));
                    best = std::min(best, prod * gain / (m - i));
                }
            }
            return best;
        }
        case TheoremVariant::GeneralM2: {
            if (m != 2) throw std::invalid_argument("general-f cost threshold needs m = 2");
            const double gain = f(0b11) - f(0b01);  // f(1,1) - f(1,0)
            return gain > 0.0 ? anchor * gain : 1.0;
        }
    }
    throw std::invalid_argument("unknown theorem variant");
}

}  // namespace epibsl
