#include "epibsl/model.hpp"

#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace epibsl {

const char* to_string(Action a) {
    switch (a) {
        case Action::Arm1: return "Arm1";
        case Action::Arm2: return "Arm2";
        case Action::Skip: return "Skip";
    }
    return "?";
}

BetaParam BetaParam::make(double alpha, double beta) {
    if (!(std::isfinite(alpha) && alpha > 0.0)) {
        throw std::invalid_argument("Beta parameter alpha must be a positive finite number");
    }
    if (!(std::isfinite(beta) && beta > 0.0)) {
        throw std::invalid_argument("Beta parameter beta must be a positive finite number");
    }
    return BetaParam{alpha, beta};
}

double mean(const BetaParam& p) { return p.alpha / (p.alpha + p.beta); }

BetaParam update(const BetaParam& p, int reward) {
    return reward != 0 ? BetaParam{p.alpha + 1.0, p.beta} : BetaParam{p.alpha, p.beta + 1.0};
}

double optimistic_mean(const BetaParam& p, int k) {
    return (p.alpha + k) / (p.alpha + p.beta + k);
}

double pessimistic_mean(const BetaParam& p) { return p.alpha / (p.alpha + p.beta + 1.0); }

double rho(const BetaParam& p, int i) {
    double prod = 1.0;
    for (int l = 0; l <= i; ++l) prod *= p.alpha / (p.alpha + p.beta + l);
    return prod;
}

PosteriorState PosteriorState::from_priors(const BetaParam& prior1, const BetaParam& prior2) {
    PosteriorState s;
    s.arm1 = prior1;
    s.arm2 = prior2;
    return s;
}

void PosteriorState::observe(Action arm, int reward) {
    if (arm == Action::Arm1) {
        arm1 = update(arm1, reward);
        ++pulls1;
        successes1 += reward != 0;
    } else if (arm == Action::Arm2) {
        arm2 = update(arm2, reward);
        ++pulls2;
        successes2 += reward != 0;
    } else {
        throw std::invalid_argument("PosteriorState::observe: Skip carries no observation");
    }
}

const BetaParam& PosteriorState::param(Action arm) const {
    return arm == Action::Arm1 ? arm1 : arm2;
}

// ---------------------------------------------------------------------------

AggregationFunction AggregationFunction::symmetric(std::vector<double> table) {
    if (table.size() < 2 || table.size() > static_cast<std::size_t>(kMaxSymmetricM) + 1) {
        throw std::invalid_argument("symmetric f needs m+1 entries with 1 <= m <= " +
                                    std::to_string(kMaxSymmetricM));
    }
    const int m = static_cast<int>(table.size()) - 1;
    return AggregationFunction(Kind::Symmetric, m, std::move(table));
}

AggregationFunction AggregationFunction::general(int m, std::vector<double> table) {
    if (m < 1 || m > kMaxGeneralM) {
        throw std::invalid_argument("general f supports 1 <= m <= " + std::to_string(kMaxGeneralM));
    }
    if (table.size() != (std::size_t{1} << m)) {
        throw std::invalid_argument("general f for m=" + std::to_string(m) + " needs " +
                                    std::to_string(1u << m) + " entries, got " +
                                    std::to_string(table.size()));
    }
    return AggregationFunction(Kind::General, m, std::move(table));
}

AggregationFunction AggregationFunction::min(int m) {
    std::vector<double> t(static_cast<std::size_t>(m) + 1, 0.0);
    t.back() = 1.0;
    return symmetric(std::move(t));
}

AggregationFunction AggregationFunction::max(int m) {
    std::vector<double> t(static_cast<std::size_t>(m) + 1, 1.0);
    t.front() = 0.0;
    return symmetric(std::move(t));
}

AggregationFunction AggregationFunction::sum(int m) {
    std::vector<double> t(static_cast<std::size_t>(m) + 1);
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<double>(k);
    return symmetric(std::move(t));
}

double AggregationFunction::operator()(std::uint32_t bits) const {
    if (kind_ == Kind::Symmetric) return table_[static_cast<std::size_t>(std::popcount(bits))];
    return table_[bits];
}

double AggregationFunction::at_count(int ones) const {
    if (kind_ != Kind::Symmetric) throw std::logic_error("at_count on a general f");
    return table_.at(static_cast<std::size_t>(ones));
}

double AggregationFunction::top() const { return table_.back(); }
double AggregationFunction::bottom() const { return table_.front(); }

bool AggregationFunction::permutation_invariant() const {
    if (kind_ == Kind::Symmetric) return true;
    std::vector<double> by_count(static_cast<std::size_t>(m_) + 1, std::nan(""));
    for (std::uint32_t b = 0; b < table_.size(); ++b) {
        double& slot = by_count[static_cast<std::size_t>(std::popcount(b))];
        if (std::isnan(slot)) {
            slot = table_[b];
        } else if (std::abs(slot - table_[b]) > kTol) {
            return false;
        }
    }
    return true;
}

bool AggregationFunction::min_like() const {
    return kind_ == Kind::Symmetric && std::abs(table_[0] - table_[m_ - 1]) <= kTol;
}

bool AggregationFunction::max_like() const {
    return kind_ == Kind::Symmetric && std::abs(table_[1] - table_[m_]) <= kTol;
}

std::variant<AggregationFunction, FViolation> validate_f(const AggregationFunction& f) {
    const auto& t = f.table();
    for (double v : t) {
        if (!std::isfinite(v)) {
            return FViolation{FViolation::Kind::NonFinite, "f contains a non-finite value"};
        }
    }
    auto label = [&](std::uint32_t idx) {
        if (f.is_symmetric()) return "f(" + std::to_string(idx) + " ones)";
        std::string s = "f(";
        for (int j = 0; j < f.m(); ++j) s += ((idx >> j) & 1u) ? '1' : '0';
        return s + ")";
    };
    auto monotone_violation = [&](std::uint32_t lo, std::uint32_t hi) {
        std::ostringstream os;
        os << "f is not coordinatewise non-decreasing: " << label(lo) << " = " << t[lo] << " > "
           << label(hi) << " = " << t[hi];
        return FViolation{FViolation::Kind::Monotonicity, os.str(), lo, hi};
    };
    if (f.is_symmetric()) {
        for (std::uint32_t k = 0; k + 1 < t.size(); ++k) {
            if (t[k] > t[k + 1]) return monotone_violation(k, k + 1);
        }
    } else {
        for (std::uint32_t b = 0; b < t.size(); ++b) {
            for (int j = 0; j < f.m(); ++j) {
                const std::uint32_t up = b | (1u << j);
                if (up != b && t[b] > t[up]) return monotone_violation(b, up);
            }
        }
    }
    if (!(f.top() > f.bottom())) {
        return FViolation{FViolation::Kind::ConstantFunction,
                          "f is constant: f(1,...,1) must exceed f(0,...,0)"};
    }
    std::vector<double> norm = t;
    const double base = t.front();
    for (double& v : norm) v -= base;
    if (f.is_symmetric()) return AggregationFunction::symmetric(std::move(norm));
    return AggregationFunction::general(f.m(), std::move(norm));
}

AggregationFunction validated(const AggregationFunction& f) {
    auto r = validate_f(f);
    if (auto* v = std::get_if<FViolation>(&r)) throw std::invalid_argument(v->message);
    return std::get<AggregationFunction>(std::move(r));
}

// ---------------------------------------------------------------------------

Instance Instance::make(BetaParam prior1, BetaParam prior2, AggregationFunction f, double cost) {
    prior1 = BetaParam::make(prior1.alpha, prior1.beta);
    prior2 = BetaParam::make(prior2.alpha, prior2.beta);
    if (!(std::isfinite(cost) && cost > 0.0 && cost <= 1.0)) {
        throw std::invalid_argument("cost must lie in (0, 1]");
    }
    if (!(mean(prior1) > mean(prior2))) {
        throw std::invalid_argument("arm 1 must be prior-good: mean(prior1) > mean(prior2)");
    }
    return Instance(prior1, prior2, validated(f), cost);
}

double Instance::delta() const { return mean(prior1_) - mean(prior2_); }

}  // namespace epibsl
