#pragma once

#include "gritlab/core.hpp"
#include "gritlab/event.hpp"
#include "gritlab/mdp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace gritlab::oracle {

struct OracleLimits {
    std::size_t max_states = 10;
    std::size_t max_actions = 4;
    std::size_t max_horizon = 50;
    std::size_t max_policies = 10'000'000;
};

/**
Brute-force reachability by enumerating every deterministic stationary policy.

For reachability objectives on finite MDPs an optimal deterministic stationary policy
exists, so the extremum over this set is the optimum over all policies. Each policy's
absorption probabilities come from a dense linear solve (horizon-free). They equal the
finite-horizon values whenever every path terminates within the horizon.
*/
class ReachOracle {
public:
    ReachOracle(const MdpSpec& m, const Event& b, OracleLimits limits = {}) : m_(m) {
        if (!m.has_kernel()) throw CapabilityError("oracle needs an explicit kernel");
        if (m.num_states > limits.max_states)
            throw OracleLimitError("oracle refuses " + std::to_string(m.num_states) + " states (limit " +
                                   std::to_string(limits.max_states) + ")");
        if (m.num_actions() > limits.max_actions)
            throw OracleLimitError("oracle refuses " + std::to_string(m.num_actions()) + " actions (limit " +
                                   std::to_string(limits.max_actions) + ")");
        if (m.horizon > limits.max_horizon)
            throw OracleLimitError("oracle refuses horizon " + std::to_string(m.horizon) + " (limit " +
                                   std::to_string(limits.max_horizon) + ")");
        b.validate(m.coords.front().size());
        target_.assign(m.num_states, false);
        absorbing_.assign(m.num_states, false);
        for (std::size_t s = 0; s < m.num_states; ++s) {
            target_[s] = b.predicate.admits(m.coords[s]);
            absorbing_[s] = target_[s] || m.terminal[s];
            if (!absorbing_[s]) decision_.push_back(s);
        }
        double count = std::pow(static_cast<double>(m.num_actions()), static_cast<double>(decision_.size()));
        if (count > static_cast<double>(limits.max_policies))
            throw OracleLimitError("oracle refuses " + std::to_string(count) + " policies (limit " +
                                   std::to_string(limits.max_policies) + ")");
        num_policies_ = static_cast<std::size_t>(std::llround(count));
    }

    std::size_t num_policies() const { return num_policies_; }
    const std::vector<bool>& target() const { return target_; }
    const std::vector<bool>& absorbing() const { return absorbing_; }

    /// The k-th deterministic policy in mixed-radix order over non-absorbing states.
    DeterministicPolicy policy(std::size_t k) const {
        DeterministicPolicy pi(m_.num_states, 0);
        for (auto s : decision_) {
            pi[s] = k % m_.num_actions();
            k /= m_.num_actions();
        }
        return pi;
    }

    /// Probability of eventually admitting B under a deterministic policy.
    std::vector<double> reach_under(const DeterministicPolicy& pi) const {
        const std::size_t n = m_.num_states;
        std::vector<double> out(n, 0.0);
        for (std::size_t s = 0; s < n; ++s) out[s] = target_[s] ? 1.0 : 0.0;

        // states that can reach the target under pi
        std::vector<bool> live(n, false);
        for (std::size_t s = 0; s < n; ++s) live[s] = target_[s];
        for (bool changed = true; changed;) {
            changed = false;
            for (auto s : decision_) {
                if (live[s]) continue;
                for (const auto& tr : m_.row(s, pi[s]))
                    if (tr.prob > 0.0 && live[tr.next]) {
                        live[s] = true;
                        changed = true;
                        break;
                    }
            }
        }
        std::vector<std::size_t> idx(n, n);
        std::vector<std::size_t> unknown;
        for (auto s : decision_)
            if (live[s]) {
                idx[s] = unknown.size();
                unknown.push_back(s);
            }
        const std::size_t k = unknown.size();
        if (k == 0) return out;

        // (I - P_uu) x = P_u,target
        std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
        for (std::size_t r = 0; r < k; ++r) {
            const auto s = unknown[r];
            a[r][r] = 1.0;
            for (const auto& tr : m_.row(s, pi[s])) {
                if (target_[tr.next]) a[r][k] += tr.prob;
                else if (idx[tr.next] < n) a[r][idx[tr.next]] -= tr.prob;
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            std::size_t piv = c;
            for (std::size_t r = c + 1; r < k; ++r)
                if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
            std::swap(a[c], a[piv]);
            const double d = a[c][c];
            for (std::size_t j = c; j <= k; ++j) a[c][j] /= d;
            for (std::size_t r = 0; r < k; ++r) {
                if (r == c || a[r][c] == 0.0) continue;
                const double f = a[r][c];
                for (std::size_t j = c; j <= k; ++j) a[r][j] -= f * a[c][j];
            }
        }
        for (std::size_t r = 0; r < k; ++r) out[unknown[r]] = std::clamp(a[r][k], 0.0, 1.0);
        return out;
    }

    /// Pointwise minimum (grit) and maximum (reachability) over all deterministic policies.
    void extremes(std::vector<double>& lo, std::vector<double>& hi) const {
        lo.assign(m_.num_states, std::numeric_limits<double>::infinity());
        hi.assign(m_.num_states, -std::numeric_limits<double>::infinity());
        for (std::size_t k = 0; k < num_policies_; ++k) {
            const auto r = reach_under(policy(k));
            for (std::size_t s = 0; s < m_.num_states; ++s) {
                lo[s] = std::min(lo[s], r[s]);
                hi[s] = std::max(hi[s], r[s]);
            }
        }
    }

    const MdpSpec& mdp() const { return m_; }

private:
    const MdpSpec& m_;
    std::vector<bool> target_, absorbing_;
    std::vector<std::size_t> decision_;
    std::size_t num_policies_ = 1;
};

/// Minimum probability over all policies that B occurs (grit), per state.
inline std::vector<double> min_reach_prob(const MdpSpec& m, const Event& b, OracleLimits limits = {}) {
    ReachOracle o(m, b, limits);
    std::vector<double> lo, hi;
    o.extremes(lo, hi);
    return lo;
}

/// Maximum probability over all policies that B occurs (reachability), per state.
inline std::vector<double> max_reach_prob(const MdpSpec& m, const Event& b, OracleLimits limits = {}) {
    ReachOracle o(m, b, limits);
    std::vector<double> lo, hi;
    o.extremes(lo, hi);
    return hi;
}

struct PolicyDelta {
    DeterministicPolicy policy;
    std::vector<double> grit_change;   ///< E[Gamma(X_k)] - Gamma(x) per state
    std::vector<double> reach_change;  ///< E[Lambda(X_k)] - Lambda(x) per state
};

struct DeltaTable {
    std::vector<double> grit, reach;           ///< oracle Gamma_B and Lambda_B
    std::vector<PolicyDelta> rows;
    std::vector<double> min_grit_change;       ///< min over policies, per state
    std::vector<double> max_reach_change;      ///< max over policies, per state
    bool deterministic_kernel = false;
    bool bounds_hold = false;                  ///< min E[dGamma] <= 0 and every E[dLambda] <= 0
    bool equality_holds = false;               ///< both extremes equal 0
};

/**
Expected change of grit and reachability over `steps` transitions for every deterministic
policy, with the bounds min_pi E[dGamma] <= 0 and E[dLambda] <= 0 evaluated exactly.
`slack` absorbs floating-point round-off only.
*/
inline DeltaTable exhaustive_delta_check(const MdpSpec& m, const Event& b, std::size_t steps = 1,
                                         OracleLimits limits = {}, double slack = 1e-12) {
    ReachOracle o(m, b, limits);
    DeltaTable t;
    o.extremes(t.grit, t.reach);
    const std::size_t n = m.num_states;
    t.min_grit_change.assign(n, std::numeric_limits<double>::infinity());
    t.max_reach_change.assign(n, -std::numeric_limits<double>::infinity());
    t.deterministic_kernel = true;
    for (std::size_t s = 0; s < n; ++s)
        if (!o.absorbing()[s])
            for (std::size_t a = 0; a < m.num_actions(); ++a)
                for (const auto& tr : m.row(s, a))
                    if (tr.prob > 0.0 && tr.prob < 1.0) t.deterministic_kernel = false;

    auto propagate = [&](const DeterministicPolicy& pi, const std::vector<double>& base) {
        std::vector<double> w = base, next(n);
        for (std::size_t k = 0; k < steps; ++k) {
            for (std::size_t s = 0; s < n; ++s) {
                if (o.absorbing()[s]) {
                    next[s] = base[s];
                    continue;
                }
                double e = 0.0;
                for (const auto& tr : m.row(s, pi[s])) e += tr.prob * w[tr.next];
                next[s] = e;
            }
            w.swap(next);
        }
        for (std::size_t s = 0; s < n; ++s) w[s] -= base[s];
        return w;
    };

    bool reach_ok = true;
    for (std::size_t k = 0; k < o.num_policies(); ++k) {
        PolicyDelta row;
        row.policy = o.policy(k);
        row.grit_change = propagate(row.policy, t.grit);
        row.reach_change = propagate(row.policy, t.reach);
        for (std::size_t s = 0; s < n; ++s) {
            t.min_grit_change[s] = std::min(t.min_grit_change[s], row.grit_change[s]);
            t.max_reach_change[s] = std::max(t.max_reach_change[s], row.reach_change[s]);
            if (row.reach_change[s] > slack) reach_ok = false;
        }
        t.rows.push_back(std::move(row));
    }
    bool grit_ok = true, equal = true;
    for (std::size_t s = 0; s < n; ++s) {
        if (t.min_grit_change[s] > slack) grit_ok = false;
        if (std::abs(t.min_grit_change[s]) > slack || std::abs(t.max_reach_change[s]) > slack) equal = false;
    }
    t.bounds_hold = grit_ok && reach_ok;
    t.equality_holds = equal;
    return t;
}

} // namespace gritlab::oracle
