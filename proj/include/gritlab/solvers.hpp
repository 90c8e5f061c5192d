#pragma once

#include "gritlab/core.hpp"
#include "gritlab/event.hpp"
#include "gritlab/mdp.hpp"
#include "gritlab/parallel.hpp"
#include "gritlab/value_field.hpp"

#include <cmath>
#include <set>
#include <vector>

namespace gritlab {

enum class VisitRule { first_visit, every_visit };

struct SolverConfig {
    double tolerance = 1e-10;
    std::size_t max_sweeps = 1'000'000;
    VisitRule mc_visit_rule = VisitRule::first_visit;
    std::size_t mc_min_visits = 1;

    void validate() const {
        if (!(tolerance > 0)) throw ConfigError("solver tolerance must be positive");
        if (max_sweeps < 1) throw ConfigError("max_sweeps must be >= 1");
        if (mc_min_visits < 1) throw ConfigError("mc_min_visits must be >= 1");
    }
};

namespace detail {

inline MdpSpec build_effect_mdp(const MdpSpec& m, const Event& b, RewardMode mode) {
    if (m.reward_mode != RewardMode::none) throw ConfigError("MDP already carries a reward construction");
    if (b.interval) throw ConfigError("effect event '" + b.id + "' must be a state-admission template");
    if (b.predicate.empty()) throw ConfigError("effect event '" + b.id + "' has no predicate");
    if (b.predicate.uses_delta()) throw ConfigError("effect event '" + b.id + "' must not use delta atoms");
    if (m.coords.empty()) throw ConfigError("MDP has no states");
    b.validate(m.coords.front().size());

    MdpSpec out = m;
    out.effect = b;
    out.reward_mode = mode;
    out.entry_reward.assign(out.num_states, 0.0);
    const double bonus = mode == RewardMode::grit ? -1.0 : 1.0;
    std::size_t admitted = 0;
    for (std::size_t s = 0; s < out.num_states; ++s) {
        if (b.predicate.admits(out.coords[s])) {
            out.terminal[s] = true;
            out.entry_reward[s] = bonus;
            ++admitted;
        }
    }
    if (admitted == 0)
        throw ConfigError("effect event '" + b.id + "' (" + b.predicate.text() + ") is unsatisfiable on the state space");
    return out;
}

inline void require_solvable(const MdpSpec& m) {
    if (m.reward_mode == RewardMode::none) throw InputError("solver needs a grit or reach MDP");
    if (!m.has_kernel()) throw CapabilityError("tabular solvers need an explicit kernel");
    auto report = validate_mdp(m);
    if (!report.ok()) throw InputError("MDP failed validation:\n" + report.summary());
}

/// Turns a solved value table of the constructed MDP into grit/reach probabilities.
inline ValueField to_field(const MdpSpec& m, const std::vector<double>& v, double residual, std::size_t sweeps,
                           double tolerance, const std::string& solver) {
    std::vector<double> prob(m.num_states);
    const double sign = m.reward_mode == RewardMode::grit ? -1.0 : 1.0;
    for (std::size_t s = 0; s < m.num_states; ++s)
        prob[s] = m.terminal[s] ? (m.admits_effect(s) ? 1.0 : 0.0) : sign * v[s];
    const auto range = m.reward_mode == RewardMode::grit ? FieldRange::grit : FieldRange::reach;
    ValueField f = m.grid ? ValueField::on_grid(range, *m.grid, std::move(prob), m.grid->dims())
                          : ValueField::tabular(range, std::move(prob));
    f.metadata = FieldMetadata{solver, sweeps, residual, tolerance};
    return f;
}

/// Sweeps `backup` until convergence, the horizon (finite mode) or max_sweeps.
template <class Backup>
std::vector<double> iterate(const MdpSpec& m, const SolverConfig& cfg, Backup&& backup, double& residual,
                            std::size_t& sweeps) {
    std::vector<double> v(m.num_states, 0.0), next(m.num_states, 0.0);
    residual = std::numeric_limits<double>::infinity();
    sweeps = 0;
    while (true) {
        parallel_for(m.num_states, [&](std::size_t s) { next[s] = m.terminal[s] ? 0.0 : backup(s, v); });
        residual = 0.0;
        for (std::size_t s = 0; s < m.num_states; ++s) residual = std::max(residual, std::abs(next[s] - v[s]));
        v.swap(next);
        ++sweeps;
        if (residual <= cfg.tolerance) return v;
        if (!m.all_policies_proper && sweeps >= m.horizon) return v;
        if (sweeps >= cfg.max_sweeps) throw SolverError("value iteration did not converge within max_sweeps", residual);
    }
}

inline double q_value(const MdpSpec& m, std::size_t s, std::size_t a, const std::vector<double>& v) {
    double q = 0.0;
    for (const auto& tr : m.row(s, a)) q += tr.prob * (m.entry_reward[tr.next] + v[tr.next]);
    return q;
}

} // namespace detail

/// Copy of `m` with reward -1 on entering any B-admitting state, which becomes terminal.
inline MdpSpec build_grit_mdp(const MdpSpec& m, const Event& b) {
    return detail::build_effect_mdp(m, b, RewardMode::grit);
}

/// Copy of `m` with reward +1 on entering any B-admitting state, which becomes terminal.
inline MdpSpec build_reach_mdp(const MdpSpec& m, const Event& b) {
    return detail::build_effect_mdp(m, b, RewardMode::reach);
}

/**
Undiscounted optimal control on a grit or reach MDP.

Finite-horizon backward induction runs `horizon` sweeps unless the sup-norm residual drops
below the tolerance first. With `all_policies_proper` set the horizon is ignored and the
fixed point is iterated to tolerance. The grit field reports Gamma_B = -V*, the reach field
Lambda_B = V*; effect-admitting states read exactly 1.
*/
inline ValueField value_iteration(const MdpSpec& m, const SolverConfig& cfg) {
    cfg.validate();
    detail::require_solvable(m);
    double residual = 0.0;
    std::size_t sweeps = 0;
    auto v = detail::iterate(m, cfg, [&](std::size_t s, const std::vector<double>& cur) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < m.num_actions(); ++a) best = std::max(best, detail::q_value(m, s, a, cur));
        return best;
    }, residual, sweeps);
    return detail::to_field(m, v, residual, sweeps, cfg.tolerance, "value_iteration");
}

/// Fixed-policy value of a grit or reach MDP; `policy[s][a]` is the probability of action a.
inline ValueField policy_evaluation(const MdpSpec& m, const StochasticPolicy& policy, const SolverConfig& cfg) {
    cfg.validate();
    detail::require_solvable(m);
    if (policy.size() != m.num_states) throw InputError("policy must list every state");
    for (std::size_t s = 0; s < m.num_states; ++s) {
        if (m.terminal[s]) continue;
        if (policy[s].size() != m.num_actions())
            throw InputError("policy at state " + std::to_string(s) + " must give one probability per action");
        double mass = 0.0;
        for (double p : policy[s]) mass += p;
        if (std::abs(mass - 1.0) > 1e-9) throw InputError("policy at state " + std::to_string(s) + " does not sum to 1");
    }
    double residual = 0.0;
    std::size_t sweeps = 0;
    auto v = detail::iterate(m, cfg, [&](std::size_t s, const std::vector<double>& cur) {
        double q = 0.0;
        for (std::size_t a = 0; a < m.num_actions(); ++a)
            if (policy[s][a] > 0.0) q += policy[s][a] * detail::q_value(m, s, a, cur);
        return q;
    }, residual, sweeps);
    return detail::to_field(m, v, residual, sweeps, cfg.tolerance, "policy_evaluation");
}

/**
Greedy policy of the constructed MDP with respect to a solved field: for grit, the action
minimising the chance of B; for reach, the one maximising it. Ties go to the lowest index.
*/
inline DeterministicPolicy greedy_policy(const MdpSpec& m, const ValueField& field) {
    detail::require_solvable(m);
    DeterministicPolicy pi(m.num_states, 0);
    const double sign = m.reward_mode == RewardMode::grit ? -1.0 : 1.0;
    for (std::size_t s = 0; s < m.num_states; ++s) {
        if (m.terminal[s]) continue;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < m.num_actions(); ++a) {
            double q = 0.0;
            for (const auto& tr : m.row(s, a)) q += tr.prob * sign * field.at(tr.next);
            if (q > best + 1e-12) {
                best = q;
                pi[s] = a;
            }
        }
    }
    return pi;
}

inline StochasticPolicy as_stochastic(const MdpSpec& m, const DeterministicPolicy& pi) {
    StochasticPolicy out(m.num_states, std::vector<double>(m.num_actions(), 0.0));
    for (std::size_t s = 0; s < m.num_states; ++s) out[s][pi[s]] = 1.0;
    return out;
}

/**
Monte Carlo estimate of grit/reach from logged trajectories, binned on `bins` (nearest node).

Each trajectory's return is 1 if it admits B (at its annotated terminal sample or at the
first admitting sample, after which it is cut) and 0 otherwise, i.e. -V for grit and V for
reach with the entry rewards of the constructed MDPs. Nodes with fewer than
`mc_min_visits` visits are low-confidence; unvisited nodes read 0.

This is the value of the logging policy; it equals grit or reachability only when that
policy is close to optimal for the respective objective.
*/
inline ValueField monte_carlo_value(const std::vector<Trajectory>& trajs, const Event& b, RewardMode mode,
                                    const SolverConfig& cfg, const Grid& bins) {
    cfg.validate();
    if (trajs.empty()) throw InputError("monte carlo estimation needs at least one trajectory");
    if (mode == RewardMode::none) throw InputError("monte carlo estimation needs mode grit or reach");
    const std::size_t n = trajs.front().state_dims();
    const std::size_t m = trajs.front().action_dims();
    if (bins.dims() != n && bins.dims() != n + m)
        throw InputError("binning grid must cover the state (or state and action) components");
    b.validate(n + m);

    std::vector<double> sum(bins.size(), 0.0);
    std::vector<std::size_t> visits(bins.size(), 0);
    for (const auto& traj : trajs) {
        traj.validate();
        if (traj.state_dims() != n || traj.action_dims() != m) throw InputError("trajectories differ in dimension");
        std::size_t end = traj.size();
        bool reached = false;
        if (auto k = first_admission(traj, b)) {
            end = *k + 1;
            reached = true;
        } else if (traj.terminal_admits && *traj.terminal_admits == b.id) {
            reached = true;
        }
        const double ret = reached ? 1.0 : 0.0;
        std::set<std::size_t> seen;
        for (std::size_t i = 0; i < end; ++i) {
            const auto& s = traj.samples[i];
            const auto p = bins.dims() == n ? s.x : s.extended();
            const auto cell = bins.nearest(p);
            if (cfg.mc_visit_rule == VisitRule::first_visit && !seen.insert(cell).second) continue;
            sum[cell] += ret;
            ++visits[cell];
        }
    }
    std::vector<double> est(bins.size(), 0.0);
    for (std::size_t c = 0; c < bins.size(); ++c)
        if (visits[c] > 0) est[c] = sum[c] / static_cast<double>(visits[c]);
    const auto range = mode == RewardMode::grit ? FieldRange::grit : FieldRange::reach;
    ValueField f = ValueField::on_grid(range, bins, std::move(est), n);
    f.set_visits(std::move(visits), cfg.mc_min_visits);
    f.metadata = FieldMetadata{cfg.mc_visit_rule == VisitRule::first_visit ? "monte_carlo_first_visit"
                                                                             : "monte_carlo_every_visit",
                               trajs.size(), 0.0, 0.0};
    return f;
}

} // namespace gritlab
