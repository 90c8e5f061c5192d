#pragma once

#include "gritlab/core.hpp"
#include "gritlab/event.hpp"
#include "gritlab/grid.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace gritlab {

struct Transition {
    std::size_t next = 0;
    double prob = 0.0;
};

enum class RewardMode { none, grit, reach };

inline const char* to_string(RewardMode m) {
    switch (m) {
    case RewardMode::none: return "none";
    case RewardMode::grit: return "grit";
    case RewardMode::reach: return "reach";
    }
    return "?";
}

struct Action {
    std::string name;
    std::vector<double> u;
};

/**
Finite-state, finite-action MDP with an explicit kernel (or a generative step function).

States are either enumerated (coordinates default to the state index) or the nodes of a
Grid. Terminal states absorb and need no kernel rows. Rewards are attached to the
transition *entering* a state.
*/
struct MdpSpec {
    std::size_t num_states = 0;
    std::optional<Grid> grid;
    /// Per-state coordinates in the extended component space used by predicates.
    std::vector<std::vector<double>> coords;
    std::vector<std::string> component_names;
    std::vector<Action> actions;
    /// kernel[s * actions.size() + a]
    std::vector<std::vector<Transition>> kernel;
    std::vector<bool> terminal;
    RewardMode reward_mode = RewardMode::none;
    std::optional<Event> effect;
    /// Reward for entering each state.
    std::vector<double> entry_reward;
    std::size_t horizon = 1;
    /// User assertion that every policy terminates w.p. 1; enables fixed-point iteration.
    bool all_policies_proper = false;

    using Generator = std::function<std::size_t(std::size_t state, std::size_t action, std::mt19937_64&)>;
    Generator generator;

    std::size_t num_actions() const { return actions.size(); }
    bool has_kernel() const { return !kernel.empty(); }

    const std::vector<Transition>& row(std::size_t s, std::size_t a) const { return kernel[s * actions.size() + a]; }
    std::vector<Transition>& row(std::size_t s, std::size_t a) { return kernel[s * actions.size() + a]; }

    bool admits_effect(std::size_t s) const { return effect && effect->predicate.admits(coords[s]); }

    /// Enumerated spec with `n` states and named actions; kernel rows start empty.
    static MdpSpec enumerated(std::size_t n, std::vector<std::string> action_names, std::size_t horizon) {
        MdpSpec m;
        m.num_states = n;
        for (std::size_t s = 0; s < n; ++s) m.coords.push_back({static_cast<double>(s)});
        m.component_names = {"state"};
        for (auto& name : action_names) m.actions.push_back(Action{std::move(name), {}});
        m.kernel.assign(n * m.actions.size(), {});
        m.terminal.assign(n, false);
        m.entry_reward.assign(n, 0.0);
        m.horizon = horizon;
        return m;
    }

    std::size_t sample_next(std::size_t s, std::size_t a, std::mt19937_64& rng) const {
        if (has_kernel()) {
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            double r = unif(rng);
            const auto& rw = row(s, a);
            for (const auto& tr : rw) {
                if (r < tr.prob) return tr.next;
                r -= tr.prob;
            }
            return rw.back().next;
        }
        if (generator) return generator(s, a, rng);
        throw CapabilityError("MDP has neither an explicit kernel nor a generator");
    }
};

struct Violation {
    std::string where;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string summary() const {
        std::ostringstream os;
        for (const auto& v : violations) os << v.where << ": " << v.message << '\n';
        return os.str();
    }
};

/// Checks every MdpSpec invariant; reports each violation with its location.
inline ValidationReport validate_mdp(const MdpSpec& m) {
    ValidationReport r;
    auto add = [&](std::string where, std::string msg) { r.violations.push_back({std::move(where), std::move(msg)}); };

    if (m.num_states == 0) add("states", "no states");
    if (m.actions.empty()) add("actions", "no actions");
    if (m.horizon < 1) add("horizon", "horizon must be finite and >= 1");
    if (m.coords.size() != m.num_states) add("coords", "expected one coordinate vector per state");
    if (m.terminal.size() != m.num_states) add("terminal", "expected one terminal flag per state");
    if (m.entry_reward.size() != m.num_states) add("rewards", "expected one entry reward per state");
    if (m.grid && m.grid->size() != m.num_states) add("grid", "grid node count differs from state count");
    if (!r.ok()) return r;

    const std::size_t dims = m.coords.front().size();
    for (std::size_t s = 0; s < m.num_states; ++s)
        if (m.coords[s].size() != dims) add("state " + std::to_string(s), "coordinate dimension differs");

    if (m.effect) {
        try {
            m.effect->validate(dims);
            if (m.effect->predicate.uses_delta()) add("effect", "effect predicate must be a state-admission predicate");
        } catch (const SchemaError& e) {
            add("effect", e.what());
        }
    }
    if (!r.ok()) return r;

    if (m.has_kernel()) {
        if (m.kernel.size() != m.num_states * m.num_actions()) {
            add("kernel", "expected one row per (state, action)");
            return r;
        }
        for (std::size_t s = 0; s < m.num_states; ++s) {
            if (m.terminal[s]) continue;
            for (std::size_t a = 0; a < m.num_actions(); ++a) {
                const auto where = "state " + std::to_string(s) + " action " + std::to_string(a);
                double mass = 0.0;
                for (const auto& tr : m.row(s, a)) {
                    if (tr.next >= m.num_states) add(where, "successor " + std::to_string(tr.next) + " out of range");
                    if (!(tr.prob >= 0.0 && tr.prob <= 1.0)) add(where, "probability outside [0, 1]");
                    mass += tr.prob;
                }
                if (std::abs(mass - 1.0) > 1e-12) {
                    std::ostringstream os;
                    os << "row mass " << mass << " \xE2\x89\xA0 1";
                    add(where, os.str());
                }
            }
        }
    } else if (!m.generator) {
        add("kernel", "neither an explicit kernel nor a generative step function");
    }

    if (m.reward_mode != RewardMode::none) {
        if (!m.effect) {
            add("effect", "reward mode requires an effect event");
        } else {
            const double bonus = m.reward_mode == RewardMode::grit ? -1.0 : 1.0;
            for (std::size_t s = 0; s < m.num_states; ++s) {
                const bool admits = m.admits_effect(s);
                if (admits && !m.terminal[s])
                    add("state " + std::to_string(s),
                        "admits the effect event but is not terminal (grit/reach construction needs every "
                        "effect-admitting state terminal)");
                const double want = admits ? bonus : 0.0;
                if (m.entry_reward[s] != want)
                    add("state " + std::to_string(s), "entry reward does not match the " +
                                                          std::string(to_string(m.reward_mode)) + " construction");
            }
        }
    }
    return r;
}

/// Deterministic state-action policy given as per-state action probabilities.
using StochasticPolicy = std::vector<std::vector<double>>;
using DeterministicPolicy = std::vector<std::size_t>;

/// Rolls out one episode of a tabular MDP into a trajectory whose x is the state's coordinates.
inline Trajectory rollout(const MdpSpec& m, std::size_t start, const StochasticPolicy& policy, std::mt19937_64& rng) {
    Trajectory traj;
    std::size_t s = start;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t step = 0;; ++step) {
        traj.samples.push_back(StateVector{static_cast<double>(step), m.coords[s], {}});
        if (m.terminal[s]) {
            traj.terminal = true;
            if (m.admits_effect(s)) traj.terminal_admits = m.effect->id;
            break;
        }
        if (step >= m.horizon) break;
        double r = unif(rng);
        std::size_t a = 0;
        for (; a + 1 < policy[s].size(); ++a) {
            if (r < policy[s][a]) break;
            r -= policy[s][a];
        }
        s = m.sample_next(s, a, rng);
    }
    return traj;
}

} // namespace gritlab
