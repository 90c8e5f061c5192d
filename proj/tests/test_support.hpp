#pragma once

#include "gritlab/gritlab.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace gritlab::testing {

/// Random transition row over `targets` with strictly positive probabilities summing to one.
inline std::vector<Transition> random_row(std::mt19937_64& rng, const std::vector<std::size_t>& targets) {
    std::uniform_real_distribution<double> w(0.05, 1.0);
    std::vector<double> p;
    double sum = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) sum += p.emplace_back(w(rng));
    std::vector<Transition> row;
    double used = 0.0;
    for (std::size_t i = 0; i + 1 < targets.size(); ++i) {
        row.push_back(Transition{targets[i], p[i] / sum});
        used += p[i] / sum;
    }
    row.push_back(Transition{targets.back(), 1.0 - used});
    return row;
}

/**
Random enumerated MDP with a target state (the last) and a losing sink (the one before).

Acyclic instances only move to higher-indexed states, so every path ends within
`num_states` steps. Leaky instances may revisit states but send at least `leak` of each
row's mass to the sink, so every policy terminates.
*/
inline MdpSpec random_mdp(std::mt19937_64& rng, bool acyclic, std::size_t max_states = 8, std::size_t max_actions = 3) {
    std::uniform_int_distribution<std::size_t> ns(3, max_states), na(1, max_actions);
    const std::size_t n = ns(rng), a = na(rng);
    std::vector<std::string> names;
    for (std::size_t k = 0; k < a; ++k) names.push_back("a" + std::to_string(k));
    auto m = MdpSpec::enumerated(n, names, acyclic ? n : 20);
    const std::size_t target = n - 1, sink = n - 2;
    m.terminal[sink] = true;
    m.terminal[target] = true;
    m.all_policies_proper = !acyclic;
    for (std::size_t s = 0; s < sink; ++s) {
        for (std::size_t k = 0; k < a; ++k) {
            std::vector<std::size_t> pool;
            for (std::size_t t = acyclic ? s + 1 : 0; t < n; ++t) pool.push_back(t);
            std::shuffle(pool.begin(), pool.end(), rng);
            std::uniform_int_distribution<std::size_t> width(1, std::min<std::size_t>(3, pool.size()));
            pool.resize(width(rng));
            auto row = random_row(rng, pool);
            if (!acyclic) {
                for (auto& tr : row) tr.prob *= 0.9;
                row.push_back(Transition{sink, 0.1});
            }
            m.row(s, k) = row;
        }
    }
    return m;
}

/// Effect admitted by the last state of an enumerated MDP.
inline Event last_state_effect(const MdpSpec& m) {
    return Event::admission("B", Predicate::parse("value(0) >= " + std::to_string(m.num_states - 1)));
}

inline StateVector sv(double t, std::vector<double> x, std::vector<double> u = {}) {
    return StateVector{t, std::move(x), std::move(u)};
}

} // namespace gritlab::testing
