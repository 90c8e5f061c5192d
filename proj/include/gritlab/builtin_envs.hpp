#pragma once

#include "gritlab/diffusion.hpp"
#include "gritlab/event.hpp"
#include "gritlab/mdp.hpp"
#include "gritlab/predicate.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace gritlab {

namespace detail {

inline DiffusionSpec box_diffusion(std::vector<std::string> names, std::vector<double> lower, std::vector<double> upper,
                                   std::vector<Face> lower_face, std::vector<Face> upper_face) {
    DiffusionSpec d;
    d.n = names.size();
    d.names = std::move(names);
    d.lower = std::move(lower);
    d.upper = std::move(upper);
    d.lower_face = std::move(lower_face);
    d.upper_face = std::move(upper_face);
    return d;
}

inline DiffusionSpec::Diffusion diagonal_sigma(std::vector<double> s) {
    return [s](std::span<const double>, std::span<const double>) {
        const std::size_t n = s.size();
        std::vector<double> out(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) out[i * n + i] = s[i];
        return out;
    };
}

inline Event effect_event(const DiffusionSpec& d, const std::string& text) {
    const auto names = d.extended_names();
    return Event::admission("B", Predicate::parse(text, names));
}

} // namespace detail

/**
Driftless unit Brownian motion on [0, 1], absorbed at both ends, started at 0.25.
The right barrier is hit first with probability x (gambler's ruin), so Lambda(x) = x.
*/
inline ScenarioSpec bm_barrier() {
    ScenarioSpec s;
    s.name = "bm_barrier";
    auto& d = s.diffusion;
    d = detail::box_diffusion({"x"}, {0.0}, {1.0}, {Face::absorb}, {Face::absorb});
    d.mu = [](std::span<const double>, std::span<const double>) { return std::vector<double>{0.0}; };
    d.sigma = detail::diagonal_sigma({1.0});
    d.dt = 1e-4;
    d.horizon = 50.0;
    s.initial = {0.25};
    s.effect = detail::effect_event(d, "value(x) >= 1");
    s.episodes = 20000;
    s.seed = 1;
    s.record_stride = 1000;
    return s;
}

/// Ornstein-Uhlenbeck process with an additive control, reflected on [-2, 2].
inline ScenarioSpec ou_1d(double theta = 1.0, double sigma = 0.5) {
    ScenarioSpec s;
    s.name = "ou_1d";
    auto& d = s.diffusion;
    d = detail::box_diffusion({"x"}, {-2.0}, {2.0}, {Face::reflect}, {Face::reflect});
    d.m = 1;
    d.mu = [theta](std::span<const double> x, std::span<const double> u) {
        return std::vector<double>{-theta * x[0] + (u.empty() ? 0.0 : u[0])};
    };
    d.sigma = detail::diagonal_sigma({sigma});
    d.dt = 0.01;
    d.horizon = 10.0;
    s.initial = {0.0};
    s.policy = {PolicySegment{0.0, {0.0}}};
    s.effect = detail::effect_event(d, "value(x) >= 1.5");
    s.episodes = 100;
    s.seed = 1;
    return s;
}

/// Action set used when discretizing ou_1d.
inline std::vector<std::vector<double>> ou_1d_actions() { return {{-0.5}, {0.0}, {0.5}}; }

/**
Three components where a drives both a_prime and b through separate channels:

    da  = -0.5 a dt + 0.05 dW
    da' = (a - 0.5 a') dt + 0.05 dW
    db  = (2 a - 0.5 - 0.5 b) dt + 0.2 dW

An impulse of 1.5 on a at t = 0.5 pushes b over 1 (the effect) in most episodes, while b
never reads a_prime. b is absorbed at -0.5, where the effect can no longer happen.
*/
inline ScenarioSpec chain_correlation() {
    ScenarioSpec s;
    s.name = "chain_correlation";
    auto& d = s.diffusion;
    d = detail::box_diffusion({"a", "a_prime", "b"}, {-0.5, -0.5, -0.5}, {2.0, 1.5, 1.5},
                              {Face::reflect, Face::reflect, Face::absorb}, {Face::reflect, Face::reflect, Face::reflect});
    d.mu = [](std::span<const double> x, std::span<const double>) {
        return std::vector<double>{-0.5 * x[0], x[0] - 0.5 * x[1], 2.0 * x[0] - 0.5 - 0.5 * x[2]};
    };
    d.sigma = detail::diagonal_sigma({0.05, 0.05, 0.2});
    d.dt = 0.01;
    d.horizon = 4.0;
    s.initial = {0.0, 0.0, 0.0};
    s.impulses = {Impulse{0.5, 0, 1.5}};
    s.effect = detail::effect_event(d, "value(b) >= 1");
    s.episodes = 200;
    s.seed = 7;
    return s;
}

/// Grid node counts used for the chain_correlation grit field.
inline std::vector<std::size_t> chain_correlation_grid() { return {51, 9, 41}; }

/// Rate constants of the glucose toy model (per minute).
struct GlucoseParams {
    double k_abs = 0.02;    ///< gut absorption
    double f = 1.0;         ///< gut-to-plasma conversion
    double k_egp = 0.01;    ///< relaxation of plasma glucose to basal
    double g_basal = 120.0; ///< mg/dL
    double s_i = 0.001;     ///< insulin sensitivity
    double k_i = 0.007;     ///< insulin clearance
    double sigma_g = 1.0;   ///< plasma noise, mg/dL per sqrt(min)
};

/**
Three-compartment glucose model: gut glucose, plasma glucose and a subcutaneous insulin
proxy SI1.

    d gut    = -k_abs gut dt
    d plasma = (k_abs f gut + k_egp (Gb - plasma) - s_i SI1 plasma) dt + sigma_g dW
    d SI1    = -k_i SI1 dt

Meals and insulin boluses are impulses. The scripted day doses 7 units at 180 min, eats
60 g at 300 min and doses 14 units at 510 min; the late dose drives plasma below 70 mg/dL.
*/
inline ScenarioSpec glucose_toy(const GlucoseParams& p = {}) {
    ScenarioSpec s;
    s.name = "glucose_toy";
    auto& d = s.diffusion;
    d = detail::box_diffusion({"gut", "plasma", "SI1"}, {0.0, 40.0, 0.0}, {80.0, 200.0, 16.0},
                              {Face::reflect, Face::reflect, Face::reflect}, {Face::reflect, Face::reflect, Face::reflect});
    d.mu = [p](std::span<const double> x, std::span<const double>) {
        return std::vector<double>{-p.k_abs * x[0], p.k_abs * p.f * x[0] + p.k_egp * (p.g_basal - x[1]) - p.s_i * x[2] * x[1],
                                   -p.k_i * x[2]};
    };
    d.sigma = detail::diagonal_sigma({0.0, p.sigma_g, 0.0});
    d.dt = 1.0;
    d.horizon = 1440.0;
    s.initial = {0.0, p.g_basal, 0.0};
    s.impulses = {Impulse{180.0, 2, 7.0}, Impulse{300.0, 0, 60.0}, Impulse{510.0, 2, 14.0}};
    s.effect = detail::effect_event(d, "value(plasma) <= 70");
    s.episodes = 50;
    s.seed = 11;
    return s;
}

inline std::vector<std::size_t> glucose_toy_grid() { return {9, 33, 33}; }

/// Look-ahead (in steps) of the grit field used for glucose_toy.
inline constexpr std::size_t glucose_toy_lookahead = 720;

inline const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"bm_barrier", "ou_1d", "chain_correlation", "glucose_toy"};
    return names;
}

inline ScenarioSpec builtin_env(const std::string& name) {
    if (name == "bm_barrier") return bm_barrier();
    if (name == "ou_1d") return ou_1d();
    if (name == "chain_correlation") return chain_correlation();
    if (name == "glucose_toy") return glucose_toy();
    throw ConfigError("unknown builtin environment '" + name + "'");
}

/**
One-dimensional catch: a ball falls one row per step down column `ball_col` while a paddle
on the bottom row moves left, stays or moves right. States are (row, paddle); the effect
"lose" is reaching the bottom row with the paddle elsewhere.
*/
inline MdpSpec catch_gridworld(std::size_t rows = 8, std::size_t width = 5, std::size_t ball_col = 4) {
    if (rows < 2 || width < 2 || ball_col >= width) throw ConfigError("catch gridworld needs rows >= 2, width >= 2 and a ball column inside the board");
    Grid grid({0.0, 0.0}, {static_cast<double>(rows - 1), static_cast<double>(width - 1)}, {rows, width});
    MdpSpec m;
    m.num_states = grid.size();
    m.grid = grid;
    m.component_names = {"row", "paddle"};
    m.actions = {Action{"left", {}}, Action{"stay", {}}, Action{"right", {}}};
    m.kernel.assign(m.num_states * 3, {});
    m.terminal.assign(m.num_states, false);
    m.entry_reward.assign(m.num_states, 0.0);
    m.horizon = rows;
    m.all_policies_proper = true;
    for (std::size_t s = 0; s < m.num_states; ++s) {
        m.coords.push_back(grid.coords(s));
        const auto idx = grid.unflatten(s);
        if (idx[0] + 1 == rows) {
            m.terminal[s] = true;
            continue;
        }
        for (std::size_t a = 0; a < 3; ++a) {
            const long p = std::clamp<long>(static_cast<long>(idx[1]) + static_cast<long>(a) - 1, 0,
                                            static_cast<long>(width) - 1);
            const std::vector<std::size_t> next{idx[0] + 1, static_cast<std::size_t>(p)};
            m.row(s, a).push_back(Transition{grid.flatten(next), 1.0});
        }
    }
    return m;
}

/// The "lose" effect of catch_gridworld: bottom row reached away from the ball's column.
inline Event catch_lose_event(std::size_t rows = 8, std::size_t width = 5, std::size_t ball_col = 4) {
    const std::vector<std::string> names{"row", "paddle"};
    std::string text = "value(row) >= " + std::to_string(rows - 1) + " and (";
    bool first = true;
    if (ball_col > 0) {
        text += "value(paddle) <= " + std::to_string(ball_col - 1);
        first = false;
    }
    if (ball_col + 1 < width) {
        if (!first) text += " or ";
        text += "value(paddle) >= " + std::to_string(ball_col + 1);
    }
    text += ")";
    return Event::admission("lose", Predicate::parse(text, names));
}

} // namespace gritlab
