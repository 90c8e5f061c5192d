#pragma once

#include "gritlab/core.hpp"
#include "gritlab/event.hpp"
#include "gritlab/grid.hpp"
#include "gritlab/mdp.hpp"
#include "gritlab/parallel.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace gritlab {

enum class Face { absorb, reflect };

/**
Controlled diffusion dX = mu(X, u) dt + sigma(X, u) dW on a box, integrated with step dt.

`sigma` returns the n x n matrix row-major. Both coefficients are stationary.
*/
struct DiffusionSpec {
    using Drift = std::function<std::vector<double>(std::span<const double> x, std::span<const double> u)>;
    using Diffusion = std::function<std::vector<double>(std::span<const double> x, std::span<const double> u)>;

    std::size_t n = 1;
    std::size_t m = 0;
    std::vector<std::string> names;
    Drift mu;
    Diffusion sigma;
    double dt = 1e-3;
    std::vector<double> lower, upper;
    std::vector<Face> lower_face, upper_face;
    double horizon = 1.0;

    void validate() const {
        if (n < 1) throw ConfigError("diffusion needs n >= 1");
        if (!(dt > 0)) throw ConfigError("diffusion dt must be positive");
        if (!(horizon > 0)) throw ConfigError("diffusion horizon must be positive");
        if (!mu || !sigma) throw ConfigError("diffusion needs drift and diffusion functions");
        if (lower.size() != n || upper.size() != n || lower_face.size() != n || upper_face.size() != n)
            throw ConfigError("diffusion domain needs bounds and face behaviour for every component");
        for (std::size_t j = 0; j < n; ++j)
            if (!(lower[j] < upper[j])) throw ConfigError("diffusion bounds of component " + std::to_string(j) + " are not well ordered");
        if (!names.empty() && names.size() != n) throw ConfigError("diffusion names must cover every component");
    }

    /// sigma * sigma^T, row-major.
    std::vector<double> covariance(std::span<const double> x, std::span<const double> u) const {
        const auto s = sigma(x, u);
        std::vector<double> c(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k) c[i * n + j] += s[i * n + k] * s[j * n + k];
        return c;
    }

    std::size_t component(const std::string& name) const {
        for (std::size_t j = 0; j < names.size(); ++j)
            if (names[j] == name) return j;
        throw ConfigError("unknown component '" + name + "'");
    }

    /// Names of the extended (x, u) components, for predicate parsing.
    std::vector<std::string> extended_names() const {
        std::vector<std::string> out = names;
        if (out.empty())
            for (std::size_t j = 0; j < n; ++j) out.push_back("x" + std::to_string(j));
        for (std::size_t k = 0; k < m; ++k) out.push_back("u" + std::to_string(k));
        return out;
    }
};

struct PolicySegment {
    double start = 0.0;
    std::vector<double> u;
};

struct Impulse {
    double time = 0.0;
    std::size_t component = 0;
    double amount = 0.0;
};

struct ScenarioSpec {
    std::string name;
    DiffusionSpec diffusion;
    std::vector<double> initial;
    /// Piecewise-constant action schedule; each segment holds from its start time.
    std::vector<PolicySegment> policy;
    std::vector<Impulse> impulses;
    Event effect;
    std::size_t episodes = 1;
    std::uint64_t seed = 0;
    /// Record every k-th step (terminal samples are always recorded).
    std::size_t record_stride = 1;

    void validate() const {
        diffusion.validate();
        if (initial.size() != diffusion.n) throw ConfigError("initial state must have n components");
        if (episodes < 1) throw ConfigError("episode count must be >= 1");
        if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
        for (const auto& seg : policy)
            if (seg.u.size() != diffusion.m) throw ConfigError("policy actions must have m components");
        for (const auto& imp : impulses) {
            if (imp.time < 0 || imp.time > diffusion.horizon)
                throw ConfigError("impulse time " + std::to_string(imp.time) + " outside [0, horizon]");
            if (imp.component >= diffusion.n) throw ConfigError("impulse component out of range");
        }
        effect.validate(diffusion.n + diffusion.m);
        if (effect.predicate.empty() || effect.predicate.uses_delta())
            throw ConfigError("effect event must be a state-admission predicate");
    }

    std::vector<double> action_at(double t) const {
        std::vector<double> u(diffusion.m, 0.0);
        for (const auto& seg : policy)
            if (seg.start <= t + 1e-12) u = seg.u;
        return u;
    }
};

/**
Episode RNG seed: SplitMix64 of (seed, episode). Episode e of a scenario always draws from
std::mt19937_64 seeded with episode_seed(seed, e), independent of thread count.
*/
inline std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t episode) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(seed ^ mix(episode + 1));
}

inline Trajectory simulate_episode(const ScenarioSpec& s, std::size_t episode) {
    const auto& d = s.diffusion;
    const std::uint64_t seed = episode_seed(s.seed, episode);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    Trajectory traj;
    traj.seed = seed;
    const auto steps = static_cast<std::size_t>(std::floor(d.horizon / d.dt + 1e-9));
    const double sqdt = std::sqrt(d.dt);
    std::vector<double> x = s.initial;
    std::vector<double> z(d.n);

    auto apply_impulses = [&](double from, double to, bool first) {
        for (const auto& imp : s.impulses)
            if ((first ? imp.time <= to + 1e-12 : imp.time > from + 1e-12 && imp.time <= to + 1e-12))
                x[imp.component] += imp.amount;
    };
    auto settle = [&](bool& absorbed) {
        for (std::size_t j = 0; j < d.n; ++j) {
            if (x[j] < d.lower[j]) {
                if (d.lower_face[j] == Face::absorb) {
                    x[j] = d.lower[j];
                    absorbed = true;
                } else {
                    x[j] = std::min(2.0 * d.lower[j] - x[j], d.upper[j]);
                }
            } else if (x[j] > d.upper[j]) {
                if (d.upper_face[j] == Face::absorb) {
                    x[j] = d.upper[j];
                    absorbed = true;
                } else {
                    x[j] = std::max(2.0 * d.upper[j] - x[j], d.lower[j]);
                }
            }
        }
    };

    std::vector<double> u = s.action_at(0.0);
    apply_impulses(0.0, 0.0, true);
    bool absorbed = false;
    settle(absorbed);
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * d.dt;
        StateVector sample{t, x, u};
        const bool hit = s.effect.admits(sample);
        const bool last = hit || absorbed || k >= steps;
        if (last || k % s.record_stride == 0) traj.samples.push_back(sample);
        if (last) {
            traj.terminal = true;
            if (hit) traj.terminal_admits = s.effect.id;
            break;
        }

        const auto drift = d.mu(x, u);
        const auto sig = d.sigma(x, u);
        for (auto& zi : z) zi = normal(rng);
        for (std::size_t i = 0; i < d.n; ++i) {
            double noise = 0.0;
            for (std::size_t j = 0; j < d.n; ++j) noise += sig[i * d.n + j] * z[j];
            x[i] += drift[i] * d.dt + noise * sqdt;
            if (!std::isfinite(x[i]))
                throw SimulationError("non-finite state component " + std::to_string(i), k + 1);
        }
        const double t_next = static_cast<double>(k + 1) * d.dt;
        u = s.action_at(t_next);
        apply_impulses(t, t_next, false);
        settle(absorbed);
    }
    return traj;
}

/// Euler-Maruyama episodes, each on its own RNG stream; bit-reproducible for a fixed seed.
inline std::vector<Trajectory> simulate(const ScenarioSpec& s) {
    s.validate();
    std::vector<Trajectory> out(s.episodes);
    parallel_for(s.episodes, [&](std::size_t e) { out[e] = simulate_episode(s, e); });
    return out;
}

namespace detail {

/// One-axis displacement law on lattice offsets {..., -1, 0, 1, ...} (units of h).
inline std::vector<std::pair<long, double>> axis_law(double mean, double var, double h) {
    std::vector<std::pair<long, double>> law;
    if (h <= 0.0) return {{0, 1.0}};
    const double am = std::abs(mean);
    if (var <= am * (h - am) + 1e-15 * h * h) {
        // two-point split matching the mean exactly
        const double pos = mean / h;
        const double lo = std::floor(pos);
        const double frac = pos - lo;
        law.emplace_back(static_cast<long>(lo), 1.0 - frac);
        if (frac > 0.0) law.emplace_back(static_cast<long>(lo) + 1, frac);
    } else if (var + mean * mean <= h * h) {
        // three-point stencil matching mean and variance exactly
        const double second = (var + mean * mean) / (h * h);
        law.emplace_back(-1, 0.5 * second - 0.5 * mean / h);
        law.emplace_back(0, 1.0 - second);
        law.emplace_back(1, 0.5 * second + 0.5 * mean / h);
    } else {
        // Gaussian mass of each node's cell
        const double sd = std::sqrt(var);
        const auto reach = static_cast<long>(std::ceil((am + 6.0 * sd) / h));
        auto cdf = [&](double v) { return 0.5 * std::erfc(-(v - mean) / (sd * std::sqrt(2.0))); };
        for (long k = -reach; k <= reach; ++k) {
            const double p = cdf((static_cast<double>(k) + 0.5) * h) - cdf((static_cast<double>(k) - 0.5) * h);
            if (p > 1e-15) law.emplace_back(k, p);
        }
    }
    double mass = 0.0;
    for (const auto& [k, p] : law) mass += p;
    for (auto& [k, p] : law) p /= mass;
    return law;
}

inline std::size_t fold_index(long j, std::size_t points, Face lo, Face hi) {
    const long last = static_cast<long>(points) - 1;
    if (last == 0) return 0;
    for (int guard = 0; guard < 64 && (j < 0 || j > last); ++guard) {
        if (j < 0) j = lo == Face::absorb ? 0 : -j;
        if (j > last) j = hi == Face::absorb ? last : 2 * last - j;
    }
    return static_cast<std::size_t>(std::clamp<long>(j, 0, last));
}

} // namespace detail

/**
Markov-chain approximation of a diffusion on a node grid over its domain.

Each axis moves independently by a lattice law matching the local Gaussian step (mean
mu dt, variance (sigma sigma^T)_jj dt): an exact mean split when the variance is below the
lattice minimum, an exact mean-and-variance three-point stencil when it fits in one cell,
and Gaussian cell masses otherwise. Mass leaving the box folds back on reflecting faces and
stops on absorbing ones; nodes on absorbing faces are terminal. Requires diagonal
sigma sigma^T and a mean step of at most one cell.
*/
inline MdpSpec discretize(const DiffusionSpec& d, const std::vector<std::size_t>& points,
                          const std::vector<std::vector<double>>& action_set) {
    d.validate();
    if (points.size() != d.n) throw ConfigError("grid needs a point count per component");
    if (action_set.empty()) throw ConfigError("action set must not be empty");
    for (const auto& u : action_set)
        if (u.size() != d.m) throw ConfigError("every action needs m components");
    Grid grid(d.lower, d.upper, points);

    MdpSpec m;
    m.num_states = grid.size();
    m.grid = grid;
    m.component_names = d.names;
    for (std::size_t a = 0; a < action_set.size(); ++a) m.actions.push_back(Action{"a" + std::to_string(a), action_set[a]});
    m.kernel.assign(m.num_states * m.actions.size(), {});
    m.terminal.assign(m.num_states, false);
    m.entry_reward.assign(m.num_states, 0.0);
    m.horizon = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(d.horizon / d.dt - 1e-9)));
    m.coords.resize(m.num_states);

    double worst_ratio = 0.0;
    for (std::size_t s = 0; s < m.num_states; ++s) {
        m.coords[s] = grid.coords(s);
        const auto idx = grid.unflatten(s);
        for (std::size_t j = 0; j < d.n; ++j) {
            if ((idx[j] == 0 && d.lower_face[j] == Face::absorb) ||
                (idx[j] + 1 == points[j] && d.upper_face[j] == Face::absorb))
                m.terminal[s] = true;
        }
        if (m.terminal[s]) continue;
        for (std::size_t a = 0; a < action_set.size(); ++a) {
            const auto& u = action_set[a];
            const auto mu = d.mu(m.coords[s], u);
            const auto cov = d.covariance(m.coords[s], u);
            std::vector<std::vector<std::pair<long, double>>> laws(d.n);
            for (std::size_t j = 0; j < d.n; ++j) {
                for (std::size_t i = 0; i < d.n; ++i)
                    if (i != j && std::abs(cov[j * d.n + i]) > 1e-12)
                        throw ConfigError("discretize supports diagonal sigma sigma^T only");
                const double h = grid.spacing(j);
                const double mean = mu[j] * d.dt;
                if (!std::isfinite(mean) || !std::isfinite(cov[j * d.n + j]))
                    throw ConfigError("non-finite drift or diffusion at grid node " + std::to_string(s));
                if (h > 0.0) worst_ratio = std::max(worst_ratio, std::abs(mean) / h);
                laws[j] = detail::axis_law(mean, cov[j * d.n + j] * d.dt, h);
            }
            if (worst_ratio > 1.0 + 1e-9) continue;
            std::map<std::size_t, double> row;
            std::vector<std::size_t> pick(d.n, 0), target(d.n);
            for (bool done = false; !done;) {
                double p = 1.0;
                for (std::size_t j = 0; j < d.n; ++j) {
                    const auto& [off, pj] = laws[j][pick[j]];
                    p *= pj;
                    target[j] = detail::fold_index(static_cast<long>(idx[j]) + off, points[j], d.lower_face[j],
                                                   d.upper_face[j]);
                }
                if (p > 0.0) row[grid.flatten(target)] += p;
                // odometer over the per-axis laws
                for (std::size_t j = d.n;;) {
                    if (j == 0) {
                        done = true;
                        break;
                    }
                    --j;
                    if (++pick[j] < laws[j].size()) break;
                    pick[j] = 0;
                }
            }
            double mass = 0.0;
            for (const auto& [next, p] : row) mass += p;
            auto& out = m.row(s, a);
            for (const auto& [next, p] : row) out.push_back(Transition{next, p / mass});
        }
    }
    if (worst_ratio > 1.0 + 1e-9)
        throw DiscretizationError("mean step exceeds one grid cell", d.dt / worst_ratio);
    return m;
}

} // namespace gritlab
