#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gritlab {

// *******************************************************
// Errors
// *******************************************************

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed event predicate or record, or a reference to a component that does not exist.
class SchemaError : public Error { public: using Error::Error; };
/// Invalid user configuration (scenario files, unsatisfiable effect events, ...).
class ConfigError : public Error { public: using Error::Error; };
/// Missing or malformed data handed to an operation.
class InputError : public Error { public: using Error::Error; };
/// Query outside a value field's support.
class DomainError : public Error { public: using Error::Error; };
/// The operation needs something the inputs cannot provide (e.g. an action-unaware field).
class CapabilityError : public Error { public: using Error::Error; };

class SimulationError : public Error {
public:
    SimulationError(const std::string& what, std::size_t step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
    std::size_t step() const { return step_; }
private:
    std::size_t step_;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what + " (last residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const { return residual_; }
private:
    double residual_;
};

class DiscretizationError : public Error {
public:
    DiscretizationError(const std::string& what, double suggested_dt)
        : Error(what + " (suggested dt <= " + std::to_string(suggested_dt) + ")"),
          suggested_dt_(suggested_dt) {}
    double suggested_dt() const { return suggested_dt_; }
private:
    double suggested_dt_;
};

/// Enumeration or size guard of the brute-force oracle was exceeded.
class OracleLimitError : public Error { public: using Error::Error; };

// *******************************************************
// States and trajectories
// *******************************************************

/**
One sample of the process: time, state components x and action components u.

Predicates and value fields address the *extended* vector (x, u): component j < n is
x[j], component n + k is u[k].
*/
struct StateVector {
    double t = 0.0;
    std::vector<double> x;
    std::vector<double> u;

    std::size_t dims() const { return x.size() + u.size(); }

    double component(std::size_t j) const { return j < x.size() ? x[j] : u.at(j - x.size()); }

    std::vector<double> extended() const {
        std::vector<double> out(x);
        out.insert(out.end(), u.begin(), u.end());
        return out;
    }

    void validate() const {
        if (x.empty()) throw InputError("state vector must have at least one state component");
        if (!std::isfinite(t)) throw InputError("state vector time is not finite");
        for (double v : x)
            if (!std::isfinite(v)) throw InputError("state component is not finite at t=" + std::to_string(t));
        for (double v : u)
            if (!std::isfinite(v)) throw InputError("action component is not finite at t=" + std::to_string(t));
    }
};

struct Trajectory {
    std::vector<StateVector> samples;
    /// Whether the last sample is terminal.
    bool terminal = false;
    std::optional<std::string> terminal_admits;
    std::optional<std::uint64_t> seed;

    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }
    std::size_t state_dims() const { return samples.empty() ? 0 : samples.front().x.size(); }
    std::size_t action_dims() const { return samples.empty() ? 0 : samples.front().u.size(); }
    double start_time() const { return samples.front().t; }
    double end_time() const { return samples.back().t; }

    void validate() const {
        if (samples.empty()) throw InputError("trajectory is empty");
        const auto n = samples.front().x.size();
        const auto m = samples.front().u.size();
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& s = samples[i];
            s.validate();
            if (s.x.size() != n || s.u.size() != m)
                throw InputError("trajectory sample " + std::to_string(i) + " has inconsistent dimensions");
            if (i > 0 && !(s.t > samples[i - 1].t))
                throw InputError("trajectory timestamps not strictly increasing at sample " + std::to_string(i));
        }
    }

    /// Samples whose timestamps fall inside [t1, t2] (with a small relative slack).
    Trajectory slice(double t1, double t2) const {
        const double eps = 1e-9 * std::max({1.0, std::abs(t1), std::abs(t2)});
        Trajectory out;
        out.seed = seed;
        for (const auto& s : samples)
            if (s.t >= t1 - eps && s.t <= t2 + eps) out.samples.push_back(s);
        out.terminal = terminal && !out.samples.empty() && out.samples.back().t == samples.back().t;
        if (out.terminal) out.terminal_admits = terminal_admits;
        return out;
    }

    /// Index of the last sample with time <= t, or nullopt when t precedes the trajectory.
    std::optional<std::size_t> index_at(double t) const {
        const double eps = 1e-9 * std::max(1.0, std::abs(t));
        std::optional<std::size_t> found;
        for (std::size_t i = 0; i < samples.size() && samples[i].t <= t + eps; ++i) found = i;
        return found;
    }
};

} // namespace gritlab
