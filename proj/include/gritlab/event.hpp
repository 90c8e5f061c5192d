#pragma once

#include "gritlab/core.hpp"
#include "gritlab/predicate.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gritlab {

struct Interval {
    double t1 = 0.0;
    double t2 = 0.0;
    double length() const { return t2 - t1; }
};

/**
A change of one or more ruling components over a time interval, admitted by a predicate.

Ruling components index the extended (x, u) vector; indices >= the state dimension are
action components (actions are folded into the state for detection).
*/
struct Event {
    std::string id;
    std::set<std::size_t> ruling;
    std::optional<Interval> interval;
    Predicate predicate;

    /// Effect-style event: a state-admission predicate whose ruling set is what it references.
    static Event admission(std::string id, Predicate p) {
        Event e;
        e.id = std::move(id);
        e.ruling = p.components();
        e.predicate = std::move(p);
        return e;
    }

    static Event on_interval(std::string id, std::set<std::size_t> ruling, Interval iv, Predicate p = {}) {
        Event e;
        e.id = std::move(id);
        e.ruling = std::move(ruling);
        e.interval = iv;
        e.predicate = std::move(p);
        return e;
    }

    bool is_state_component(std::size_t j, std::size_t state_dims) const { return j < state_dims; }

    void validate(std::size_t dims) const {
        if (ruling.empty()) throw SchemaError("event '" + id + "' has no ruling components");
        for (auto j : ruling)
            if (j >= dims)
                throw SchemaError("event '" + id + "' rules component " + std::to_string(j) + " but only " +
                                  std::to_string(dims) + " components exist");
        if (interval && !(interval->t1 < interval->t2))
            throw SchemaError("event '" + id + "' interval must satisfy t1 < t2");
        if (!predicate.empty()) {
            predicate.check_dims(dims);
            for (auto j : predicate.components())
                if (!ruling.count(j))
                    throw SchemaError("event '" + id + "' predicate references non-ruling component " +
                                      std::to_string(j));
        }
    }

    /// State admission on one sample (effect events).
    bool admits(const StateVector& s) const { return predicate.admits(s.extended()); }
};

/**
Scans a trajectory for windows admitted by the template predicate.

Greedy left to right: from each start sample the longest admitted window no longer than
`max_window` is emitted and scanning resumes at its end sample, so returned intervals only
share endpoints. Starts with no admitted window advance by one sample.
*/
inline std::vector<Event> detect_events(const Trajectory& traj, const Event& templ, double max_window) {
    if (templ.interval) throw InputError("detect_events expects a template without a fixed interval");
    if (traj.empty()) throw InputError("detect_events on an empty trajectory");
    if (!(max_window > 0)) throw InputError("event window must be positive");
    const auto dims = traj.samples.front().dims();
    templ.validate(dims);

    std::vector<Event> out;
    const auto& s = traj.samples;
    std::size_t i = 0;
    while (i + 1 < s.size()) {
        const auto before = s[i].extended();
        std::optional<std::size_t> best;
        const double eps = 1e-9 * std::max(1.0, max_window);
        for (std::size_t k = i + 1; k < s.size() && s[k].t - s[i].t <= max_window + eps; ++k)
            if (templ.predicate.holds(before, s[k].extended())) best = k;
        if (best) {
            Event e = templ;
            e.id = templ.id + "@" + std::to_string(out.size());
            e.interval = Interval{s[i].t, s[*best].t};
            out.push_back(std::move(e));
            i = *best;
        } else {
            ++i;
        }
    }
    return out;
}

/// Index of the first sample admitting the effect event, if any.
inline std::optional<std::size_t> first_admission(const Trajectory& traj, const Event& effect) {
    for (std::size_t i = 0; i < traj.samples.size(); ++i)
        if (effect.admits(traj.samples[i])) return i;
    return std::nullopt;
}

/**
Occurrence interval [T, T'] of an effect event: T' is the first admitting sample and T the
sample before it (or T' itself when the trajectory starts admitted).
*/
inline std::optional<Interval> effect_occurrence(const Trajectory& traj, const Event& effect) {
    auto k = first_admission(traj, effect);
    if (!k) return std::nullopt;
    const double t_end = traj.samples[*k].t;
    const double t_begin = *k > 0 ? traj.samples[*k - 1].t : t_end;
    return Interval{t_begin, t_end};
}

} // namespace gritlab
