#pragma once

#include "gritlab/core.hpp"
#include "gritlab/decomposition.hpp"
#include "gritlab/event.hpp"
#include "gritlab/value_field.hpp"

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gritlab {

/// Strictness thresholds for the verdict conditions.
struct Tolerances {
    double rise = 1e-6;      ///< minimum expected grit increase over A
    double floor = 1e-6;     ///< grit must stay above its pre-A level by more than this until B
    double margin = 1e-9;    ///< slack on the contribution comparisons
    double unity = 1e-6;     ///< sufficient cause: post-A grit >= 1 - unity
    double null = 1e-9;      ///< reachability at or below this counts as zero
    double null_phi = 1e-6;  ///< null event: every ruling impact within this of zero

    /// Looser strictness for sampled (Monte Carlo) fields.
    static Tolerances monte_carlo() {
        Tolerances t;
        t.rise = 0.02;
        t.floor = 0.0;
        return t;
    }

    void validate() const {
        for (double v : {rise, floor, margin, unity, null, null_phi})
            if (!(v >= 0) || !std::isfinite(v)) throw ConfigError("tolerances must be finite and non-negative");
    }
};

struct JudgeConfig {
    std::size_t micro_steps = 10;
    DerivativeConfig derivative;
    /// Exact diffusion coefficients for the second-order terms; quadratic variation otherwise.
    const DiffusionSpec* diffusion = nullptr;
    Tolerances tol;
    /// Longest window considered when A is a template without a fixed interval.
    double max_window = 1.0;
};

/// Where A and B happen on one trajectory.
struct Occurrence {
    std::size_t trajectory = 0;
    std::size_t a_begin = 0, a_end = 0;  ///< sample indices of A's interval
    std::optional<std::size_t> b_onset;  ///< sample before B's first admission
    std::optional<std::size_t> b_admit;  ///< B's first admitting sample
};

struct ConditionTwo {
    bool pass = false;
    std::vector<double> trace;  ///< expected grit at A's end and every later sample up to B's onset
    double gamma_t1 = 0.0, gamma_t2 = 0.0, delta = 0.0;
};

struct ConditionThree {
    bool pass = false;
    double ruling_sum = 0.0;
    double neg_nonruling_sum = 0.0;
};

struct Verdict {
    std::string cause, effect;
    bool c1 = false;
    ConditionTwo c2;
    ConditionThree c3;
    bool is_cause = false;
    std::optional<bool> sufficient;
    std::optional<bool> necessary;
    bool dominant = false;
    bool inconclusive = false;
    std::vector<std::string> notes;
    /// Mean grit at A's conclusion.
    double gamma_after = 0.0;
    ExpectedContribution contribution;
    std::set<std::size_t> ruling;
    std::size_t matched = 0;
};

/**
Locates A and B on every trajectory. A with a fixed interval is snapped to the sample
indices bracketing it; a template A takes its first detected window. Trajectories where A
does not occur are skipped.
*/
inline std::vector<Occurrence> match_occurrences(const std::vector<Trajectory>& trajs, const Event& a, const Event& b,
                                                 double max_window) {
    std::vector<Occurrence> out;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        const auto& tr = trajs[i];
        tr.validate();
        Occurrence o;
        o.trajectory = i;
        std::optional<Interval> iv = a.interval;
        if (!iv) {
            auto found = detect_events(tr, a, max_window);
            if (found.empty()) continue;
            iv = found.front().interval;
        }
        auto begin = tr.index_at(iv->t1);
        auto end = tr.index_at(iv->t2);
        if (!begin || !end || *end >= tr.size()) continue;
        const double eps = 1e-9 * std::max(1.0, std::abs(iv->t2));
        if (tr.samples[*end].t < iv->t2 - eps) {
            if (*end + 1 >= tr.size()) continue;
            ++*end;
        }
        o.a_begin = *begin;
        o.a_end = *end;
        if (auto k = first_admission(tr, b)) {
            o.b_admit = *k;
            o.b_onset = *k > 0 ? *k - 1 : *k;
        }
        out.push_back(o);
    }
    return out;
}

namespace detail {

inline Trajectory segment_of(const Trajectory& tr, std::size_t lo, std::size_t hi) {
    Trajectory seg;
    seg.seed = tr.seed;
    seg.samples.assign(tr.samples.begin() + static_cast<std::ptrdiff_t>(lo),
                       tr.samples.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    return seg;
}

inline bool confident_at(const ValueField& v, const StateVector& s) {
    if (!v.has_visits()) return true;
    const auto p = v.point(s);
    return v.confident(std::span<const double>(p));
}

} // namespace detail

/**
Causation verdict for A on B from trajectories and a grit field for B.

c1: A concludes at or before B begins on every matched trajectory reaching B.
c2: mean grit rises by more than tol.rise over A and, at every later sample until B's
onset, stays above its level at A's start by more than tol.floor. Trajectories that have
already reached B count with grit 1.
c3: the ruling impacts outweigh the negative impacts of the other components.
Low-confidence grit values mark the verdict inconclusive instead of false.
*/
inline Verdict check_causation(const Event& a, const Event& b, const std::vector<Trajectory>& trajs,
                               const ValueField& grit, const JudgeConfig& cfg) {
    cfg.tol.validate();
    if (trajs.empty()) throw InputError("causation check needs trajectories");
    const std::size_t dims = trajs.front().samples.empty() ? 0 : trajs.front().samples.front().dims();
    a.validate(dims);
    b.validate(dims);
    if (b.predicate.empty()) throw InputError("effect event needs an admission predicate");

    Verdict v;
    v.cause = a.id;
    v.effect = b.id;
    v.ruling = a.ruling;
    auto occ = match_occurrences(trajs, a, b, cfg.max_window);
    const std::size_t without_a = trajs.size() - occ.size();
    if (without_a > 0) v.notes.push_back(std::to_string(without_a) + " trajectories without an occurrence of " + a.id);
    std::vector<Occurrence> with_b;
    for (const auto& o : occ)
        if (o.b_onset) with_b.push_back(o);
    if (with_b.size() < occ.size())
        v.notes.push_back(std::to_string(occ.size() - with_b.size()) + " matched trajectories never reach " + b.id +
                          " and are excluded");
    if (with_b.empty()) throw InputError("no matched segments: no trajectory contains " + a.id + " and reaches " + b.id);
    v.matched = with_b.size();

    // c1: temporal order
    v.c1 = true;
    for (const auto& o : with_b) {
        const auto& tr = trajs[o.trajectory];
        if (tr.samples[o.a_end].t > tr.samples[*o.b_onset].t + 1e-9 * std::max(1.0, std::abs(tr.samples[o.a_end].t)))
            v.c1 = false;
    }
    if (!v.c1) {
        v.notes.push_back(a.id + " does not conclude before " + b.id + " begins; c2 and c3 not evaluated");
        return v;
    }

    bool low_confidence = false;
    auto gamma = [&](const StateVector& s) {
        if (!detail::confident_at(grit, s)) low_confidence = true;
        return grit.value(s);
    };

    // c2: expected grit at t1, t2 and every later sample up to B's onset
    const double k = static_cast<double>(with_b.size());
    std::size_t longest = 0;
    for (const auto& o : with_b) longest = std::max(longest, *o.b_onset - o.a_end);
    v.c2.trace.assign(longest + 1, 0.0);
    for (const auto& o : with_b) {
        const auto& tr = trajs[o.trajectory];
        v.c2.gamma_t1 += gamma(tr.samples[o.a_begin]) / k;
        for (std::size_t r = 0; r <= longest; ++r) {
            const std::size_t idx = o.a_end + r;
            v.c2.trace[r] += (idx <= *o.b_onset ? gamma(tr.samples[idx]) : 1.0) / k;
        }
    }
    v.c2.gamma_t2 = v.c2.trace.front();
    v.gamma_after = v.c2.gamma_t2;
    v.c2.delta = v.c2.gamma_t2 - v.c2.gamma_t1;
    v.c2.pass = v.c2.delta > cfg.tol.rise;
    for (double g : v.c2.trace)
        if (!(g > v.c2.gamma_t1 + cfg.tol.floor)) v.c2.pass = false;

    // c3: contributions over A's segments
    std::vector<Trajectory> segments;
    for (const auto& o : with_b) segments.push_back(detail::segment_of(trajs[o.trajectory], o.a_begin, o.a_end));
    for (const auto& seg : segments)
        for (const auto& s : seg.samples)
            if (!detail::confident_at(grit, s)) low_confidence = true;
    v.contribution = expected_decompose(segments, grit, cfg.micro_steps, cfg.derivative, cfg.diffusion);
    const auto& phi = v.contribution.phi;
    for (auto j : a.ruling)
        if (j >= phi.size())
            throw CapabilityError("ruling component " + std::to_string(j) + " of " + a.id +
                                  " is an action but the grit field is not action-aware");
    double nonruling_abs = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) {
        if (a.ruling.count(j)) v.c3.ruling_sum += phi[j];
        else {
            v.c3.neg_nonruling_sum -= std::min(phi[j], 0.0);
            nonruling_abs += std::abs(phi[j]);
        }
    }
    v.c3.pass = v.c3.ruling_sum > v.c3.neg_nonruling_sum + cfg.tol.margin;

    v.is_cause = v.c1 && v.c2.pass && v.c3.pass;
    v.dominant = v.is_cause && v.c3.ruling_sum > nonruling_abs + cfg.tol.margin;
    if (low_confidence) {
        v.inconclusive = true;
        v.notes.push_back("grit field has low-confidence values on queried states");
    }
    return v;
}

/// A is a sufficient cause: a cause whose conclusion leaves B certain whatever happens next.
inline bool check_sufficient(Verdict& v, const Tolerances& tol = {}) {
    v.sufficient = v.is_cause && v.gamma_after >= 1.0 - tol.unity;
    return *v.sufficient;
}

/**
A is a necessary cause on the queried states: a cause such that wherever A's conclusion is
unreachable, B is unreachable too. `a_unique` is the caller's assertion that A's ruling
components can admit its predicate only through A.
*/
inline bool check_necessary(Verdict& v, const std::vector<double>& reach_a, const std::vector<double>& reach_b,
                            bool a_unique, const Tolerances& tol = {}) {
    if (!a_unique) throw ConfigError("necessary-cause check requires the cause to be declared unique");
    if (reach_a.size() != reach_b.size()) throw InputError("reachability values must cover the same states");
    bool implied = true;
    for (std::size_t i = 0; i < reach_a.size(); ++i)
        if (reach_a[i] <= tol.null && reach_b[i] > tol.null) implied = false;
    v.necessary = v.is_cause && implied;
    return *v.necessary;
}

/// Field-based overload: evaluates both reachability fields at each queried point.
inline bool check_necessary(Verdict& v, const ValueField& reach_a, const ValueField& reach_b,
                            const std::vector<std::vector<double>>& states, bool a_unique, const Tolerances& tol = {}) {
    if (reach_a.is_tabular() != reach_b.is_tabular()) throw CapabilityError("reachability fields differ in backing");
    std::vector<double> la, lb;
    for (const auto& x : states) {
        if (reach_a.is_tabular()) {
            if (x.size() != 1) throw InputError("enumerated fields are queried by a single state index");
            const auto i = static_cast<std::size_t>(x.front());
            la.push_back(reach_a.at(i));
            lb.push_back(reach_b.at(i));
        } else {
            la.push_back(reach_a(std::span<const double>(x)));
            lb.push_back(reach_b(std::span<const double>(x)));
        }
    }
    return check_necessary(v, la, lb, a_unique, tol);
}

/// Null event: every ruling component has (near) zero impact on B's grit.
inline bool classify_null_event(const std::vector<double>& phi, const std::set<std::size_t>& ruling,
                                const Tolerances& tol = {}) {
    for (auto j : ruling)
        if (std::abs(phi.at(j)) > tol.null_phi) return false;
    return true;
}

inline bool classify_null_event(const Verdict& v, const Tolerances& tol = {}) {
    return classify_null_event(v.contribution.phi, v.ruling, tol);
}

/// Strong variant: the ruling impact exceeds the total magnitude of every other impact.
inline bool check_dominant(const Verdict& v, const Tolerances& tol = {}) {
    double other = 0.0;
    for (std::size_t j = 0; j < v.contribution.phi.size(); ++j)
        if (!v.ruling.count(j)) other += std::abs(v.contribution.phi[j]);
    return v.is_cause && v.c3.ruling_sum > other + tol.margin;
}

} // namespace gritlab
