#pragma once

#include "gritlab/core.hpp"
#include "gritlab/diffusion.hpp"
#include "gritlab/parallel.hpp"
#include "gritlab/value_field.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace gritlab {

enum class DiffScheme { central, forward };

struct DerivativeConfig {
    DiffScheme scheme = DiffScheme::central;
    /// Per-component step; empty means one grid cell on grid fields and 1e-4 otherwise.
    std::vector<double> step;
    bool clamp_at_bounds = true;

    void validate() const {
        for (double h : step)
            if (!(h > 0)) throw ConfigError("finite-difference steps must be positive");
    }
};

namespace detail {

inline double fd_step(const ValueField& v, const DerivativeConfig& cfg, std::size_t k) {
    if (!cfg.step.empty()) {
        if (cfg.step.size() != v.dims()) throw ConfigError("one finite-difference step per field component expected");
        return cfg.step[k];
    }
    if (v.is_grid() && v.grid()->spacing(k) > 0.0) return v.grid()->spacing(k);
    return 1e-4;
}

/// Offset that keeps [p + c - h, p + c + h] inside the support; throws when impossible or not allowed.
inline double centre_shift(const ValueField& v, std::span<const double> p, std::size_t k, double h, bool clamp) {
    const double lo = v.lower()[k], hi = v.upper()[k];
    const double slack = 1e-12 * std::max(1.0, std::abs(hi - lo));
    if (p[k] - h >= lo - slack && p[k] + h <= hi + slack) return 0.0;
    if (!clamp) throw DomainError("finite-difference stencil leaves the field support on component " + std::to_string(k));
    if (hi - lo < 2.0 * h - slack) throw DomainError("field support narrower than the stencil on component " + std::to_string(k));
    if (p[k] - h < lo) return lo + h - p[k];
    return hi - h - p[k];
}

inline void check_point(const ValueField& v, std::span<const double> p) {
    if (v.is_tabular()) throw CapabilityError("enumerated fields have no geometry to differentiate");
    if (p.size() != v.dims()) throw InputError("derivative query dimension differs from the field's");
    if (!v.in_support(p)) throw DomainError("derivative query outside the field support");
}

} // namespace detail

/// Finite-difference gradient over every field component (state, then action).
inline std::vector<double> grad(const ValueField& v, std::span<const double> p, const DerivativeConfig& cfg = {}) {
    cfg.validate();
    detail::check_point(v, p);
    std::vector<double> q(p.begin(), p.end());
    std::vector<double> out(v.dims(), 0.0);
    for (std::size_t k = 0; k < v.dims(); ++k) {
        const double h = detail::fd_step(v, cfg, k);
        const double lo = v.lower()[k], hi = v.upper()[k];
        const double slack = 1e-12 * std::max(1.0, std::abs(hi - lo));
        const bool up_ok = p[k] + h <= hi + slack;
        const bool down_ok = p[k] - h >= lo - slack;
        auto at = [&](double offset) {
            q[k] = p[k] + offset;
            const double r = v(q);
            q[k] = p[k];
            return r;
        };
        if (cfg.scheme == DiffScheme::central && up_ok && down_ok) {
            out[k] = (at(h) - at(-h)) / (2.0 * h);
        } else if ((cfg.scheme == DiffScheme::forward || cfg.clamp_at_bounds) && up_ok) {
            out[k] = (at(h) - at(0.0)) / h;
        } else if (cfg.clamp_at_bounds && down_ok) {
            out[k] = (at(0.0) - at(-h)) / h;
        } else {
            throw DomainError("finite-difference stencil leaves the field support on component " + std::to_string(k));
        }
    }
    return out;
}

inline std::vector<double> grad(const ValueField& v, const StateVector& s, const DerivativeConfig& cfg = {}) {
    const auto p = v.point(s);
    return grad(v, std::span<const double>(p), cfg);
}

/**
Second derivatives over the first `count` field components (all when 0), as a symmetric
row-major matrix: diagonal by the three-point stencil, cross terms by the four-point
stencil. Near the support edge the stencil centre is shifted inward when clamping is on.
*/
inline std::vector<double> hessian_terms(const ValueField& v, std::span<const double> p, const DerivativeConfig& cfg = {},
                                         std::size_t count = 0) {
    cfg.validate();
    detail::check_point(v, p);
    const std::size_t n = count == 0 ? v.dims() : count;
    std::vector<double> h(n), shift(n);
    for (std::size_t k = 0; k < n; ++k) {
        h[k] = detail::fd_step(v, cfg, k);
        shift[k] = detail::centre_shift(v, p, k, h[k], cfg.clamp_at_bounds);
    }
    std::vector<double> q(p.begin(), p.end());
    auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
        q[i] += di;
        q[j] += dj;
        const double r = v(q);
        q[i] -= di;
        q[j] -= dj;
        return r;
    };
    std::vector<double> out(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double c = shift[i];
        const double f0 = at(i, c, i, 0.0);
        out[i * n + i] = (at(i, c + h[i], i, 0.0) - 2.0 * f0 + at(i, c - h[i], i, 0.0)) / (h[i] * h[i]);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double ci = shift[i], cj = shift[j];
            const double d = (at(i, ci + h[i], j, cj + h[j]) - at(i, ci + h[i], j, cj - h[j]) -
                              at(i, ci - h[i], j, cj + h[j]) + at(i, ci - h[i], j, cj - h[j])) /
                             (4.0 * h[i] * h[j]);
            out[i * n + j] = d;
            out[j * n + i] = d;
        }
    return out;
}

/// Per-term contributions of each component to the change of a field over one segment.
struct ContributionTerms {
    double t1 = 0.0, t2 = 0.0;
    std::vector<double> g;       ///< first order, per state component
    std::vector<double> g_dot;   ///< diagonal second order, per state component
    std::vector<double> g_ddot;  ///< cross second order g_ddot[i*n+j], zero diagonal
    std::vector<double> h;       ///< action terms, per action component
    double total = 0.0;
    double direct_delta = 0.0;
    std::string sigma_source = "none";  ///< exact | quadratic_variation | none

    std::size_t n() const { return g.size(); }

    /// Impact of each extended component: g_j + g_dot_j + sum_i g_ddot_{j,i}; h_k for actions.
    std::vector<double> phi() const {
        const std::size_t n = g.size();
        std::vector<double> out(n + h.size(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            out[j] = g[j] + g_dot[j];
            for (std::size_t i = 0; i < n; ++i)
                if (i != j) out[j] += g_ddot[j * n + i];
        }
        for (std::size_t k = 0; k < h.size(); ++k) out[n + k] = h[k];
        return out;
    }

    void finish_total() {
        total = 0.0;
        for (double x : g) total += x;
        for (double x : g_dot) total += x;
        for (double x : g_ddot) total += x;
        for (double x : h) total += x;
    }

    static ContributionTerms zeros(std::size_t n, std::size_t m, double t1, double t2) {
        ContributionTerms c;
        c.t1 = t1;
        c.t2 = t2;
        c.g.assign(n, 0.0);
        c.g_dot.assign(n, 0.0);
        c.g_ddot.assign(n * n, 0.0);
        c.h.assign(m, 0.0);
        return c;
    }
};

/// Sum of the impacts of a set of extended components (the contribution of a joint event).
inline double ruling_contribution(const std::vector<double>& phi, const std::set<std::size_t>& ruling) {
    double s = 0.0;
    for (auto j : ruling) s += phi.at(j);
    return s;
}

namespace detail {

/// M + 1 equally spaced micro-points over [t1, t2], linearly interpolated between samples.
struct MicroPath {
    std::vector<double> t;
    std::vector<StateVector> pts;
    std::vector<std::size_t> interval;  ///< sample interval containing micro-step m

    MicroPath(const Trajectory& seg, std::size_t M) {
        const auto& s = seg.samples;
        const double t1 = s.front().t, t2 = s.back().t;
        std::size_t k = 0;
        for (std::size_t i = 0; i <= M; ++i) {
            const double ti = i == M ? t2 : t1 + (t2 - t1) * static_cast<double>(i) / static_cast<double>(M);
            while (k + 2 < s.size() && s[k + 1].t <= ti) ++k;
            const auto& a = s[k];
            const auto& b = s[k + 1];
            const double w = std::clamp((ti - a.t) / (b.t - a.t), 0.0, 1.0);
            StateVector p{ti, a.x, a.u};
            for (std::size_t j = 0; j < p.x.size(); ++j) p.x[j] = (1.0 - w) * a.x[j] + w * b.x[j];
            for (std::size_t j = 0; j < p.u.size(); ++j) p.u[j] = (1.0 - w) * a.u[j] + w * b.u[j];
            t.push_back(ti);
            pts.push_back(std::move(p));
        }
        std::size_t kk = 0;
        for (std::size_t i = 0; i < M; ++i) {
            const double mid = 0.5 * (t[i] + t[i + 1]);
            while (kk + 2 < s.size() && s[kk + 1].t <= mid) ++kk;
            interval.push_back(kk);
        }
    }
};

inline void check_segment(const Trajectory& seg, const ValueField& v, std::size_t M) {
    if (M < 1) throw InputError("micro-step count M must be >= 1");
    if (seg.size() < 2) throw InputError("segment needs at least 2 samples");
    seg.validate();
    if (seg.state_dims() != v.state_dims())
        throw InputError("segment has " + std::to_string(seg.state_dims()) + " state components, field expects " +
                         std::to_string(v.state_dims()));
    if (v.action_aware() && seg.action_dims() != v.action_dims())
        throw InputError("segment action dimension differs from the field's");
}

/// Trapezoidal g-formula over the components [first, first + count) of the field space.
inline std::vector<double> trapezoid_first_order(const MicroPath& path, const ValueField& v, const DerivativeConfig& cfg,
                                                 std::size_t first, std::size_t count) {
    std::vector<double> out(count, 0.0);
    std::vector<std::vector<double>> grads;
    grads.reserve(path.pts.size());
    for (const auto& p : path.pts) grads.push_back(grad(v, p, cfg));
    for (std::size_t m = 0; m + 1 < path.pts.size(); ++m) {
        const auto a = v.point(path.pts[m]);
        const auto b = v.point(path.pts[m + 1]);
        for (std::size_t j = 0; j < count; ++j) {
            const std::size_t c = first + j;
            out[j] += 0.5 * (b[c] - a[c]) * (grads[m][c] + grads[m + 1][c]);
        }
    }
    return out;
}

} // namespace detail

/**
g-formula: g_j = 1/2 sum_m (X_j(m+1) - X_j(m)) (d_j v(X(m)) + d_j v(X(m+1))) over M
micro-steps of the linearly interpolated segment. Time units cancel.
*/
inline std::vector<double> g_formula(const Trajectory& segment, const ValueField& v, std::size_t M,
                                     const DerivativeConfig& cfg = {}) {
    detail::check_segment(segment, v, M);
    detail::MicroPath path(segment, M);
    return detail::trapezoid_first_order(path, v, cfg, 0, v.state_dims());
}

/// Trapezoidal action term h_k = integral of du_k/dt * dv/du_k over the segment.
inline std::vector<double> h_term(const Trajectory& segment, const ValueField& v, std::size_t M,
                                  const DerivativeConfig& cfg = {}) {
    if (!v.action_aware()) throw CapabilityError("h terms need an action-aware field");
    detail::check_segment(segment, v, M);
    detail::MicroPath path(segment, M);
    return detail::trapezoid_first_order(path, v, cfg, v.state_dims(), v.action_dims());
}

/**
Full decomposition of v(X(t2)) - v(X(t1)) over one segment.

g uses the g-formula; g_dot and g_ddot apply the trapezoidal rule to
1/2 (sigma sigma^T)_ij d2v/dx_i dx_j dt, with sigma sigma^T evaluated exactly when a
diffusion is supplied and otherwise estimated per sample interval from realised quadratic
variation (dX_i dX_j / dt). A one-sample segment is zero-length: every term is 0.
*/
inline ContributionTerms decompose(const Trajectory& segment, const ValueField& v, std::size_t M,
                                   const DerivativeConfig& cfg = {}, const DiffusionSpec* exact = nullptr) {
    const std::size_t n = v.state_dims();
    const std::size_t m = v.action_aware() ? v.action_dims() : 0;
    if (segment.size() == 1) {
        segment.validate();
        const double t = segment.samples.front().t;
        return ContributionTerms::zeros(n, m, t, t);
    }
    detail::check_segment(segment, v, M);
    if (exact && exact->n != n) throw InputError("diffusion dimension differs from the field's state dimension");

    detail::MicroPath path(segment, M);
    ContributionTerms c = ContributionTerms::zeros(n, m, segment.start_time(), segment.end_time());
    c.g = detail::trapezoid_first_order(path, v, cfg, 0, n);
    if (m > 0) c.h = detail::trapezoid_first_order(path, v, cfg, n, m);

    // sigma sigma^T per micro-point
    const auto& s = segment.samples;
    auto cov_at = [&](std::size_t point, std::size_t step) {
        if (exact) return exact->covariance(path.pts[point].x, path.pts[point].u);
        const auto k = path.interval[step];
        const double dt = s[k + 1].t - s[k].t;
        std::vector<double> cv(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                cv[i * n + j] = (s[k + 1].x[i] - s[k].x[i]) * (s[k + 1].x[j] - s[k].x[j]) / dt;
        return cv;
    };
    c.sigma_source = exact ? "exact" : "quadratic_variation";
    std::vector<std::vector<double>> hess;
    hess.reserve(path.pts.size());
    for (const auto& p : path.pts) {
        const auto q = v.point(p);
        hess.push_back(hessian_terms(v, q, cfg, n));
    }
    for (std::size_t step = 0; step + 1 < path.pts.size(); ++step) {
        const double dt = path.t[step + 1] - path.t[step];
        const auto ca = cov_at(step, step);
        const auto cb = cov_at(step + 1, step);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double term = 0.5 * dt * 0.5 *
                                    (ca[i * n + j] * hess[step][i * n + j] + cb[i * n + j] * hess[step + 1][i * n + j]);
                if (i == j) c.g_dot[i] += term;
                else c.g_ddot[i * n + j] += term;
            }
    }
    c.direct_delta = v.value(s.back()) - v.value(s.front());
    c.finish_total();
    return c;
}

namespace detail {

/// Column means and standard errors of equally sized rows, summed in row order.
inline std::pair<std::vector<double>, std::vector<double>> mean_and_stderr(const std::vector<std::vector<double>>& rows) {
    const std::size_t len = rows.front().size();
    const double k = static_cast<double>(rows.size());
    std::vector<double> mean(len, 0.0), se(len, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < len; ++j) mean[j] += r[j];
    for (auto& x : mean) x /= k;
    if (rows.size() < 2) return {mean, se};
    for (const auto& r : rows)
        for (std::size_t j = 0; j < len; ++j) se[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
    for (auto& e : se) e = std::sqrt(e / (k - 1.0) / k);
    return {mean, se};
}

} // namespace detail

struct ExpectedContribution {
    ContributionTerms mean;
    ContributionTerms stderr_;     ///< standard error of each mean term
    std::vector<double> phi;       ///< per extended component
    std::vector<double> phi_se;
    double direct_delta_se = 0.0;
    std::size_t n_segments = 0;
};

/**
Mean of per-segment decompositions over segments matched on event A, with standard errors.
Segments are decomposed in parallel and reduced in input order.
*/
inline ExpectedContribution expected_decompose(const std::vector<Trajectory>& segments, const ValueField& v,
                                               std::size_t M, const DerivativeConfig& cfg = {},
                                               const DiffusionSpec* exact = nullptr) {
    if (segments.empty()) throw InputError("expected_decompose needs at least one segment");
    std::vector<ContributionTerms> per(segments.size());
    parallel_for(segments.size(), [&](std::size_t i) { per[i] = decompose(segments[i], v, M, cfg, exact); });

    ExpectedContribution out;
    out.n_segments = per.size();
    const auto& first = per.front();
    const std::size_t n = first.g.size(), m = first.h.size();
    out.mean = ContributionTerms::zeros(n, m, first.t1, first.t2);
    out.stderr_ = out.mean;
    out.mean.sigma_source = out.stderr_.sigma_source = first.sigma_source;

    auto column = [&](auto get) {
        std::vector<std::vector<double>> rows;
        rows.reserve(per.size());
        for (const auto& c : per) rows.push_back(get(c));
        return detail::mean_and_stderr(rows);
    };
    std::tie(out.mean.g, out.stderr_.g) = column([](const ContributionTerms& c) { return c.g; });
    std::tie(out.mean.g_dot, out.stderr_.g_dot) = column([](const ContributionTerms& c) { return c.g_dot; });
    std::tie(out.mean.g_ddot, out.stderr_.g_ddot) = column([](const ContributionTerms& c) { return c.g_ddot; });
    std::tie(out.mean.h, out.stderr_.h) = column([](const ContributionTerms& c) { return c.h; });
    std::tie(out.phi, out.phi_se) = column([](const ContributionTerms& c) { return c.phi(); });
    auto [sm, sse] = column([](const ContributionTerms& c) { return std::vector<double>{c.total, c.direct_delta}; });
    out.mean.finish_total();
    out.mean.direct_delta = sm[1];
    out.stderr_.total = sse[0];
    out.stderr_.direct_delta = sse[1];
    out.direct_delta_se = sse[1];
    return out;
}

} // namespace gritlab
