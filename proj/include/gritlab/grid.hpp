#pragma once

#include "gritlab/core.hpp"

#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace gritlab {

/**
Rectangular node grid over R^d. Axis k has `points[k]` equally spaced nodes from
`lower[k]` to `upper[k]` inclusive; flat indices are row-major (last axis fastest).
*/
class Grid {
public:
    Grid() = default;

    Grid(std::vector<double> lower, std::vector<double> upper, std::vector<std::size_t> points)
        : lower_(std::move(lower)), upper_(std::move(upper)), points_(std::move(points)) {
        if (lower_.empty() || lower_.size() != upper_.size() || lower_.size() != points_.size())
            throw ConfigError("grid bounds and point counts must have the same non-zero length");
        for (std::size_t k = 0; k < dims(); ++k) {
            if (points_[k] == 0) throw ConfigError("grid axis " + std::to_string(k) + " has no points");
            if (points_[k] == 1 ? lower_[k] > upper_[k] : !(lower_[k] < upper_[k]))
                throw ConfigError("grid axis " + std::to_string(k) + " bounds are not well ordered");
        }
        strides_.assign(dims(), 1);
        for (std::size_t k = dims(); k-- > 1;) strides_[k - 1] = strides_[k] * points_[k];
    }

    std::size_t dims() const { return points_.size(); }
    std::size_t size() const { return dims() == 0 ? 0 : strides_.front() * points_.front(); }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }
    const std::vector<std::size_t>& points() const { return points_; }

    double spacing(std::size_t k) const {
        return points_[k] > 1 ? (upper_[k] - lower_[k]) / static_cast<double>(points_[k] - 1) : 0.0;
    }

    double node_coord(std::size_t k, std::size_t i) const {
        if (i + 1 == points_[k]) return upper_[k];
        return lower_[k] + static_cast<double>(i) * spacing(k);
    }

    std::vector<std::size_t> unflatten(std::size_t flat) const {
        std::vector<std::size_t> idx(dims());
        for (std::size_t k = 0; k < dims(); ++k) {
            idx[k] = flat / strides_[k];
            flat %= strides_[k];
        }
        return idx;
    }

    std::size_t flatten(std::span<const std::size_t> idx) const {
        std::size_t flat = 0;
        for (std::size_t k = 0; k < dims(); ++k) flat += idx[k] * strides_[k];
        return flat;
    }

    std::size_t stride(std::size_t k) const { return strides_[k]; }

    std::vector<double> coords(std::size_t flat) const {
        auto idx = unflatten(flat);
        std::vector<double> c(dims());
        for (std::size_t k = 0; k < dims(); ++k) c[k] = node_coord(k, idx[k]);
        return c;
    }

    bool contains(std::span<const double> x, double slack = 1e-12) const {
        for (std::size_t k = 0; k < dims(); ++k) {
            const double pad = slack * std::max(1.0, upper_[k] - lower_[k]);
            if (x[k] < lower_[k] - pad || x[k] > upper_[k] + pad) return false;
        }
        return true;
    }

    std::size_t nearest_index(std::size_t k, double v) const {
        if (points_[k] == 1) return 0;
        const double pos = (v - lower_[k]) / spacing(k);
        const auto i = static_cast<long long>(std::llround(pos));
        return static_cast<std::size_t>(std::clamp<long long>(i, 0, static_cast<long long>(points_[k]) - 1));
    }

    std::size_t nearest(std::span<const double> x) const {
        std::size_t flat = 0;
        for (std::size_t k = 0; k < dims(); ++k) flat += nearest_index(k, x[k]) * strides_[k];
        return flat;
    }

    /// Multilinear interpolation stencil (flat node, weight) at x, clamped to the box.
    std::vector<std::pair<std::size_t, double>> stencil(std::span<const double> x) const {
        std::vector<std::size_t> base(dims());
        std::vector<double> frac(dims());
        for (std::size_t k = 0; k < dims(); ++k) {
            if (points_[k] == 1) {
                base[k] = 0;
                frac[k] = 0.0;
                continue;
            }
            const double pos = std::clamp((x[k] - lower_[k]) / spacing(k), 0.0, static_cast<double>(points_[k] - 1));
            auto i = static_cast<std::size_t>(std::floor(pos));
            if (i + 1 >= points_[k]) i = points_[k] - 2;
            base[k] = i;
            frac[k] = pos - static_cast<double>(i);
        }
        std::vector<std::pair<std::size_t, double>> out;
        const std::size_t corners = std::size_t{1} << dims();
        out.reserve(corners);
        for (std::size_t mask = 0; mask < corners; ++mask) {
            double w = 1.0;
            std::size_t flat = 0;
            bool skip = false;
            for (std::size_t k = 0; k < dims(); ++k) {
                const bool hi = (mask >> k) & 1U;
                if (points_[k] == 1 && hi) {
                    skip = true;
                    break;
                }
                w *= hi ? frac[k] : 1.0 - frac[k];
                flat += (base[k] + (hi ? 1 : 0)) * strides_[k];
            }
            if (!skip && w != 0.0) out.emplace_back(flat, w);
        }
        return out;
    }

    bool operator==(const Grid& o) const {
        return lower_ == o.lower_ && upper_ == o.upper_ && points_ == o.points_;
    }

private:
    std::vector<double> lower_, upper_;
    std::vector<std::size_t> points_;
    std::vector<std::size_t> strides_;
};

} // namespace gritlab
