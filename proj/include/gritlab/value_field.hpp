#pragma once

#include "gritlab/core.hpp"
#include "gritlab/grid.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gritlab {

enum class FieldRange { grit, reach, raw_value };

inline const char* to_string(FieldRange r) {
    switch (r) {
    case FieldRange::grit: return "grit";
    case FieldRange::reach: return "reach";
    case FieldRange::raw_value: return "raw_value";
    }
    return "?";
}

struct FieldMetadata {
    std::string solver;
    std::size_t iterations = 0;
    double residual = 0.0;
    double tolerance = 0.0;
};

/**
Immutable mapping from (extended) states to grit, reachability or raw values.

Three backings: an enumerated table (index queries only), a node grid with multilinear
interpolation, or an analytic function. Grit/reach values are stored clamped to [0, 1];
raw values are left as given.
Grid fields may carry Monte Carlo visit counts; points whose interpolation stencil touches
a node with fewer than `min_visits` visits are low-confidence.
*/
class ValueField {
public:
    using Function = std::function<double(std::span<const double>)>;

    ValueField() = default;

    static ValueField tabular(FieldRange range, std::vector<double> values) {
        ValueField f;
        f.range_ = range;
        f.values_ = std::move(values);
        f.clamp_values();
        return f;
    }

    static ValueField on_grid(FieldRange range, Grid grid, std::vector<double> values, std::size_t state_dims) {
        if (values.size() != grid.size()) throw InputError("grid field needs one value per grid node");
        if (state_dims == 0 || state_dims > grid.dims()) throw InputError("grid field state dimension out of range");
        ValueField f;
        f.range_ = range;
        f.grid_ = std::move(grid);
        f.values_ = std::move(values);
        f.state_dims_ = state_dims;
        f.clamp_values();
        return f;
    }

    /// Analytic field over `dims` components; `lower`/`upper` bound the support (empty = unbounded).
    static ValueField analytic(FieldRange range, std::size_t dims, Function fn, std::size_t state_dims = 0,
                               std::vector<double> lower = {}, std::vector<double> upper = {}) {
        ValueField f;
        f.range_ = range;
        f.fn_ = std::make_shared<Function>(std::move(fn));
        f.analytic_dims_ = dims;
        f.state_dims_ = state_dims == 0 ? dims : state_dims;
        f.lower_ = lower.empty() ? std::vector<double>(dims, -std::numeric_limits<double>::infinity()) : std::move(lower);
        f.upper_ = upper.empty() ? std::vector<double>(dims, std::numeric_limits<double>::infinity()) : std::move(upper);
        return f;
    }

    FieldRange range() const { return range_; }
    bool is_tabular() const { return !grid_ && !fn_; }
    bool is_grid() const { return grid_.has_value(); }
    bool is_analytic() const { return fn_ != nullptr; }
    const std::optional<Grid>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }

    std::size_t dims() const {
        if (grid_) return grid_->dims();
        if (fn_) return analytic_dims_;
        return 1;
    }
    std::size_t state_dims() const { return is_tabular() ? 1 : state_dims_; }
    std::size_t action_dims() const { return dims() - state_dims(); }
    bool action_aware() const { return action_dims() > 0; }

    std::vector<double> lower() const { return grid_ ? grid_->lower() : lower_; }
    std::vector<double> upper() const { return grid_ ? grid_->upper() : upper_; }

    bool in_support(std::span<const double> p) const {
        if (is_tabular()) return false;
        if (grid_) return grid_->contains(p);
        for (std::size_t k = 0; k < dims(); ++k)
            if (p[k] < lower_[k] || p[k] > upper_[k]) return false;
        return true;
    }

    double at(std::size_t index) const {
        if (!is_tabular() && !is_grid()) throw CapabilityError("analytic fields have no state index");
        return values_.at(index);
    }

    /// Value at a point of the extended space; off-support points throw DomainError.
    double operator()(std::span<const double> p) const {
        if (p.size() != dims())
            throw InputError("field query has " + std::to_string(p.size()) + " components, field has " +
                             std::to_string(dims()));
        if (is_tabular()) throw CapabilityError("enumerated fields are queried by index");
        if (!in_support(p)) throw DomainError("field query outside its support");
        if (fn_) return finish((*fn_)(p));
        double v = 0.0;
        for (const auto& [node, w] : grid_->stencil(p)) v += w * values_[node];
        return finish(v);
    }

    /// Query with a sample; action components are appended for action-aware fields.
    double value(const StateVector& s) const {
        if (s.x.size() != state_dims())
            throw InputError("sample has " + std::to_string(s.x.size()) + " state components, field expects " +
                             std::to_string(state_dims()));
        if (!action_aware()) return (*this)(std::span<const double>(s.x));
        if (s.u.size() != action_dims()) throw InputError("sample action dimension differs from the field's");
        const auto e = s.extended();
        return (*this)(std::span<const double>(e));
    }

    /// Point of the field's space corresponding to a sample.
    std::vector<double> point(const StateVector& s) const {
        return action_aware() ? s.extended() : s.x;
    }

    /// The value function of the constructed MDP: -grit, +reach, raw values unchanged.
    double raw(std::span<const double> p) const {
        const double v = (*this)(p);
        return range_ == FieldRange::grit ? -v : v;
    }

    // Monte Carlo confidence -------------------------------------------------

    void set_visits(std::vector<std::size_t> visits, std::size_t min_visits) {
        if (!visits.empty() && visits.size() != values_.size()) throw InputError("one visit count per node expected");
        visits_ = std::move(visits);
        min_visits_ = min_visits;
    }
    const std::vector<std::size_t>& visits() const { return visits_; }
    std::size_t min_visits() const { return min_visits_; }
    bool has_visits() const { return !visits_.empty(); }

    bool confident_index(std::size_t index) const { return visits_.empty() || visits_.at(index) >= min_visits_; }

    bool confident(std::span<const double> p) const {
        if (visits_.empty()) return true;
        if (!grid_) return true;
        for (const auto& [node, w] : grid_->stencil(p))
            if (w > 0.0 && visits_[node] < min_visits_) return false;
        return true;
    }

    FieldMetadata metadata;

private:
    double finish(double v) const {
        if (range_ == FieldRange::raw_value) return v;
        return std::clamp(v, 0.0, 1.0);
    }

    void clamp_values() {
        for (auto& v : values_) v = finish(v);
    }

    FieldRange range_ = FieldRange::raw_value;
    std::optional<Grid> grid_;
    std::vector<double> values_;
    std::shared_ptr<const Function> fn_;
    std::size_t analytic_dims_ = 0;
    std::size_t state_dims_ = 0;
    std::vector<double> lower_, upper_;
    std::vector<std::size_t> visits_;
    std::size_t min_visits_ = 1;
};

} // namespace gritlab
