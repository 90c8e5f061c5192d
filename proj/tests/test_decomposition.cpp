#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace gritlab;
using gritlab::testing::sv;

namespace {

ValueField raw_field(std::size_t dims, ValueField::Function fn, std::size_t state_dims = 0) {
    return ValueField::analytic(FieldRange::raw_value, dims, std::move(fn), state_dims);
}

Trajectory two_point(std::vector<double> a, std::vector<double> b, double t1 = 0.0, double t2 = 1.0) {
    Trajectory t;
    t.samples = {sv(t1, std::move(a)), sv(t2, std::move(b))};
    return t;
}

} // namespace

TEST(Derivatives, CentralDifferencesAreExactOnQuadratics) {
    const auto v = raw_field(2, [](std::span<const double> p) { return p[0] * p[0] + 3.0 * p[0] * p[1] - p[1]; });
    const std::vector<double> p{0.3, -0.7};
    DerivativeConfig c;
    c.step = {1e-3, 1e-3};
    const auto g = grad(v, p, c);
    EXPECT_NEAR(g[0], 2 * 0.3 + 3 * -0.7, 1e-9);
    EXPECT_NEAR(g[1], 3 * 0.3 - 1.0, 1e-9);
    const auto h = hessian_terms(v, p, c);
    EXPECT_NEAR(h[0], 2.0, 1e-5);
    EXPECT_NEAR(h[1], 3.0, 1e-5);
    EXPECT_NEAR(h[2], 3.0, 1e-5);
    EXPECT_NEAR(h[3], 0.0, 1e-5);
}

TEST(Derivatives, ProductFieldHasOnlyCrossCurvature) {
    const auto v = raw_field(3, [](std::span<const double> p) { return p[0] * p[2]; });
    const std::vector<double> p{1.5, 2.0, -0.5};
    DerivativeConfig c;
    c.step = {0.01, 0.01, 0.01};
    const auto h = hessian_terms(v, p, c);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            const bool cross = (i == 0 && j == 2) || (i == 2 && j == 0);
            EXPECT_NEAR(h[i * 3 + j], cross ? 1.0 : 0.0, 1e-9) << i << "," << j;
        }
}

TEST(Derivatives, OneSidedAtTheSupportEdge) {
    const Grid g({0.0}, {1.0}, {11});
    std::vector<double> vals;
    for (std::size_t i = 0; i < 11; ++i) vals.push_back(0.1 * static_cast<double>(i));
    const auto f = ValueField::on_grid(FieldRange::grit, g, vals, 1);
    const std::vector<double> edge{1.0};
    EXPECT_NEAR(grad(f, edge)[0], 1.0, 1e-12);
    DerivativeConfig strict;
    strict.clamp_at_bounds = false;
    EXPECT_THROW(grad(f, edge, strict), DomainError);
    const std::vector<double> outside{1.2};
    EXPECT_THROW(grad(f, outside), DomainError);
    EXPECT_THROW(grad(ValueField::tabular(FieldRange::grit, {0.5}), edge), CapabilityError);
}

TEST(GFormula, LinearFieldGivesExactComponentChanges) {
    const auto v = raw_field(2, [](std::span<const double> p) { return 2.0 * p[0] - 0.5 * p[1]; });
    Trajectory t;
    t.samples = {sv(0, {0.0, 0.0}), sv(0.5, {1.0, 2.0}), sv(1.0, {0.5, 1.0})};
    const auto g = g_formula(t, v, 7);
    EXPECT_NEAR(g[0], 2.0 * 0.5, 1e-9);
    EXPECT_NEAR(g[1], -0.5 * 1.0, 1e-9);
}

TEST(GFormula, IsLinearInTheField) {
    const auto v1 = raw_field(2, [](std::span<const double> p) { return std::sin(p[0]) * p[1]; });
    const auto v2 = raw_field(2, [](std::span<const double> p) { return p[0] * p[0] * p[0] + std::exp(p[1]); });
    const auto sum = raw_field(2, [&](std::span<const double> p) { return v1(p) + 2.0 * v2(p); });
    const auto t = two_point({0.1, 0.2}, {0.9, -0.4});
    const auto a = g_formula(t, v1, 10), b = g_formula(t, v2, 10), c = g_formula(t, sum, 10);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(c[j], a[j] + 2.0 * b[j], 1e-9);
}

TEST(GFormula, ConvergesToTheChangeAlongSmoothPaths) {
    const auto v = raw_field(2, [](std::span<const double> p) { return std::sin(p[0]) * std::cos(p[1]); });
    const auto t = two_point({0.0, 0.0}, {1.0, 1.0});
    const auto g = g_formula(t, v, 200);
    const double direct = std::sin(1.0) * std::cos(1.0);
    EXPECT_NEAR(g[0] + g[1], direct, 1e-5);
}

TEST(HTerm, ActionComponentsOfAnActionAwareField) {
    const auto v = raw_field(2, [](std::span<const double> p) { return p[0] + 3.0 * p[1]; }, 1);
    Trajectory t;
    t.samples = {sv(0, {0.0}, {0.0}), sv(1, {0.5}, {1.0})};
    const auto h = h_term(t, v, 4);
    ASSERT_EQ(h.size(), 1u);
    EXPECT_NEAR(h[0], 3.0, 1e-9);
    const auto c = decompose(t, v, 4);
    EXPECT_NEAR(c.g[0], 0.5, 1e-9);
    EXPECT_NEAR(c.phi()[1], 3.0, 1e-9);
    EXPECT_THROW(h_term(t, raw_field(1, [](std::span<const double> p) { return p[0]; }), 4), CapabilityError);
}

TEST(Decompose, QuadraticVariationSecondOrderTerm) {
    const auto v = raw_field(1, [](std::span<const double> p) { return p[0] * p[0]; });
    const auto t = two_point({0.0}, {0.4}, 0.0, 0.25);
    DerivativeConfig c;
    c.step = {1e-3};
    const auto r = decompose(t, v, 5, c);
    EXPECT_EQ(r.sigma_source, "quadratic_variation");
    EXPECT_NEAR(r.g[0], 0.16, 1e-9);
    // 1/2 * (dX^2 / dt) * v'' * dt = dX^2
    EXPECT_NEAR(r.g_dot[0], 0.16, 1e-6);
    EXPECT_NEAR(r.direct_delta, 0.16, 1e-15);
    EXPECT_NEAR(r.total, r.g[0] + r.g_dot[0], 1e-15);
}

TEST(Decompose, ExactDiffusionSecondOrderTerms) {
    DiffusionSpec d;
    d.n = 2;
    d.sigma = [](std::span<const double>, std::span<const double>) { return std::vector<double>{0.3, 0.0, 0.4, 0.5}; };
    const auto v = raw_field(2, [](std::span<const double> p) { return p[0] * p[0] + p[0] * p[1]; });
    const auto t = two_point({0.0, 0.0}, {0.1, 0.1}, 0.0, 2.0);
    DerivativeConfig c;
    c.step = {1e-3, 1e-3};
    const auto r = decompose(t, v, 4, c, &d);
    EXPECT_EQ(r.sigma_source, "exact");
    // sigma sigma^T = [[0.09, 0.12], [0.12, 0.41]]; H = [[2, 1], [1, 0]]
    EXPECT_NEAR(r.g_dot[0], 0.5 * 0.09 * 2.0 * 2.0, 1e-6);
    EXPECT_NEAR(r.g_dot[1], 0.0, 1e-6);
    EXPECT_NEAR(r.g_ddot[1], 0.5 * 0.12 * 1.0 * 2.0, 1e-6);
    EXPECT_NEAR(r.g_ddot[2], r.g_ddot[1], 1e-15);
    const auto phi = r.phi();
    EXPECT_NEAR(phi[0], r.g[0] + r.g_dot[0] + r.g_ddot[1], 1e-15);
    EXPECT_NEAR(phi[0] + phi[1], r.total, 1e-12);
}

TEST(Decompose, DegenerateAndInvalidSegments) {
    const auto v = raw_field(1, [](std::span<const double> p) { return p[0]; });
    Trajectory one;
    one.samples = {sv(1.0, {0.5})};
    const auto z = decompose(one, v, 3);
    EXPECT_EQ(z.total, 0.0);
    EXPECT_EQ(z.t1, z.t2);
    const auto t = two_point({0.0}, {1.0});
    EXPECT_THROW(decompose(t, v, 0), InputError);
    EXPECT_THROW(decompose(two_point({0.0, 1.0}, {1.0, 1.0}), v, 2), InputError);
    EXPECT_THROW(decompose(t, ValueField::tabular(FieldRange::grit, {0.1}), 2), CapabilityError);
}

TEST(Decompose, RulingContributionSumsSelectedImpacts) {
    const std::vector<double> phi{0.5, -0.25, 0.125};
    EXPECT_DOUBLE_EQ(ruling_contribution(phi, {0, 2}), 0.625);
    EXPECT_THROW(ruling_contribution(phi, {3}), std::out_of_range);
}

TEST(ExpectedDecompose, MeansAndStandardErrors) {
    const auto v = raw_field(1, [](std::span<const double> p) { return 4.0 * p[0]; });
    std::vector<Trajectory> segs{two_point({0.0}, {1.0}), two_point({0.0}, {2.0}), two_point({0.0}, {3.0})};
    const auto e = expected_decompose(segs, v, 3);
    EXPECT_EQ(e.n_segments, 3u);
    EXPECT_NEAR(e.mean.g[0], 8.0, 1e-9);
    EXPECT_NEAR(e.stderr_.g[0], 4.0 / std::sqrt(3.0), 1e-9);
    EXPECT_NEAR(e.mean.direct_delta, 8.0, 1e-12);
    EXPECT_NEAR(e.phi[0], e.mean.total, 1e-9);
    EXPECT_THROW(expected_decompose({}, v, 3), InputError);
}
