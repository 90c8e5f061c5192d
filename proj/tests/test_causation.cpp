#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace gritlab;
using gritlab::testing::sv;

namespace {

const std::vector<std::string> xy{"x", "y"};

/// Grit field 0.5 x + 0.5 y on the unit square (bilinear interpolation reproduces it exactly).
ValueField plane_field() {
    const Grid g({0.0, 0.0}, {1.0, 1.0}, {11, 11});
    std::vector<double> vals(g.size());
    for (std::size_t s = 0; s < g.size(); ++s) {
        const auto c = g.coords(s);
        vals[s] = 0.5 * c[0] + 0.5 * c[1];
    }
    return ValueField::on_grid(FieldRange::grit, g, vals, 2);
}

/// Path: (x0, y0) until t=1, (x1, y1) at t=2 (A happens over [1, 2]), then up to (1, 1) at t=4.
Trajectory plane_path(double x0, double y0, double x1, double y1) {
    Trajectory t;
    t.samples = {sv(0, {x0, y0}), sv(1, {x0, y0}), sv(2, {x1, y1}), sv(3, {0.5 * (x1 + 1), 0.5 * (y1 + 1)}),
                 sv(4, {1.0, 1.0})};
    return t;
}

Event both_high() { return Event::admission("B", Predicate::parse("value(x) >= 1 and value(y) >= 1", xy)); }

Event a_on(std::set<std::size_t> ruling, double t1 = 1.0, double t2 = 2.0) {
    return Event::on_interval("A", std::move(ruling), Interval{t1, t2});
}

} // namespace

TEST(Causation, RulingRiseOutweighingTheRestIsADominantCause) {
    const std::vector<Trajectory> trajs{plane_path(0.1, 0.5, 0.5, 0.3)};
    const auto v = check_causation(a_on({0}), both_high(), trajs, plane_field(), JudgeConfig{});
    EXPECT_TRUE(v.c1);
    EXPECT_TRUE(v.c2.pass);
    EXPECT_NEAR(v.c2.delta, 0.1, 1e-12);
    EXPECT_TRUE(v.c3.pass);
    EXPECT_NEAR(v.c3.ruling_sum, 0.2, 1e-9);
    EXPECT_NEAR(v.c3.neg_nonruling_sum, 0.1, 1e-9);
    EXPECT_TRUE(v.is_cause);
    EXPECT_TRUE(v.dominant);
    EXPECT_EQ(v.matched, 1u);
    EXPECT_FALSE(v.inconclusive);
}

TEST(Causation, SmallRulingShareIsACauseButNotDominant) {
    const std::vector<Trajectory> trajs{plane_path(0.1, 0.5, 0.5, 0.6)};
    const auto v = check_causation(a_on({1}), both_high(), trajs, plane_field(), JudgeConfig{});
    EXPECT_TRUE(v.is_cause);
    EXPECT_NEAR(v.c3.ruling_sum, 0.05, 1e-9);
    EXPECT_FALSE(v.dominant);
    EXPECT_FALSE(check_dominant(v));
}

TEST(Causation, NegativeRulingImpactFailsConditionThree) {
    const std::vector<Trajectory> trajs{plane_path(0.1, 0.5, 0.5, 0.4)};
    const auto v = check_causation(a_on({1}), both_high(), trajs, plane_field(), JudgeConfig{});
    EXPECT_TRUE(v.c2.pass);
    EXPECT_FALSE(v.c3.pass);
    EXPECT_FALSE(v.is_cause);
}

TEST(Causation, GritFallingBackBeforeTheEffectFailsConditionTwo) {
    Trajectory t = plane_path(0.1, 0.1, 0.5, 0.1);
    t.samples[3].x = {0.0, 0.1};
    const auto v = check_causation(a_on({0}), both_high(), {t}, plane_field(), JudgeConfig{});
    EXPECT_GT(v.c2.delta, 0.0);
    EXPECT_FALSE(v.c2.pass);
    EXPECT_FALSE(v.is_cause);
}

TEST(Causation, CauseAfterEffectOnsetFailsConditionOne) {
    const std::vector<Trajectory> trajs{plane_path(0.1, 0.1, 0.5, 0.5)};
    const auto v = check_causation(a_on({0}, 3.0, 4.0), both_high(), trajs, plane_field(), JudgeConfig{});
    EXPECT_FALSE(v.c1);
    EXPECT_FALSE(v.is_cause);
    EXPECT_TRUE(v.contribution.phi.empty());
}

TEST(Causation, TrajectoriesWithoutTheEffectAreExcludedAndNoted) {
    Trajectory miss;
    miss.samples = {sv(0, {0.1, 0.1}), sv(1, {0.1, 0.1}), sv(2, {0.2, 0.1})};
    const std::vector<Trajectory> trajs{plane_path(0.1, 0.5, 0.5, 0.3), miss};
    const auto v = check_causation(a_on({0}), both_high(), trajs, plane_field(), JudgeConfig{});
    EXPECT_EQ(v.matched, 1u);
    ASSERT_EQ(v.notes.size(), 1u);
    EXPECT_NE(v.notes[0].find("never reach B"), std::string::npos);
    EXPECT_THROW(check_causation(a_on({0}), both_high(), {miss}, plane_field(), JudgeConfig{}), InputError);
}

TEST(Causation, TemplateCauseIsDetectedOnEachTrajectory) {
    const auto templ = Event::admission("A", Predicate::parse("delta(x) >= 0.3", xy));
    const std::vector<Trajectory> trajs{plane_path(0.1, 0.5, 0.5, 0.5)};
    JudgeConfig cfg;
    cfg.max_window = 1.0;
    const auto v = check_causation(templ, both_high(), trajs, plane_field(), cfg);
    EXPECT_TRUE(v.is_cause);
    EXPECT_NEAR(v.c2.delta, 0.2, 1e-12);
}

TEST(Causation, ActionRulingNeedsAnActionAwareField) {
    Trajectory t;
    t.samples = {sv(0, {0.1, 0.1}, {0.0}), sv(1, {0.5, 0.5}, {1.0}), sv(2, {1.0, 1.0}, {1.0})};
    EXPECT_THROW(check_causation(Event::on_interval("A", {2}, Interval{0, 1}), both_high(), {t}, plane_field(), {}),
                 CapabilityError);
}

TEST(Causation, LowConfidenceGritMakesTheVerdictInconclusive) {
    auto f = plane_field();
    std::vector<std::size_t> visits(f.values().size(), 100);
    visits[f.grid()->nearest(std::vector<double>{0.1, 0.5})] = 1;
    f.set_visits(visits, 10);
    const std::vector<Trajectory> trajs{plane_path(0.1, 0.5, 0.5, 0.3)};
    const auto v = check_causation(a_on({0}), both_high(), trajs, f, JudgeConfig{});
    EXPECT_TRUE(v.inconclusive);
}

TEST(Causation, SufficientWhenTheEffectIsCertainAfterwards) {
    Trajectory t;
    t.samples = {sv(0, {0.2, 0.2}), sv(1, {0.2, 0.2}), sv(2, {1.0, 1.0})};
    auto v = check_causation(a_on({0, 1}, 0.0, 1.0), both_high(), {t}, plane_field(), JudgeConfig{});
    EXPECT_FALSE(check_sufficient(v));
    Trajectory u;
    u.samples = {sv(0, {0.2, 0.2}), sv(1, {1.0, 1.0 - 1e-9}), sv(2, {1.0, 1.0})};
    v = check_causation(a_on({0, 1}, 0.0, 1.0), both_high(), {u}, plane_field(), JudgeConfig{});
    EXPECT_TRUE(v.is_cause);
    EXPECT_TRUE(check_sufficient(v));
    ASSERT_TRUE(v.sufficient);
    EXPECT_TRUE(*v.sufficient);
}

TEST(Causation, NecessaryCauseOnGatedChainVersusTwoRoutes) {
    Verdict v;
    v.is_cause = true;
    // Gated chain: B is reachable only where A's conclusion is.
    EXPECT_TRUE(check_necessary(v, {0.0, 0.5, 1.0}, {0.0, 0.25, 0.5}, true));
    // Two routes: B stays reachable where A's conclusion is not.
    EXPECT_FALSE(check_necessary(v, {0.0, 0.5, 1.0}, {0.3, 0.25, 0.5}, true));
    EXPECT_THROW(check_necessary(v, {0.0}, {0.0}, false), ConfigError);
    v.is_cause = false;
    EXPECT_FALSE(check_necessary(v, {0.0, 0.5}, {0.0, 0.5}, true));
}

TEST(Causation, NullEventClassification) {
    EXPECT_TRUE(classify_null_event({1e-8, 0.4}, {0}));
    EXPECT_FALSE(classify_null_event({1e-3, 0.4}, {0}));
    Tolerances loose;
    loose.null_phi = 1e-2;
    EXPECT_TRUE(classify_null_event({1e-3, 0.4}, {0}, loose));
}

TEST(Causation, ToleranceValidation) {
    Tolerances t;
    t.rise = -1.0;
    EXPECT_THROW(t.validate(), ConfigError);
    const auto mc = Tolerances::monte_carlo();
    EXPECT_GT(mc.rise, Tolerances{}.rise);
}
