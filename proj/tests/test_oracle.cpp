#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace gritlab;
using gritlab::testing::last_state_effect;
using gritlab::testing::random_mdp;

namespace {

SolverConfig tight() {
    SolverConfig c;
    c.tolerance = 1e-13;
    return c;
}

/// Random MDP whose every kernel row is a single successor.
MdpSpec random_deterministic_mdp(std::mt19937_64& rng) {
    auto m = random_mdp(rng, true);
    for (std::size_t s = 0; s + 2 < m.num_states; ++s)
        for (std::size_t a = 0; a < m.num_actions(); ++a) {
            auto& row = m.row(s, a);
            row = {Transition{row[std::uniform_int_distribution<std::size_t>(0, row.size() - 1)(rng)].next, 1.0}};
        }
    return m;
}

} // namespace

TEST(Oracle, HandComputedTwoActionExample) {
    auto m = MdpSpec::enumerated(4, {"a", "b"}, 4);
    m.row(0, 0) = {{1, 0.5}, {3, 0.5}};
    m.row(0, 1) = {{2, 1.0}};
    m.row(1, 0) = {{3, 0.25}, {2, 0.75}};
    m.row(1, 1) = {{3, 1.0}};
    m.terminal[2] = true;
    const auto b = last_state_effect(m);
    const auto lo = oracle::min_reach_prob(m, b);
    const auto hi = oracle::max_reach_prob(m, b);
    EXPECT_DOUBLE_EQ(lo[0], 0.0);
    EXPECT_DOUBLE_EQ(hi[0], 1.0);
    EXPECT_DOUBLE_EQ(lo[1], 0.25);
    EXPECT_DOUBLE_EQ(hi[1], 1.0);
}

TEST(Oracle, AgreesWithValueIterationOnRandomMdps) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const auto m = random_mdp(rng, trial % 2 == 0);
        const auto b = last_state_effect(m);
        const auto lo = oracle::min_reach_prob(m, b);
        const auto hi = oracle::max_reach_prob(m, b);
        const auto grit = value_iteration(build_grit_mdp(m, b), tight());
        const auto reach = value_iteration(build_reach_mdp(m, b), tight());
        for (std::size_t s = 0; s < m.num_states; ++s) {
            EXPECT_NEAR(grit.at(s), lo[s], 1e-9) << "trial " << trial << " state " << s;
            EXPECT_NEAR(reach.at(s), hi[s], 1e-9) << "trial " << trial << " state " << s;
        }
    }
}

TEST(Oracle, RefusesOversizedProblems) {
    auto big = MdpSpec::enumerated(11, {"a"}, 5);
    for (std::size_t s = 0; s + 1 < 11; ++s) big.row(s, 0) = {{s + 1, 1.0}};
    big.terminal[10] = true;
    EXPECT_THROW(oracle::min_reach_prob(big, last_state_effect(big)), OracleLimitError);
    auto wide = MdpSpec::enumerated(3, {"a", "b", "c", "d", "e"}, 2);
    EXPECT_THROW(oracle::max_reach_prob(wide, last_state_effect(wide)), OracleLimitError);
    auto deep = MdpSpec::enumerated(3, {"a"}, 51);
    EXPECT_THROW(oracle::max_reach_prob(deep, last_state_effect(deep)), OracleLimitError);
}

TEST(Oracle, ExpectedChangeBoundsHoldForEveryPolicy) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const auto m = random_mdp(rng, trial % 3 != 0);
        const auto b = last_state_effect(m);
        for (std::size_t steps : {1u, 2u, 3u}) {
            const auto t = oracle::exhaustive_delta_check(m, b, steps);
            EXPECT_TRUE(t.bounds_hold) << "trial " << trial << " steps " << steps;
            for (std::size_t s = 0; s < m.num_states; ++s) {
                EXPECT_LE(t.min_grit_change[s], 1e-12);
                for (const auto& row : t.rows) EXPECT_LE(row.reach_change[s], 1e-12);
            }
        }
    }
}

TEST(Oracle, DeterministicKernelsAttainEquality) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto m = random_deterministic_mdp(rng);
        const auto t = oracle::exhaustive_delta_check(m, last_state_effect(m), 1 + trial % 3);
        EXPECT_TRUE(t.deterministic_kernel);
        EXPECT_TRUE(t.bounds_hold);
        EXPECT_TRUE(t.equality_holds) << "trial " << trial;
        for (std::size_t s = 0; s < m.num_states; ++s) {
            EXPECT_DOUBLE_EQ(t.grit[s], t.grit[s] > 0.5 ? 1.0 : 0.0);
            EXPECT_DOUBLE_EQ(t.reach[s], t.reach[s] > 0.5 ? 1.0 : 0.0);
        }
    }
}

TEST(Oracle, SuboptimalPolicyLowersReachability) {
    // From state 0 the action "gamble" halves the chance of B, so its row shows E[dLambda] = -0.5.
    auto m = MdpSpec::enumerated(4, {"wait", "gamble"}, 3);
    m.row(0, 0) = {{1, 1.0}};
    m.row(0, 1) = {{3, 0.5}, {2, 0.5}};
    m.row(1, 0) = {{2, 1.0}};
    m.row(1, 1) = {{3, 1.0}};
    m.terminal[2] = true;
    const auto t = oracle::exhaustive_delta_check(m, last_state_effect(m), 1);
    EXPECT_DOUBLE_EQ(t.reach[0], 1.0);
    double worst = 0.0;
    for (const auto& row : t.rows) worst = std::min(worst, row.reach_change[0]);
    EXPECT_DOUBLE_EQ(worst, -0.5);
    EXPECT_TRUE(t.bounds_hold);
}
