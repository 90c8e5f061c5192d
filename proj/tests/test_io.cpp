#include "test_support.hpp"

#include "gritlab/io.hpp"
#include "gritlab/scenario_config.hpp"

#include <gtest/gtest.h>

using namespace gritlab;
using gritlab::testing::sv;

namespace {

fs::path scenario(const std::string& name) { return fs::path(GRITLAB_SCENARIO_DIR) / (name + ".ini"); }

std::string minimal_linear(const std::string& extra = "") {
    return "[diffusion]\nmodel = linear\nnames = x\nsigma = 1\ndt = 0.01\nhorizon = 1\nlower = 0\nupper = 1\n"
           "lower_face = absorb\nupper_face = absorb\ninitial = 0.5\n[effect]\npredicate = value(x) >= 1\n" +
           extra;
}

template <class Fn>
std::string config_error(Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Io, TrajectoryJsonlRoundTripIsExact) {
    Trajectory t;
    t.samples = {sv(0.0, {0.1, 1.0 / 3.0}, {0.5}), sv(0.1, {-2e-17, 7.0}, {0.25})};
    t.terminal = true;
    const auto text = io::trajectory_to_jsonl(t);
    const auto back = io::trajectory_from_jsonl(text);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back.samples[0].x, t.samples[0].x);
    EXPECT_EQ(back.samples[1].u, t.samples[1].u);
    EXPECT_TRUE(back.terminal);
    EXPECT_EQ(io::trajectory_to_jsonl(back), text);
}

TEST(Io, TrajectorySchemaErrorsNameTheLine) {
    const std::string bad = "{\"t\": 0, \"x\": [0]}\n{\"t\": 1}\n";
    try {
        io::trajectory_from_jsonl(bad, "f.jsonl");
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("f.jsonl:2"), std::string::npos) << e.what();
    }
    EXPECT_THROW(io::trajectory_from_jsonl("{\"t\": 0, \"x\": [0], \"terminal\": true}\n{\"t\": 1, \"x\": [1]}\n"),
                 SchemaError);
    EXPECT_THROW(io::trajectory_from_jsonl("{\"t\": 1, \"x\": [0]}\n{\"t\": 0, \"x\": [1]}\n"), SchemaError);
    EXPECT_THROW(io::trajectory_from_jsonl("not json\n"), SchemaError);
}

TEST(Io, FieldRoundTripKeepsValuesNamesAndVisits) {
    const Grid g({0.0, -1.0}, {1.0, 1.0}, {3, 2});
    auto f = ValueField::on_grid(FieldRange::grit, g, {0.0, 0.1, 0.2, 0.3, 0.4, 1.0}, 1);
    f.set_visits({1, 2, 3, 4, 5, 6}, 3);
    f.metadata = FieldMetadata{"monte_carlo_first_visit", 10, 0.0, 1e-9};
    const auto j = io::field_to_json(f, {"x", "u0"});
    std::vector<std::string> names;
    const auto back = io::field_from_json(io::parse_json(j.dump(), "field"), &names);
    EXPECT_EQ(names, (std::vector<std::string>{"x", "u0"}));
    EXPECT_EQ(back.values(), f.values());
    EXPECT_EQ(back.visits(), f.visits());
    EXPECT_EQ(back.min_visits(), 3u);
    EXPECT_EQ(back.state_dims(), 1u);
    EXPECT_TRUE(back.action_aware());
    EXPECT_EQ(back.metadata.solver, "monte_carlo_first_visit");
    EXPECT_EQ(io::field_to_json(back, names).dump(), j.dump());

    const auto tab = ValueField::tabular(FieldRange::reach, {0.25, 0.5});
    const auto tback = io::field_from_json(io::field_to_json(tab));
    EXPECT_TRUE(tback.is_tabular());
    EXPECT_EQ(tback.values(), tab.values());
    EXPECT_THROW(io::field_from_json(io::json{{"mode", "grit"}}), SchemaError);
}

TEST(Io, MdpRoundTrip) {
    const auto m = catch_gridworld(4, 3, 2);
    const auto back = io::mdp_from_json(io::mdp_to_json(m));
    EXPECT_EQ(back.num_states, m.num_states);
    EXPECT_EQ(back.terminal, m.terminal);
    EXPECT_EQ(back.component_names, m.component_names);
    EXPECT_EQ(back.coords, m.coords);
    ASSERT_EQ(back.kernel.size(), m.kernel.size());
    for (std::size_t r = 0; r < m.kernel.size(); ++r) {
        ASSERT_EQ(back.kernel[r].size(), m.kernel[r].size());
        for (std::size_t k = 0; k < m.kernel[r].size(); ++k) {
            EXPECT_EQ(back.kernel[r][k].next, m.kernel[r][k].next);
            EXPECT_EQ(back.kernel[r][k].prob, m.kernel[r][k].prob);
        }
    }
    EXPECT_EQ(io::mdp_to_json(back).dump(), io::mdp_to_json(m).dump());
}

TEST(Io, WriteAtomicReplacesContent) {
    const auto dir = fs::temp_directory_path() / "gritlab_io_test";
    fs::create_directories(dir);
    io::write_atomic(dir / "a.txt", "one");
    io::write_atomic(dir / "a.txt", "two");
    EXPECT_EQ(io::read_file(dir / "a.txt"), "two");
    fs::remove_all(dir);
    EXPECT_THROW(io::read_file(dir / "missing"), InputError);
}

TEST(ScenarioConfig, ShippedConfigsMatchTheBuiltins) {
    for (const auto& name : builtin_names()) {
        const auto c = load_scenario_config(scenario(name));
        const auto b = detail::builtin_config(name);
        EXPECT_EQ(c.spec.name, b.spec.name);
        EXPECT_EQ(c.spec.episodes, b.spec.episodes);
        EXPECT_EQ(c.spec.seed, b.spec.seed);
        EXPECT_EQ(c.spec.initial, b.spec.initial);
        EXPECT_EQ(c.grid_points, b.grid_points);
        EXPECT_EQ(c.proper, b.proper);
        EXPECT_EQ(c.lookahead, b.lookahead);
        EXPECT_EQ(c.action_set, b.action_set);
        EXPECT_EQ(c.spec.effect.predicate.text(), b.spec.effect.predicate.text());
        EXPECT_EQ(c.spec.impulses.size(), b.spec.impulses.size());
        // the same episode comes out of both specs
        auto cs = c.spec, bs = b.spec;
        cs.diffusion.horizon = bs.diffusion.horizon = std::min(1.0, bs.diffusion.horizon);
        const auto tc = simulate_episode(cs, 0), tb = simulate_episode(bs, 0);
        ASSERT_EQ(tc.size(), tb.size()) << name;
        EXPECT_EQ(tc.samples.back().x, tb.samples.back().x) << name;
    }
}

TEST(ScenarioConfig, ErrorsNameSectionAndKey) {
    EXPECT_NO_THROW(parse_scenario_config(minimal_linear()));
    auto msg = config_error([] { parse_scenario_config(minimal_linear("[bogus]\na = 1\n"), "s.ini"); });
    EXPECT_NE(msg.find("unknown section [bogus]"), std::string::npos) << msg;
    msg = config_error([] { parse_scenario_config(minimal_linear("[discretize]\npoints = many\n"), "s.ini"); });
    EXPECT_NE(msg.find("[discretize] points"), std::string::npos) << msg;
    msg = config_error([] {
        auto text = minimal_linear();
        text.replace(text.find("value(x) >= 1"), 13, "value(99) >= 1");
        parse_scenario_config(text, "s.ini");
    });
    EXPECT_NE(msg.find("[effect] predicate"), std::string::npos) << msg;
    msg = config_error([] { parse_scenario_config("[scenario]\nbuiltin = nope\n", "s.ini"); });
    EXPECT_NE(msg.find("nope"), std::string::npos) << msg;
    msg = config_error([] { parse_scenario_config("[diffusion\nmodel = linear\n", "s.ini"); });
    EXPECT_NE(msg.find("s.ini:1"), std::string::npos) << msg;
    EXPECT_THROW(load_scenario_config("/nonexistent/file.ini"), ConfigError);
}

TEST(ScenarioConfig, BuiltinOverrides) {
    const auto c = parse_scenario_config("[scenario]\nbuiltin = ou_1d\nepisodes = 3\nseed = 42\n");
    EXPECT_EQ(c.spec.episodes, 3u);
    EXPECT_EQ(c.spec.seed, 42u);
    EXPECT_EQ(c.grid_points, std::vector<std::size_t>{81});
}
