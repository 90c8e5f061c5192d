// Command-line front end: simulate, discretize, solve, decompose, judge, oracle, replay.

#include "manifest.hpp"

#include "gritlab/gritlab.hpp"
#include "gritlab/io.hpp"
#include "gritlab/scenario_config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace gritlab::cli {

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_compute = 3;
constexpr int exit_inconclusive = 4;

/// Options whose values are file paths; manifests record them as absolute paths.
const std::vector<std::string> path_options{"--config", "--mdp", "--trajectories", "--field", "--reach-cause",
                                            "--reach-effect", "--manifest"};

struct Common {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::size_t micro_steps = 10;
    std::string config, builtin;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "Base RNG seed");
    sub->add_option("--out", c.out, "Output directory")->required();
    sub->add_option("-M,--micro-steps", c.micro_steps, "g-formula micro-steps per segment")->check(CLI::PositiveNumber);
}

void add_source(CLI::App* sub, Common& c) {
    auto* cfg = sub->add_option("--config", c.config, "Scenario config file")->check(CLI::ExistingFile);
    auto* bi = sub->add_option("--builtin", c.builtin, "Built-in scenario name")
                   ->check(CLI::IsMember(builtin_names()));
    cfg->excludes(bi);
}

std::optional<ScenarioConfig> scenario_of(const Common& c) {
    if (!c.config.empty()) return load_scenario_config(c.config);
    if (!c.builtin.empty()) return detail::builtin_config(c.builtin);
    return std::nullopt;
}

ScenarioConfig require_scenario(const Common& c) {
    auto s = scenario_of(c);
    if (!s) throw ConfigError("one of --config or --builtin is required");
    return *s;
}

std::vector<std::string> split_list(const std::string& text) {
    std::string t = text;
    std::replace(t.begin(), t.end(), ',', ' ');
    std::istringstream in(t);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

std::vector<double> number_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& w : split_list(text)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(w, &used));
            if (used != w.size()) throw std::invalid_argument(w);
        } catch (const std::exception&) {
            throw ConfigError(what + ": '" + w + "' is not a number");
        }
    }
    return out;
}

Interval interval_of(const std::string& text, const std::string& what) {
    const auto v = number_list(text, what);
    if (v.size() != 2 || !(v[0] < v[1])) throw ConfigError(what + " must be 't1,t2' with t1 < t2");
    return Interval{v[0], v[1]};
}

std::set<std::size_t> components_of(const std::string& text, const std::vector<std::string>& names, std::size_t dims,
                                    const std::string& what) {
    std::set<std::size_t> out;
    for (const auto& w : split_list(text)) {
        auto it = std::find(names.begin(), names.end(), w);
        if (it != names.end()) {
            out.insert(static_cast<std::size_t>(it - names.begin()));
            continue;
        }
        if (!w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char ch) { return std::isdigit(ch); })) {
            const auto j = static_cast<std::size_t>(std::stoul(w));
            if (j >= dims) throw ConfigError(what + ": component " + w + " out of range (" + std::to_string(dims) + " components)");
            out.insert(j);
            continue;
        }
        throw ConfigError(what + ": unknown component '" + w + "'");
    }
    if (out.empty()) throw ConfigError(what + ": at least one component required");
    return out;
}

std::vector<std::string> default_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < n; ++j) out.push_back("x" + std::to_string(j));
    return out;
}

std::string sig4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

/// Collects output files and writes the manifest last.
struct Output {
    fs::path dir;
    RunManifest manifest;

    void write(const std::string& name, const std::string& content) {
        io::write_atomic(dir / name, content);
        manifest.outputs.emplace_back(name, sha256_hex(content));
    }
    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
    void finish() { io::write_atomic(dir / "manifest.json", manifest.to_json().dump(2) + "\n"); }
};

/// Canonical arguments: `--opt=value` split, --out dropped, path options made absolute.
std::vector<std::string> canonical_args(const std::vector<std::string>& raw) {
    std::vector<std::string> split;
    for (const auto& a : raw) {
        const auto eq = a.find('=');
        if (a.rfind("--", 0) == 0 && eq != std::string::npos) {
            split.push_back(a.substr(0, eq));
            split.push_back(a.substr(eq + 1));
        } else {
            split.push_back(a);
        }
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < split.size(); ++i) {
        if (split[i] == "--out") {
            ++i;
            continue;
        }
        out.push_back(split[i]);
        if (std::find(path_options.begin(), path_options.end(), split[i]) != path_options.end() && i + 1 < split.size()) {
            out.push_back(fs::absolute(split[++i]).lexically_normal().string());
        }
    }
    return out;
}

Output begin(const std::string& command, const Common& c, const std::vector<std::string>& raw) {
    Output o;
    o.dir = c.out;
    fs::create_directories(o.dir);
    o.manifest.command = command;
    o.manifest.args = canonical_args(raw);
    o.manifest.seed = c.seed;
    o.manifest.version = "0.1.0";
    if (!c.config.empty()) o.manifest.add_input(c.config);
    return o;
}

json events_json(const Event& e) { return json{{"id", e.id}, {"predicate", e.predicate.text()}}; }

} // namespace

int run(const std::vector<std::string>& argv);

namespace {

// ---------------------------------------------------------------------------

int cmd_simulate(const Common& c, std::optional<std::size_t> episodes, const std::vector<std::string>& raw) {
    auto cfg = require_scenario(c);
    auto& s = cfg.spec;
    if (c.seed) s.seed = *c.seed;
    if (episodes) s.episodes = *episodes;
    auto out = begin("simulate", c, raw);
    out.manifest.seed = s.seed;
    const auto trajs = simulate(s);
    std::size_t hits = 0;
    for (std::size_t e = 0; e < trajs.size(); ++e) {
        char name[32];
        std::snprintf(name, sizeof name, "traj_%06zu.jsonl", e);
        out.write(name, io::trajectory_to_jsonl(trajs[e]));
        if (trajs[e].terminal_admits) ++hits;
    }
    json summary;
    summary["scenario"] = s.name;
    summary["episodes"] = trajs.size();
    summary["seed"] = s.seed;
    summary["effect"] = events_json(s.effect);
    summary["effect_hits"] = hits;
    summary["hit_fraction"] = static_cast<double>(hits) / static_cast<double>(trajs.size());
    summary["component_names"] = s.diffusion.extended_names();
    out.write_json("summary.json", summary);
    out.finish();
    std::cout << s.name << ": " << trajs.size() << " episodes, effect " << s.effect.id << " reached in " << hits
              << " (" << sig4(summary["hit_fraction"].get<double>()) << ")\n";
    return exit_ok;
}

MdpSpec discretized(const ScenarioConfig& cfg) {
    auto m = discretize(cfg.spec.diffusion, cfg.grid_points, cfg.action_set);
    if (cfg.lookahead) m.horizon = *cfg.lookahead;
    m.all_policies_proper = cfg.proper;
    return m;
}

int cmd_discretize(const Common& c, const std::string& points, const std::vector<std::string>& raw) {
    auto cfg = require_scenario(c);
    if (!points.empty()) {
        cfg.grid_points.clear();
        for (double p : number_list(points, "--points")) cfg.grid_points.push_back(static_cast<std::size_t>(p));
    }
    auto out = begin("discretize", c, raw);
    const auto m = discretized(cfg);
    auto j = io::mdp_to_json(m);
    j["effect"] = events_json(cfg.spec.effect);
    out.write_json("mdp.json", j);
    out.finish();
    std::cout << "discretized " << cfg.spec.name << " into " << m.num_states << " states x " << m.num_actions()
              << " actions\n";
    return exit_ok;
}

struct SolveOpts {
    std::string mdp, trajectories, effect, mode, names, visit_rule = "first", bins_lower, bins_upper, bins_points;
    double tolerance = 1e-10;
    std::size_t max_sweeps = 1'000'000, min_visits = 1;
    std::optional<std::size_t> horizon;
    bool proper = false;
};

Event effect_from(const std::string& text, const std::vector<std::string>& names, const std::string& id = "B") {
    return Event::admission(id, Predicate::parse(text, names));
}

int cmd_solve(const Common& c, const SolveOpts& o, const std::vector<std::string>& raw) {
    const auto scenario = scenario_of(c);
    const bool has_env = !o.mdp.empty() || (scenario && o.trajectories.empty());
    const bool has_trajs = !o.trajectories.empty();
    if (!o.mdp.empty() && scenario && !has_trajs)
        throw ConfigError("give the environment either as --mdp or as --config/--builtin, not both");
    if (has_env == has_trajs) throw ConfigError("solve needs exactly one of a tabular environment or a trajectory set");
    if (o.mode != "grit" && o.mode != "reach") throw ConfigError("--mode must be grit or reach");
    SolverConfig scfg;
    scfg.tolerance = o.tolerance;
    scfg.max_sweeps = o.max_sweeps;
    scfg.mc_min_visits = o.min_visits;
    if (o.visit_rule == "every") scfg.mc_visit_rule = VisitRule::every_visit;
    else if (o.visit_rule != "first") throw ConfigError("--visit-rule must be first or every");
    scfg.validate();

    auto out = begin("solve", c, raw);
    ValueField field;
    std::vector<std::string> names;
    if (has_env) {
        MdpSpec m;
        std::string effect_text = o.effect;
        if (!o.mdp.empty()) {
            out.manifest.add_input(o.mdp);
            const auto j = io::parse_json(io::read_file(o.mdp), o.mdp);
            m = io::mdp_from_json(j);
            if (effect_text.empty() && j.contains("effect")) effect_text = j["effect"]["predicate"].get<std::string>();
        } else {
            m = discretized(*scenario);
            if (effect_text.empty()) effect_text = scenario->spec.effect.predicate.text();
        }
        if (effect_text.empty()) throw ConfigError("no effect predicate: pass --effect");
        names = m.component_names.empty() ? default_names(m.coords.front().size()) : m.component_names;
        if (o.horizon) m.horizon = *o.horizon;
        if (o.proper) m.all_policies_proper = true;
        const auto b = effect_from(effect_text, names);
        const auto built = o.mode == "grit" ? build_grit_mdp(m, b) : build_reach_mdp(m, b);
        field = value_iteration(built, scfg);
    } else {
        out.manifest.add_input(o.trajectories);
        const auto trajs = io::read_trajectories(o.trajectories);
        const std::size_t n = trajs.front().state_dims(), mu = trajs.front().action_dims();
        std::optional<Grid> bins;
        if (!o.bins_points.empty()) {
            auto pts = number_list(o.bins_points, "--bins-points");
            std::vector<std::size_t> p;
            for (double x : pts) p.push_back(static_cast<std::size_t>(x));
            bins = Grid(number_list(o.bins_lower, "--bins-lower"), number_list(o.bins_upper, "--bins-upper"), p);
        } else if (scenario) {
            bins = Grid(scenario->spec.diffusion.lower, scenario->spec.diffusion.upper, scenario->grid_points);
        } else {
            throw ConfigError("Monte Carlo estimation needs bins: --bins-lower/--bins-upper/--bins-points or --config");
        }
        if (!o.names.empty()) names = split_list(o.names);
        else if (scenario) names = scenario->spec.diffusion.extended_names();
        else names = default_names(n + mu);
        std::string effect_text = o.effect;
        if (effect_text.empty() && scenario) effect_text = scenario->spec.effect.predicate.text();
        if (effect_text.empty()) throw ConfigError("no effect predicate: pass --effect");
        const auto b = effect_from(effect_text, names);
        field = monte_carlo_value(trajs, b, o.mode == "grit" ? RewardMode::grit : RewardMode::reach, scfg, *bins);
        names.resize(field.dims());
    }
    out.write_json("field.json", io::field_to_json(field, names));
    out.finish();
    std::cout << o.mode << " field: " << field.values().size() << " values, solver " << field.metadata.solver
              << ", sweeps " << field.metadata.iterations << ", residual " << sig4(field.metadata.residual) << "\n";
    return exit_ok;
}

struct DerivOpts {
    std::string scheme = "central", steps;
    bool no_clamp = false;

    DerivativeConfig config() const {
        DerivativeConfig d;
        if (scheme == "forward") d.scheme = DiffScheme::forward;
        else if (scheme != "central") throw ConfigError("--scheme must be central or forward");
        if (!steps.empty()) d.step = number_list(steps, "--fd-step");
        d.clamp_at_bounds = !no_clamp;
        d.validate();
        return d;
    }
};

struct FieldInput {
    ValueField field;
    std::vector<std::string> names;
};

FieldInput load_field(const std::string& path, Output& out) {
    out.manifest.add_input(path);
    FieldInput f;
    f.field = io::read_field(path, &f.names);
    return f;
}

int cmd_decompose(const Common& c, const std::string& field_path, const std::string& trajs_path,
                  const std::string& interval, const DerivOpts& d, const std::vector<std::string>& raw) {
    const auto scenario = scenario_of(c);
    auto out = begin("decompose", c, raw);
    const auto f = load_field(field_path, out);
    out.manifest.add_input(trajs_path);
    const auto trajs = io::read_trajectories(trajs_path);
    const auto iv = interval_of(interval, "--interval");
    std::vector<Trajectory> segments;
    for (const auto& t : trajs) {
        auto seg = t.slice(iv.t1, iv.t2);
        if (seg.size() >= 1 && seg.samples.front().t <= iv.t1 + 1e-9 * std::max(1.0, std::abs(iv.t1)) &&
            seg.samples.back().t >= iv.t2 - 1e-9 * std::max(1.0, std::abs(iv.t2)))
            segments.push_back(std::move(seg));
    }
    if (segments.empty()) throw InputError("no trajectory covers the interval [" + sig4(iv.t1) + ", " + sig4(iv.t2) + "]");
    const auto res = expected_decompose(segments, f.field, c.micro_steps, d.config(),
                                        scenario ? &scenario->spec.diffusion : nullptr);
    auto j = io::contribution_to_json(res);
    j["component_names"] = f.names;
    out.write_json("contribution.json", j);
    out.finish();
    std::cout << "contributions over [" << sig4(iv.t1) << ", " << sig4(iv.t2) << "] from " << res.n_segments
              << " segments:";
    for (std::size_t k = 0; k < res.phi.size(); ++k)
        std::cout << " " << (k < f.names.size() ? f.names[k] : std::to_string(k)) << "=" << sig4(res.phi[k]);
    std::cout << "; total " << sig4(res.mean.total) << ", direct " << sig4(res.mean.direct_delta) << "\n";
    return exit_ok;
}

struct JudgeOpts {
    std::string field, trajectories, cause_id = "A", cause_ruling, cause_interval, cause_predicate, effect,
        effect_id = "B", reach_cause, reach_effect;
    double max_window = 1.0;
    std::optional<double> rise, floor, margin, unity, null_phi;
    bool cause_unique = false;
};

int cmd_judge(const Common& c, const JudgeOpts& o, const DerivOpts& d, const std::vector<std::string>& raw) {
    const auto scenario = scenario_of(c);
    auto out = begin("judge", c, raw);
    const auto f = load_field(o.field, out);
    out.manifest.add_input(o.trajectories);
    const auto trajs = io::read_trajectories(o.trajectories);
    const std::size_t dims = trajs.front().samples.front().dims();
    std::vector<std::string> names = f.names;
    if (names.size() != dims && scenario) names = scenario->spec.diffusion.extended_names();
    if (names.size() != dims) names = default_names(dims);

    std::string effect_text = o.effect;
    if (effect_text.empty() && scenario) effect_text = scenario->spec.effect.predicate.text();
    if (effect_text.empty()) throw ConfigError("no effect predicate: pass --effect");
    const auto b = effect_from(effect_text, names, o.effect_id);

    if (o.cause_interval.empty() == o.cause_predicate.empty())
        throw ConfigError("give the cause as exactly one of --cause-interval or --cause-predicate");
    Event a;
    if (!o.cause_interval.empty()) {
        a = Event::on_interval(o.cause_id, components_of(o.cause_ruling, names, dims, "--cause-ruling"),
                               interval_of(o.cause_interval, "--cause-interval"));
    } else {
        a = Event::admission(o.cause_id, Predicate::parse(o.cause_predicate, names));
        if (!o.cause_ruling.empty()) a.ruling = components_of(o.cause_ruling, names, dims, "--cause-ruling");
    }

    JudgeConfig jc;
    jc.micro_steps = c.micro_steps;
    jc.derivative = d.config();
    jc.diffusion = scenario ? &scenario->spec.diffusion : nullptr;
    jc.max_window = o.max_window;
    jc.tol = f.field.has_visits() ? Tolerances::monte_carlo() : Tolerances{};
    if (o.rise) jc.tol.rise = *o.rise;
    if (o.floor) jc.tol.floor = *o.floor;
    if (o.margin) jc.tol.margin = *o.margin;
    if (o.unity) jc.tol.unity = *o.unity;
    if (o.null_phi) jc.tol.null_phi = *o.null_phi;

    auto v = check_causation(a, b, trajs, f.field, jc);
    check_sufficient(v, jc.tol);
    if (!o.reach_cause.empty() || !o.reach_effect.empty()) {
        if (o.reach_cause.empty() || o.reach_effect.empty())
            throw CapabilityError("necessary-cause check needs both --reach-cause and --reach-effect");
        const auto ra = load_field(o.reach_cause, out);
        const auto rb = load_field(o.reach_effect, out);
        std::vector<std::vector<double>> states;
        for (const auto& t : trajs)
            for (const auto& s : t.samples) states.push_back(ra.field.point(s));
        check_necessary(v, ra.field, rb.field, states, o.cause_unique, jc.tol);
    }
    auto vj = io::verdict_to_json(v);
    vj["null_event"] = v.c1 ? json(classify_null_event(v, jc.tol)) : json(nullptr);
    out.write_json("verdict.json", vj);
    auto cj = v.c1 ? io::contribution_to_json(v.contribution) : json(nullptr);
    if (v.c1) cj["component_names"] = names;
    out.write_json("contribution.json", cj);
    out.finish();

    std::cout << a.id << " -> " << b.id << ": " << (v.inconclusive ? "INCONCLUSIVE" : v.is_cause ? "CAUSE" : "NOT A CAUSE")
              << "\n  c1 " << v.c1 << "  c2 " << v.c2.pass << " (delta " << sig4(v.c2.delta) << ")  c3 " << v.c3.pass
              << " (ruling " << sig4(v.c3.ruling_sum) << " vs " << sig4(v.c3.neg_nonruling_sum) << ")\n  sufficient "
              << (v.sufficient ? (*v.sufficient ? "yes" : "no") : "n/a") << ", necessary "
              << (v.necessary ? (*v.necessary ? "yes" : "no") : "n/a") << ", dominant " << (v.dominant ? "yes" : "no")
              << ", matched " << v.matched << "\n";
    for (const auto& n : v.notes) std::cout << "  note: " << n << "\n";
    return v.inconclusive ? exit_inconclusive : exit_ok;
}

int cmd_oracle(const Common& c, const std::string& mdp_path, const std::string& effect, std::size_t steps,
               const std::vector<std::string>& raw) {
    auto out = begin("oracle", c, raw);
    out.manifest.add_input(mdp_path);
    const auto j = io::parse_json(io::read_file(mdp_path), mdp_path);
    const auto m = io::mdp_from_json(j);
    std::string text = effect;
    if (text.empty() && j.contains("effect")) text = j["effect"]["predicate"].get<std::string>();
    if (text.empty()) throw ConfigError("no effect predicate: pass --effect");
    const auto names = m.component_names.empty() ? default_names(m.coords.front().size()) : m.component_names;
    const auto b = effect_from(text, names);
    const auto t = oracle::exhaustive_delta_check(m, b, steps);
    json r;
    r["grit"] = t.grit;
    r["reach"] = t.reach;
    r["min_grit_change"] = t.min_grit_change;
    r["max_reach_change"] = t.max_reach_change;
    r["deterministic_kernel"] = t.deterministic_kernel;
    r["bounds_hold"] = t.bounds_hold;
    r["equality_holds"] = t.equality_holds;
    json rows = json::array();
    for (const auto& row : t.rows)
        rows.push_back(json{{"policy", row.policy}, {"grit_change", row.grit_change}, {"reach_change", row.reach_change}});
    r["policies"] = rows;
    out.write_json("oracle.json", r);
    out.finish();
    std::cout << "oracle: " << t.rows.size() << " policies, bounds " << (t.bounds_hold ? "hold" : "VIOLATED")
              << ", equality " << (t.equality_holds ? "holds" : "does not hold") << "\n";
    return exit_ok;
}

int cmd_replay(const std::string& manifest_path, const std::string& out_dir) {
    const auto m = RunManifest::from_json(io::parse_json(io::read_file(manifest_path), manifest_path));
    for (const auto& [path, hash] : m.inputs) {
        if (!fs::exists(path)) throw InputError("manifest input missing: " + path);
        if (sha256_file(path) != hash) throw InputError("manifest input changed since the run: " + path);
    }
    std::vector<std::string> args{m.command};
    args.insert(args.end(), m.args.begin(), m.args.end());
    args.push_back("--out");
    args.push_back(out_dir);
    const int code = run(args);
    if (code != exit_ok && code != exit_inconclusive) return code;
    std::size_t differing = 0;
    for (const auto& [name, hash] : m.outputs) {
        const fs::path p = fs::path(out_dir) / name;
        if (!fs::exists(p) || sha256_file(p) != hash) {
            ++differing;
            std::cerr << "replay: output differs: " << name << "\n";
        }
    }
    if (differing > 0) {
        std::cerr << "replay: " << differing << " of " << m.outputs.size() << " outputs differ\n";
        return exit_compute;
    }
    std::cout << "replay: all " << m.outputs.size() << " outputs byte-identical\n";
    return exit_ok;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
        dynamic_cast<const InputError*>(&e) || dynamic_cast<const DiscretizationError*>(&e) ||
        dynamic_cast<const OracleLimitError*>(&e))
        return exit_config;
    return exit_compute;
}

} // namespace

int run(const std::vector<std::string>& argv) {
    CLI::App app{"gritlab: grit, reachability and causal verdicts for stochastic processes"};
    app.require_subcommand(1);

    Common common;
    std::optional<std::size_t> episodes;
    auto* sim = app.add_subcommand("simulate", "Simulate scenario episodes into trajectory files");
    add_common(sim, common);
    add_source(sim, common);
    sim->add_option("--episodes", episodes, "Override the episode count");

    std::string points;
    auto* disc = app.add_subcommand("discretize", "Discretize a scenario's diffusion into a tabular MDP");
    add_common(disc, common);
    add_source(disc, common);
    disc->add_option("--points", points, "Grid node counts per component");

    SolveOpts so;
    auto* solve = app.add_subcommand("solve", "Compute a grit or reachability field");
    add_common(solve, common);
    add_source(solve, common);
    solve->add_option("--mdp", so.mdp, "Tabular MDP file")->check(CLI::ExistingFile);
    solve->add_option("--trajectories", so.trajectories, "Trajectory directory or file (Monte Carlo)")->check(CLI::ExistingPath);
    solve->add_option("--effect", so.effect, "Effect predicate");
    solve->add_option("--mode", so.mode, "grit or reach")->required();
    solve->add_option("--names", so.names, "Component names for predicates on trajectories");
    solve->add_option("--tolerance", so.tolerance, "Sup-norm convergence threshold");
    solve->add_option("--max-sweeps", so.max_sweeps, "Sweep cap");
    solve->add_option("--horizon", so.horizon, "Override the MDP horizon");
    solve->add_flag("--proper", so.proper, "Assert every policy terminates; iterate to the fixed point");
    solve->add_option("--visit-rule", so.visit_rule, "first or every (Monte Carlo)");
    solve->add_option("--min-visits", so.min_visits, "Visits needed for a trusted estimate");
    solve->add_option("--bins-lower", so.bins_lower, "Monte Carlo binning grid lower bounds");
    solve->add_option("--bins-upper", so.bins_upper, "Monte Carlo binning grid upper bounds");
    solve->add_option("--bins-points", so.bins_points, "Monte Carlo binning grid node counts");

    std::string field, trajs, interval;
    DerivOpts deriv;
    auto add_deriv = [&](CLI::App* sub) {
        sub->add_option("--scheme", deriv.scheme, "central or forward differences");
        sub->add_option("--fd-step", deriv.steps, "Finite-difference step per component");
        sub->add_flag("--no-clamp", deriv.no_clamp, "Fail instead of using one-sided stencils at the support edge");
    };
    auto* dec = app.add_subcommand("decompose", "Per-component contributions to a field's change over an interval");
    add_common(dec, common);
    add_source(dec, common);
    add_deriv(dec);
    dec->add_option("--field", field, "Value field file")->required()->check(CLI::ExistingFile);
    dec->add_option("--trajectories", trajs, "Trajectory directory or file")->required()->check(CLI::ExistingPath);
    dec->add_option("--interval", interval, "t1,t2")->required();

    JudgeOpts jo;
    auto* judge = app.add_subcommand("judge", "Causation verdict for a cause event on an effect event");
    add_common(judge, common);
    add_source(judge, common);
    add_deriv(judge);
    judge->add_option("--field", jo.field, "Grit field of the effect")->required()->check(CLI::ExistingFile);
    judge->add_option("--trajectories", jo.trajectories, "Trajectory directory or file")->required()->check(CLI::ExistingPath);
    judge->add_option("--cause-id", jo.cause_id, "Cause event id");
    judge->add_option("--cause-ruling", jo.cause_ruling, "Ruling components of the cause");
    judge->add_option("--cause-interval", jo.cause_interval, "t1,t2 of the cause");
    judge->add_option("--cause-predicate", jo.cause_predicate, "Window predicate detecting the cause");
    judge->add_option("--max-window", jo.max_window, "Longest detection window");
    judge->add_option("--effect", jo.effect, "Effect predicate");
    judge->add_option("--effect-id", jo.effect_id, "Effect event id");
    judge->add_option("--rise", jo.rise, "Minimum grit increase");
    judge->add_option("--floor", jo.floor, "Nullification floor");
    judge->add_option("--margin", jo.margin, "Contribution comparison margin");
    judge->add_option("--unity", jo.unity, "Sufficient-cause tolerance");
    judge->add_option("--null-phi", jo.null_phi, "Null-event tolerance");
    judge->add_option("--reach-cause", jo.reach_cause, "Reachability field of the cause's conclusion");
    judge->add_option("--reach-effect", jo.reach_effect, "Reachability field of the effect");
    judge->add_flag("--cause-unique", jo.cause_unique, "Assert the cause is the only route to its conclusion");

    std::string mdp_path, oracle_effect;
    std::size_t steps = 1;
    auto* orc = app.add_subcommand("oracle", "Brute-force grit/reach tables and expected-change bounds of a tiny MDP");
    add_common(orc, common);
    orc->add_option("--mdp", mdp_path, "Tabular MDP file")->required()->check(CLI::ExistingFile);
    orc->add_option("--effect", oracle_effect, "Effect predicate");
    orc->add_option("--steps", steps, "Transitions per expected change")->check(CLI::PositiveNumber);

    std::string manifest_path, replay_out;
    auto* rep = app.add_subcommand("replay", "Re-run a manifest's command and compare outputs byte for byte");
    rep->add_option("--manifest", manifest_path, "Manifest file")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", replay_out, "Output directory")->required();

    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }
    const std::vector<std::string> raw(argv.begin() + 1, argv.end());
    try {
        if (*sim) return cmd_simulate(common, episodes, raw);
        if (*disc) return cmd_discretize(common, points, raw);
        if (*solve) return cmd_solve(common, so, raw);
        if (*dec) return cmd_decompose(common, field, trajs, interval, deriv, raw);
        if (*judge) return cmd_judge(common, jo, deriv, raw);
        if (*orc) return cmd_oracle(common, mdp_path, oracle_effect, steps, raw);
        if (*rep) return cmd_replay(manifest_path, replay_out);
    } catch (const std::exception& e) {
        std::cerr << "gritlab: error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return exit_config;
}

} // namespace gritlab::cli

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gritlab::cli::run(args);
}
