#pragma once

#include "gritlab/builtin_envs.hpp"
#include "gritlab/core.hpp"
#include "gritlab/diffusion.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace gritlab {

/**
A scenario plus the settings used to discretize it.

File format (INI):

    [scenario]    name, builtin (start from a built-in and override), episodes, seed, record_stride
    [diffusion]   model = linear | glucose, names, action_dim, dt, horizon, lower, upper,
                  lower_face, upper_face (absorb | reflect), initial,
                  linear: drift_matrix (n*n), drift_offset (n), action_matrix (n*m), sigma (n or n*n)
                  glucose: k_abs, f, k_egp, g_basal, s_i, k_i, sigma_g
    [policy]      <label> = <start time> : <u components>
    [impulses]    <label> = <time> <component name or index> <amount>
    [effect]      id, predicate
    [discretize]  points (per component), actions (vectors separated by ';'), lookahead, proper

Lists are separated by whitespace or commas.
*/
struct ScenarioConfig {
    ScenarioSpec spec;
    std::vector<std::size_t> grid_points;
    std::vector<std::vector<double>> action_set;
    std::optional<std::size_t> lookahead;
    bool proper = false;
};

namespace detail {

using ptree = boost::property_tree::ptree;

struct ConfigReader {
    std::string file;
    const ptree& root;

    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& msg) const {
        throw ConfigError(file + ": [" + section + "] " + key + ": " + msg);
    }

    const ptree* section(const std::string& name) const {
        auto it = root.find(name);
        return it == root.not_found() ? nullptr : &it->second;
    }

    std::optional<std::string> get(const std::string& sec, const std::string& key) const {
        const ptree* s = section(sec);
        if (!s) return std::nullopt;
        auto v = s->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return *v;
    }

    std::vector<double> numbers(const std::string& sec, const std::string& key, const std::string& text) const {
        std::string t = text;
        std::replace(t.begin(), t.end(), ',', ' ');
        std::istringstream in(t);
        std::vector<double> out;
        std::string tok;
        while (in >> tok) {
            try {
                std::size_t used = 0;
                out.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                fail(sec, key, "'" + tok + "' is not a number");
            }
        }
        return out;
    }

    std::vector<std::string> words(const std::string& text) const {
        std::string t = text;
        std::replace(t.begin(), t.end(), ',', ' ');
        std::istringstream in(t);
        std::vector<std::string> out;
        std::string tok;
        while (in >> tok) out.push_back(tok);
        return out;
    }

    std::optional<double> number(const std::string& sec, const std::string& key) const {
        auto v = get(sec, key);
        if (!v) return std::nullopt;
        auto xs = numbers(sec, key, *v);
        if (xs.size() != 1) fail(sec, key, "expected a single number");
        return xs.front();
    }

    std::optional<std::size_t> count(const std::string& sec, const std::string& key) const {
        auto v = number(sec, key);
        if (!v) return std::nullopt;
        if (*v < 0 || *v != std::floor(*v)) fail(sec, key, "expected a non-negative integer");
        return static_cast<std::size_t>(*v);
    }

    std::optional<std::vector<double>> list(const std::string& sec, const std::string& key, std::size_t expected) const {
        auto v = get(sec, key);
        if (!v) return std::nullopt;
        auto xs = numbers(sec, key, *v);
        if (expected && xs.size() != expected)
            fail(sec, key, "expected " + std::to_string(expected) + " values, got " + std::to_string(xs.size()));
        return xs;
    }

    std::vector<Face> faces(const std::string& sec, const std::string& key, const std::string& text, std::size_t n) const {
        std::vector<Face> out;
        for (const auto& w : words(text)) {
            if (w == "absorb") out.push_back(Face::absorb);
            else if (w == "reflect") out.push_back(Face::reflect);
            else fail(sec, key, "face must be absorb or reflect, got '" + w + "'");
        }
        if (out.size() == 1 && n > 1) out.assign(n, out.front());
        if (out.size() != n) fail(sec, key, "expected " + std::to_string(n) + " faces");
        return out;
    }
};

inline std::size_t component_index(const ConfigReader& r, const DiffusionSpec& d, const std::string& sec,
                                   const std::string& key, const std::string& token) {
    for (std::size_t j = 0; j < d.names.size(); ++j)
        if (d.names[j] == token) return j;
    if (!token.empty() && std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); })) {
        const auto j = static_cast<std::size_t>(std::stoul(token));
        if (j < d.n) return j;
        r.fail(sec, key, "component " + token + " out of range (n = " + std::to_string(d.n) + ")");
    }
    r.fail(sec, key, "unknown component '" + token + "'");
}

inline void linear_model(const ConfigReader& r, DiffusionSpec& d) {
    const std::size_t n = d.n, m = d.m;
    auto a = r.list("diffusion", "drift_matrix", n * n).value_or(std::vector<double>(n * n, 0.0));
    auto c = r.list("diffusion", "drift_offset", n).value_or(std::vector<double>(n, 0.0));
    auto b = m ? r.list("diffusion", "action_matrix", n * m).value_or(std::vector<double>(n * m, 0.0))
               : std::vector<double>{};
    auto s = r.list("diffusion", "sigma", 0).value_or(std::vector<double>(n, 0.0));
    if (s.size() == n) {
        std::vector<double> full(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) full[i * n + i] = s[i];
        s = full;
    } else if (s.size() != n * n) {
        r.fail("diffusion", "sigma", "expected n or n*n values");
    }
    d.mu = [a, c, b, n, m](std::span<const double> x, std::span<const double> u) {
        std::vector<double> out(c);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) out[i] += a[i * n + j] * x[j];
            for (std::size_t k = 0; k < m && k < u.size(); ++k) out[i] += b[i * m + k] * u[k];
        }
        return out;
    };
    d.sigma = [s](std::span<const double>, std::span<const double>) { return s; };
}

inline std::vector<std::vector<double>> parse_action_set(const ConfigReader& r, const std::string& text, std::size_t m) {
    std::vector<std::vector<double>> out;
    std::string part;
    std::istringstream in(text);
    while (std::getline(in, part, ';')) {
        auto u = r.numbers("discretize", "actions", part);
        if (u.size() != m) r.fail("discretize", "actions", "every action needs " + std::to_string(m) + " components");
        out.push_back(u);
    }
    if (out.empty()) r.fail("discretize", "actions", "empty action set");
    return out;
}

inline ScenarioConfig builtin_config(const std::string& name) {
    ScenarioConfig c;
    c.spec = builtin_env(name);
    const std::size_t m = c.spec.diffusion.m;
    c.action_set = {std::vector<double>(m, 0.0)};
    if (name == "bm_barrier") c.grid_points = {101};
    else if (name == "ou_1d") {
        c.grid_points = {81};
        c.action_set = ou_1d_actions();
    } else if (name == "chain_correlation") {
        c.grid_points = chain_correlation_grid();
        c.proper = true;
    } else if (name == "glucose_toy") {
        c.grid_points = glucose_toy_grid();
        c.lookahead = glucose_toy_lookahead;
    }
    return c;
}

} // namespace detail

inline ScenarioConfig parse_scenario_config(const std::string& text, const std::string& file = "<config>") {
    detail::ptree root;
    try {
        std::istringstream in(text);
        boost::property_tree::ini_parser::read_ini(in, root);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(file + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    detail::ConfigReader r{file, root};
    for (const auto& [sec, body] : root) {
        static const std::vector<std::string> known{"scenario", "diffusion", "policy", "impulses", "effect", "discretize"};
        if (!body.data().empty() && body.empty()) throw ConfigError(file + ": key '" + sec + "' outside a section");
        if (std::find(known.begin(), known.end(), sec) == known.end())
            throw ConfigError(file + ": unknown section [" + sec + "]");
    }

    ScenarioConfig c;
    const auto builtin = r.get("scenario", "builtin");
    const auto model = r.get("diffusion", "model");
    if (builtin) {
        try {
            c = detail::builtin_config(*builtin);
        } catch (const ConfigError& e) {
            r.fail("scenario", "builtin", e.what());
        }
    } else if (model && *model == "glucose") {
        c = detail::builtin_config("glucose_toy");
    }
    auto& s = c.spec;
    auto& d = s.diffusion;
    if (auto v = r.get("scenario", "name")) s.name = *v;
    if (auto v = r.count("scenario", "episodes")) s.episodes = *v;
    if (auto v = r.count("scenario", "seed")) s.seed = *v;
    if (auto v = r.count("scenario", "record_stride")) s.record_stride = *v;

    // diffusion
    if (!builtin && !model) r.fail("diffusion", "model", "required unless [scenario] builtin is given");
    if (model && *model == "glucose") {
        GlucoseParams p;
        auto set = [&](const char* key, double& field) {
            if (auto v = r.number("diffusion", key)) field = *v;
        };
        set("k_abs", p.k_abs);
        set("f", p.f);
        set("k_egp", p.k_egp);
        set("g_basal", p.g_basal);
        set("s_i", p.s_i);
        set("k_i", p.k_i);
        set("sigma_g", p.sigma_g);
        if (d.n != 3) r.fail("diffusion", "model", "the glucose model needs the gut, plasma, SI1 components");
        auto fresh = glucose_toy(p);
        d.mu = fresh.diffusion.mu;
        d.sigma = fresh.diffusion.sigma;
    } else if (model && *model == "linear") {
        if (auto v = r.get("diffusion", "names")) {
            d.names = r.words(*v);
            d.n = d.names.size();
        } else if (!builtin) {
            r.fail("diffusion", "names", "required for the linear model");
        }
        if (auto v = r.count("diffusion", "action_dim")) d.m = *v;
        detail::linear_model(r, d);
    } else if (model) {
        r.fail("diffusion", "model", "unknown model '" + *model + "' (linear or glucose)");
    }
    const std::size_t n = d.n;
    if (n == 0) r.fail("diffusion", "names", "at least one component required");
    if (auto v = r.number("diffusion", "dt")) d.dt = *v;
    if (auto v = r.number("diffusion", "horizon")) d.horizon = *v;
    if (auto v = r.list("diffusion", "lower", n)) d.lower = *v;
    if (auto v = r.list("diffusion", "upper", n)) d.upper = *v;
    if (auto v = r.get("diffusion", "lower_face")) d.lower_face = r.faces("diffusion", "lower_face", *v, n);
    if (auto v = r.get("diffusion", "upper_face")) d.upper_face = r.faces("diffusion", "upper_face", *v, n);
    if (auto v = r.list("diffusion", "initial", n)) s.initial = *v;
    if (!builtin && *model == "linear") {
        for (const char* key : {"dt", "horizon", "lower", "upper", "lower_face", "upper_face", "initial"})
            if (!r.get("diffusion", key)) r.fail("diffusion", key, "required");
    }

    // policy and impulses
    if (const auto* sec = r.section("policy")) {
        s.policy.clear();
        for (const auto& [label, node] : *sec) {
            const auto text = node.data();
            const auto colon = text.find(':');
            if (colon == std::string::npos) r.fail("policy", label, "expected '<start> : <u components>'");
            auto start = r.numbers("policy", label, text.substr(0, colon));
            auto u = r.numbers("policy", label, text.substr(colon + 1));
            if (start.size() != 1) r.fail("policy", label, "expected one start time");
            if (u.size() != d.m) r.fail("policy", label, "expected " + std::to_string(d.m) + " action components");
            s.policy.push_back(PolicySegment{start.front(), u});
        }
        std::stable_sort(s.policy.begin(), s.policy.end(),
                         [](const PolicySegment& a, const PolicySegment& b) { return a.start < b.start; });
    }
    if (const auto* sec = r.section("impulses")) {
        s.impulses.clear();
        for (const auto& [label, node] : *sec) {
            const auto w = r.words(node.data());
            if (w.size() != 3) r.fail("impulses", label, "expected '<time> <component> <amount>'");
            const auto t = r.numbers("impulses", label, w[0]);
            const auto amount = r.numbers("impulses", label, w[2]);
            s.impulses.push_back(Impulse{t.front(), detail::component_index(r, d, "impulses", label, w[1]), amount.front()});
        }
        std::stable_sort(s.impulses.begin(), s.impulses.end(),
                         [](const Impulse& a, const Impulse& b) { return a.time < b.time; });
    }

    // effect
    if (auto text = r.get("effect", "predicate")) {
        const auto names = d.extended_names();
        try {
            s.effect = Event::admission(r.get("effect", "id").value_or("B"), Predicate::parse(*text, names));
            s.effect.validate(d.n + d.m);
        } catch (const SchemaError& e) {
            r.fail("effect", "predicate", e.what());
        }
    } else if (!builtin) {
        r.fail("effect", "predicate", "required");
    }

    // discretization settings
    if (auto v = r.get("discretize", "points")) {
        auto xs = r.numbers("discretize", "points", *v);
        if (xs.size() == 1 && n > 1) xs.assign(n, xs.front());
        if (xs.size() != n) r.fail("discretize", "points", "expected one count per component");
        c.grid_points.clear();
        for (double x : xs) {
            if (x < 1 || x != std::floor(x)) r.fail("discretize", "points", "counts must be positive integers");
            c.grid_points.push_back(static_cast<std::size_t>(x));
        }
    }
    if (auto v = r.get("discretize", "actions")) c.action_set = detail::parse_action_set(r, *v, d.m);
    if (c.action_set.empty()) c.action_set = {std::vector<double>(d.m, 0.0)};
    if (auto v = r.count("discretize", "lookahead")) c.lookahead = *v;
    if (auto v = r.get("discretize", "proper")) {
        if (*v == "true" || *v == "1") c.proper = true;
        else if (*v == "false" || *v == "0") c.proper = false;
        else r.fail("discretize", "proper", "expected true or false");
    }

    try {
        s.validate();
    } catch (const Error& e) {
        throw ConfigError(file + ": " + e.what());
    }
    return c;
}

inline ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read scenario config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario_config(ss.str(), path);
}

} // namespace gritlab
