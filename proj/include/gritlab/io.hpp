#pragma once

#include "gritlab/causation.hpp"
#include "gritlab/core.hpp"
#include "gritlab/decomposition.hpp"
#include "gritlab/mdp.hpp"
#include "gritlab/value_field.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace gritlab::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Writes to a sibling temporary file and renames it into place.
inline void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + tmp.string());
        out << content;
        if (!out) throw InputError("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json(const std::string& text, const std::string& where) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(where + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Trajectories: one record per sample, {"t", "x", "u", "terminal"} in that order.

inline std::string trajectory_to_jsonl(const Trajectory& traj) {
    std::string out;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto& s = traj.samples[i];
        json rec;
        rec["t"] = s.t;
        rec["x"] = s.x;
        rec["u"] = s.u;
        rec["terminal"] = traj.terminal && i + 1 == traj.samples.size();
        out += rec.dump();
        out += '\n';
    }
    return out;
}

inline Trajectory trajectory_from_jsonl(const std::string& text, const std::string& where = "trajectory") {
    Trajectory traj;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string loc = where + ":" + std::to_string(lineno);
        if (traj.terminal) throw SchemaError(loc + ": sample after a terminal sample");
        const json rec = parse_json(line, loc);
        if (!rec.is_object() || !rec.contains("t") || !rec.contains("x"))
            throw SchemaError(loc + ": record needs fields t and x");
        StateVector s;
        try {
            s.t = rec.at("t").get<double>();
            s.x = rec.at("x").get<std::vector<double>>();
            if (rec.contains("u")) s.u = rec.at("u").get<std::vector<double>>();
            if (rec.contains("terminal")) traj.terminal = rec.at("terminal").get<bool>();
        } catch (const json::exception& e) {
            throw SchemaError(loc + ": " + e.what());
        }
        traj.samples.push_back(std::move(s));
    }
    try {
        traj.validate();
    } catch (const InputError& e) {
        throw SchemaError(where + ": " + e.what());
    }
    return traj;
}

inline void write_trajectory(const fs::path& path, const Trajectory& traj) {
    write_atomic(path, trajectory_to_jsonl(traj));
}

inline Trajectory read_trajectory(const fs::path& path) { return trajectory_from_jsonl(read_file(path), path.string()); }

/// Every *.jsonl file of a directory (sorted by name), or a single file.
inline std::vector<fs::path> trajectory_files(const fs::path& where) {
    std::vector<fs::path> files;
    if (fs::is_directory(where)) {
        for (const auto& e : fs::directory_iterator(where))
            if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
        std::sort(files.begin(), files.end());
    } else if (fs::exists(where)) {
        files.push_back(where);
    }
    if (files.empty()) throw InputError("no trajectory files at " + where.string());
    return files;
}

inline std::vector<Trajectory> read_trajectories(const fs::path& where) {
    std::vector<Trajectory> out;
    for (const auto& f : trajectory_files(where)) out.push_back(read_trajectory(f));
    return out;
}

// ---------------------------------------------------------------------------
// Grids and value fields

inline json grid_to_json(const Grid& g) {
    json j;
    j["kind"] = "grid";
    j["lower"] = g.lower();
    j["upper"] = g.upper();
    j["points"] = g.points();
    return j;
}

inline Grid grid_from_json(const json& j) {
    try {
        return Grid(j.at("lower").get<std::vector<double>>(), j.at("upper").get<std::vector<double>>(),
                    j.at("points").get<std::vector<std::size_t>>());
    } catch (const json::exception& e) {
        throw SchemaError(std::string("grid record: ") + e.what());
    }
}

inline json field_to_json(const ValueField& f, const std::vector<std::string>& component_names = {}) {
    if (f.is_analytic()) throw CapabilityError("analytic fields cannot be serialized");
    json j;
    j["mode"] = to_string(f.range());
    if (f.is_grid()) {
        j["states"] = grid_to_json(*f.grid());
        j["states"]["state_dims"] = f.state_dims();
    } else {
        j["states"] = json{{"kind", "enumerated"}, {"count", f.values().size()}};
    }
    j["values"] = f.values();
    j["residual"] = f.metadata.residual;
    j["sweeps"] = f.metadata.iterations;
    j["solver"] = f.metadata.solver;
    j["tolerance"] = f.metadata.tolerance;
    if (!component_names.empty()) j["component_names"] = component_names;
    if (f.has_visits()) {
        j["visits"] = f.visits();
        j["min_visits"] = f.min_visits();
    }
    return j;
}

inline FieldRange range_from_string(const std::string& s) {
    if (s == "grit") return FieldRange::grit;
    if (s == "reach") return FieldRange::reach;
    if (s == "raw_value") return FieldRange::raw_value;
    throw SchemaError("unknown field mode '" + s + "'");
}

inline ValueField field_from_json(const json& j, std::vector<std::string>* component_names = nullptr) {
    try {
        const auto range = range_from_string(j.at("mode").get<std::string>());
        auto values = j.at("values").get<std::vector<double>>();
        const auto& st = j.at("states");
        ValueField f;
        if (st.at("kind").get<std::string>() == "grid") {
            f = ValueField::on_grid(range, grid_from_json(st), std::move(values), st.at("state_dims").get<std::size_t>());
        } else {
            if (st.at("count").get<std::size_t>() != values.size())
                throw SchemaError("enumerated field count differs from the number of values");
            f = ValueField::tabular(range, std::move(values));
        }
        f.metadata.residual = j.value("residual", 0.0);
        f.metadata.iterations = j.value("sweeps", std::size_t{0});
        f.metadata.solver = j.value("solver", std::string{});
        f.metadata.tolerance = j.value("tolerance", 0.0);
        if (j.contains("visits"))
            f.set_visits(j.at("visits").get<std::vector<std::size_t>>(), j.value("min_visits", std::size_t{1}));
        if (component_names && j.contains("component_names"))
            *component_names = j.at("component_names").get<std::vector<std::string>>();
        return f;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("value field record: ") + e.what());
    } catch (const InputError& e) {
        throw SchemaError(std::string("value field record: ") + e.what());
    }
}

inline ValueField read_field(const fs::path& path, std::vector<std::string>* component_names = nullptr) {
    return field_from_json(parse_json(read_file(path), path.string()), component_names);
}

// ---------------------------------------------------------------------------
// Tabular MDPs

inline json mdp_to_json(const MdpSpec& m) {
    if (!m.has_kernel()) throw CapabilityError("only MDPs with an explicit kernel can be serialized");
    json j;
    j["states"] = m.grid ? grid_to_json(*m.grid) : json{{"kind", "enumerated"}, {"count", m.num_states}};
    j["component_names"] = m.component_names;
    if (!m.grid) j["coords"] = m.coords;
    json actions = json::array();
    for (const auto& a : m.actions) actions.push_back(json{{"name", a.name}, {"u", a.u}});
    j["actions"] = actions;
    j["horizon"] = m.horizon;
    j["all_policies_proper"] = m.all_policies_proper;
    std::vector<std::size_t> terminal;
    for (std::size_t s = 0; s < m.num_states; ++s)
        if (m.terminal[s]) terminal.push_back(s);
    j["terminal"] = terminal;
    json kernel = json::array();
    for (const auto& row : m.kernel) {
        json r = json::array();
        for (const auto& tr : row) r.push_back(json::array({tr.next, tr.prob}));
        kernel.push_back(r);
    }
    j["kernel"] = kernel;
    return j;
}

inline MdpSpec mdp_from_json(const json& j) {
    try {
        MdpSpec m;
        const auto& st = j.at("states");
        if (st.at("kind").get<std::string>() == "grid") {
            m.grid = grid_from_json(st);
            m.num_states = m.grid->size();
            for (std::size_t s = 0; s < m.num_states; ++s) m.coords.push_back(m.grid->coords(s));
        } else {
            m.num_states = st.at("count").get<std::size_t>();
            if (j.contains("coords")) m.coords = j.at("coords").get<std::vector<std::vector<double>>>();
            else
                for (std::size_t s = 0; s < m.num_states; ++s) m.coords.push_back({static_cast<double>(s)});
        }
        m.component_names = j.value("component_names", std::vector<std::string>{});
        for (const auto& a : j.at("actions"))
            m.actions.push_back(Action{a.at("name").get<std::string>(), a.value("u", std::vector<double>{})});
        m.horizon = j.at("horizon").get<std::size_t>();
        m.all_policies_proper = j.value("all_policies_proper", false);
        m.terminal.assign(m.num_states, false);
        for (auto s : j.at("terminal").get<std::vector<std::size_t>>()) m.terminal.at(s) = true;
        m.entry_reward.assign(m.num_states, 0.0);
        for (const auto& row : j.at("kernel")) {
            std::vector<Transition> r;
            for (const auto& tr : row) r.push_back(Transition{tr.at(0).get<std::size_t>(), tr.at(1).get<double>()});
            m.kernel.push_back(std::move(r));
        }
        if (m.kernel.size() != m.num_states * m.actions.size())
            throw SchemaError("kernel needs one row per (state, action)");
        return m;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("MDP record: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw SchemaError(std::string("MDP record: terminal state out of range"));
    }
}

inline MdpSpec read_mdp(const fs::path& path) { return mdp_from_json(parse_json(read_file(path), path.string())); }

// ---------------------------------------------------------------------------
// Reports

inline json contribution_to_json(const ContributionTerms& c, std::size_t n_segments) {
    const std::size_t n = c.g.size();
    json j;
    j["interval"] = {c.t1, c.t2};
    j["g"] = c.g;
    j["g_dot"] = c.g_dot;
    json gdd = json::array();
    for (std::size_t i = 0; i < n; ++i)
        gdd.push_back(std::vector<double>(c.g_ddot.begin() + static_cast<std::ptrdiff_t>(i * n),
                                          c.g_ddot.begin() + static_cast<std::ptrdiff_t>((i + 1) * n)));
    j["g_ddot"] = gdd;
    j["h"] = c.h;
    j["total"] = c.total;
    j["direct_delta"] = c.direct_delta;
    j["n_segments"] = n_segments;
    return j;
}

inline json contribution_to_json(const ExpectedContribution& e) {
    json j = contribution_to_json(e.mean, e.n_segments);
    j["phi"] = e.phi;
    j["phi_se"] = e.phi_se;
    j["direct_delta_se"] = e.direct_delta_se;
    j["sigma_source"] = e.mean.sigma_source;
    return j;
}

inline json optional_bool(const std::optional<bool>& b) { return b ? json(*b) : json(nullptr); }

inline json verdict_to_json(const Verdict& v) {
    json j;
    j["cause"] = v.cause;
    j["effect"] = v.effect;
    j["c1"] = v.c1;
    j["c2"] = json{{"pass", v.c2.pass}, {"trace", v.c2.trace}, {"gamma_t1", v.c2.gamma_t1},
                   {"gamma_t2", v.c2.gamma_t2}, {"delta", v.c2.delta}};
    j["c3"] = json{{"pass", v.c3.pass}, {"ruling_sum", v.c3.ruling_sum}, {"neg_nonruling_sum", v.c3.neg_nonruling_sum}};
    j["is_cause"] = v.is_cause;
    j["sufficient"] = optional_bool(v.sufficient);
    j["necessary"] = optional_bool(v.necessary);
    j["dominant"] = v.dominant;
    j["inconclusive"] = v.inconclusive;
    j["matched"] = v.matched;
    j["notes"] = v.notes;
    return j;
}

} // namespace gritlab::io
