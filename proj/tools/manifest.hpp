#pragma once

#include "gritlab/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gritlab::cli {

namespace fs = std::filesystem;
using json = io::json;

inline std::string sha256_hex(const std::string& data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

inline std::string sha256_file(const fs::path& p) { return sha256_hex(io::read_file(p)); }

/// Provenance of one CLI run: the canonical command line, hashed inputs and outputs.
struct RunManifest {
    std::string command;
    std::vector<std::string> args;  ///< canonical arguments, without --out
    std::vector<std::pair<std::string, std::string>> inputs;   ///< absolute path, sha256
    std::vector<std::pair<std::string, std::string>> outputs;  ///< path relative to the output dir, sha256
    std::optional<std::uint64_t> seed;
    std::string version;

    void add_input(const fs::path& p) {
        const auto files = fs::is_directory(p) ? io::trajectory_files(p) : std::vector<fs::path>{p};
        for (const auto& f : files) inputs.emplace_back(fs::absolute(f).lexically_normal().string(), sha256_file(f));
    }

    json to_json() const {
        json j;
        j["command"] = command;
        j["args"] = args;
        json in = json::array();
        for (const auto& [p, h] : inputs) in.push_back(json{{"path", p}, {"sha256", h}});
        j["inputs"] = in;
        j["seed"] = seed ? json(*seed) : json(nullptr);
        j["versions"] = json{{"gritlab", version}};
        json out = json::array();
        for (const auto& [p, h] : outputs) out.push_back(json{{"path", p}, {"sha256", h}});
        j["outputs"] = out;
        return j;
    }

    static RunManifest from_json(const json& j) {
        RunManifest m;
        try {
            m.command = j.at("command").get<std::string>();
            m.args = j.at("args").get<std::vector<std::string>>();
            for (const auto& e : j.at("inputs")) m.inputs.emplace_back(e.at("path"), e.at("sha256"));
            for (const auto& e : j.at("outputs")) m.outputs.emplace_back(e.at("path"), e.at("sha256"));
            if (!j.at("seed").is_null()) m.seed = j.at("seed").get<std::uint64_t>();
            m.version = j.at("versions").at("gritlab").get<std::string>();
        } catch (const json::exception& e) {
            throw SchemaError(std::string("manifest: ") + e.what());
        }
        return m;
    }
};

} // namespace gritlab::cli
