#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"

#include "adlm/version.hpp"

namespace adlm {

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string sha256_file(const std::string& path) { return sha256_hex(read_file_bytes(path)); }

/// Record of one CLI run: the subcommand with its full configuration, the
/// seed, the code version, and digests of every input and output file. The
/// stored command replays the run; identical inputs reproduce the outputs
/// byte for byte.
struct RunManifest {
    std::string command;                       // subcommand name
    std::vector<std::string> arguments;        // argv after the program name, as given
    nlohmann::ordered_json config;             // resolved configuration
    std::uint64_t seed = 0;
    std::string code_version = ADLM_VERSION;
    std::vector<std::pair<std::string, std::string>> inputs;   // path, sha256
    std::vector<std::pair<std::string, std::string>> outputs;  // path, sha256

    void add_input(const std::string& path) { inputs.emplace_back(path, sha256_file(path)); }
    void add_output(const std::string& path) { outputs.emplace_back(path, sha256_file(path)); }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["arguments"] = arguments;
        j["config"] = config;
        j["seed"] = seed;
        j["code_version"] = code_version;
        auto files = [](const std::vector<std::pair<std::string, std::string>>& list) {
            auto arr = nlohmann::ordered_json::array();
            for (const auto& [path, digest] : list) arr.push_back({{"path", path}, {"sha256", digest}});
            return arr;
        };
        j["inputs"] = files(inputs);
        j["outputs"] = files(outputs);
        return j;
    }

    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        m.command = j.at("command").get<std::string>();
        m.arguments = j.at("arguments").get<std::vector<std::string>>();
        m.config = j.at("config");
        m.seed = j.at("seed").get<std::uint64_t>();
        m.code_version = j.at("code_version").get<std::string>();
        for (const auto& f : j.at("inputs"))
            m.inputs.emplace_back(f.at("path").get<std::string>(), f.at("sha256").get<std::string>());
        for (const auto& f : j.at("outputs"))
            m.outputs.emplace_back(f.at("path").get<std::string>(), f.at("sha256").get<std::string>());
        return m;
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write manifest: " + path);
        out << to_json().dump(2) << "\n";
    }

    static RunManifest load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read manifest: " + path);
        return from_json(nlohmann::json::parse(in));
    }

    /// Checks that every recorded file still hashes to its stored digest.
    std::vector<std::string> verify_digests() const {
        std::vector<std::string> mismatches;
        for (const auto& [path, digest] : inputs)
            if (sha256_file(path) != digest) mismatches.push_back(path);
        for (const auto& [path, digest] : outputs)
            if (sha256_file(path) != digest) mismatches.push_back(path);
        return mismatches;
    }
};

}  // namespace adlm
