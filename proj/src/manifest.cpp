#include "memoforge/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "memoforge/errors.hpp"
#include "memoforge/sha256.hpp"

namespace memoforge {

using ordered = nlohmann::ordered_json;
using nlohmann::json;

std::string manifest_to_json(const RunManifest& m) {
    ordered j;
    j["schema"] = "memoforge.manifest.v1";
    j["command"] = m.command;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["seed"] = m.seed;
    j["precision_bits"] = m.precision_bits;
    j["budget"] = m.budget;
    j["tool_version"] = m.tool_version;
    j["wall_ms"] = m.wall_ms;
    return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw make_error("Schema", std::string("bad manifest JSON: ") + e.what());
    }
    if (!j.contains("schema") || j["schema"] != "memoforge.manifest.v1")
        throw make_error("Schema", "unsupported manifest schema");
    RunManifest m;
    m.command = j.at("command").get<std::vector<std::string>>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.seed = j.value("seed", std::uint64_t{0});
    m.precision_bits = j.value("precision_bits", 256L);
    m.budget = j.value("budget", std::uint64_t{0});
    m.tool_version = j.value("tool_version", "");
    m.wall_ms = j.value("wall_ms", 0L);
    return m;
}

void save_manifest(const RunManifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw make_error("Io", "cannot write " + path);
    out << manifest_to_json(m);
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw make_error("Io", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return manifest_from_json(ss.str());
}

void verify_manifest(const RunManifest& m) {
    for (const auto& [path, want] : m.inputs)
        if (sha256_file(path) != want) throw make_error("HashMismatch", "input " + path);
    for (const auto& [path, want] : m.outputs)
        if (sha256_file(path) != want) throw make_error("HashMismatch", "output " + path);
}

} // namespace memoforge
