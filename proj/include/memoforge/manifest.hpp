#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace memoforge {

// Every artifact-producing command writes one of these next to its output;
// hashes recomputed on load must match.
struct RunManifest {
    std::vector<std::string> command;
    std::map<std::string, std::string> inputs;  // path -> sha256
    std::map<std::string, std::string> outputs; // path -> sha256
    std::uint64_t seed = 0;
    long precision_bits = 256;
    std::uint64_t budget = 0;
    std::string tool_version;
    long wall_ms = 0;
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);

void save_manifest(const RunManifest& m, const std::string& path);
RunManifest load_manifest(const std::string& path);

// Recomputes the hash of every recorded input and output file; throws
// HashMismatch when any differs.
void verify_manifest(const RunManifest& m);

} // namespace memoforge
