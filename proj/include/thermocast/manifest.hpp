#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thermocast {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

struct ManifestEntry {
    std::string name;
    std::string sha256;
};

/// Provenance of one command's outputs. Holds no timestamps or absolute
/// paths, so identical runs write identical manifests.
struct Manifest {
    std::string command;
    std::string tool_version;
    std::string config_sha256;
    std::optional<std::uint64_t> seed;
    std::vector<ManifestEntry> inputs;
    std::vector<ManifestEntry> outputs;
};

/// Entries are named by file name; outputs are hashed relative to `out_dir`.
Manifest make_manifest(std::string command, std::string_view config_text,
                       const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out_dir,
                       const std::vector<std::filesystem::path>& outputs, std::optional<std::uint64_t> seed);

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

}  // namespace thermocast
