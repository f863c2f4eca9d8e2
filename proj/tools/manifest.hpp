#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace deepmorph::cli {

namespace fs = std::filesystem;

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

/// Run record written next to a command's primary output as `<out>.manifest`.
/// Holds no timestamps or host data so that reruns are byte-identical.
struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;

    /// Lines: `command`, `param`, `input <sha256> <path>`, `output <sha256> <path>`.
    std::string render() const;
    void write(const fs::path& path) const;
};

}  // namespace deepmorph::cli
