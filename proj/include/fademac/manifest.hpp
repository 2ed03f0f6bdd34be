#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fademac {

std::string sha256_hex(std::string_view data);

/// Throws std::runtime_error mentioning the path if the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

/// Current UTC wall time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_now();

struct OutputRecord
{
    std::string file; ///< relative to the output directory
    std::string sha256;

    bool operator==(const OutputRecord&) const = default;
};

/// Outcome of one claim an experiment asserts about its own results.
struct CheckRecord
{
    std::string name;
    bool passed = false;
    std::string detail;

    bool operator==(const CheckRecord&) const = default;
};

struct RunManifest
{
    std::string tool_version;
    std::string experiment;
    std::string config_text; ///< fully resolved configuration
    std::uint64_t seed = 0;
    int replications = 0;
    std::string started_utc;
    std::string finished_utc;
    std::vector<OutputRecord> outputs;
    std::vector<CheckRecord> checks;

    bool all_checks_passed() const;

    /// SHA-256 over the experiment name and every (file, digest) pair.
    std::string digest() const;

    std::string to_json_text() const;
    /// Throws std::runtime_error on malformed input or a digest mismatch.
    static RunManifest from_json_text(std::string_view text);

    void write(const std::filesystem::path& path) const;
    static RunManifest read(const std::filesystem::path& path);
};

} // namespace fademac
