#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fcir/config.hpp"

namespace fcir {

struct OutputDigest {
    std::string file;    // name relative to the output directory
    std::string sha256;  // lowercase hex
};

struct RunManifest {
    std::string version;
    std::string resolved_config;  // JSON text
    double wall_clock_seconds = 0.0;
    unsigned workers = 0;
    std::vector<OutputDigest> outputs;
    std::filesystem::path manifest_path;
};

std::string sha256_file(const std::filesystem::path& path);

std::string artifact_version();

/// Resolved config (defaults applied) as pretty-printed JSON.
std::string config_to_json(const ExperimentConfig& config);

/// Dispatches the command, writes its CSV outputs and `<output>.manifest.json`
/// into out_dir. On failure every file this run created is removed before the
/// exception propagates.
RunManifest run(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                unsigned workers = 0);

struct ManifestCheck {
    bool ok = true;
    std::vector<std::string> problems;
};

/// Re-reads every output listed in a manifest and compares digests.
ManifestCheck verify_manifest(const std::filesystem::path& manifest_path);

}  // namespace fcir
