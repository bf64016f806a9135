#pragma once

#include "eitnet/config.hpp"
#include "eitnet/report.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace eitnet {

std::string software_version();

struct RunOptions {
    std::filesystem::path output_dir;
    std::optional<std::uint64_t> seed;  ///< replaces noise.seed
    int threads = 1;
};

struct RunOutcome {
    nlohmann::json manifest;
    int failures = 0;
};

/// Runs the configured study and writes CSV tables, rasters and manifest.json
/// into options.output_dir. Throws ConfigError if the config does not validate.
RunOutcome run_study(ExperimentConfig config, const RunOptions& options);

/// One line per study kind: name and what it writes.
std::vector<std::pair<std::string, std::string>> study_catalog();

}  // namespace eitnet
