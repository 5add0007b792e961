#ifndef RCISPRT_CONFIG_HPP
#define RCISPRT_CONFIG_HPP

#include <filesystem>
#include <json.hpp>

#include "rcisprt/montecarlo.hpp"

namespace rcisprt {

/// Builds an experiment from the JSON schema documented in docs/config.md.
/// Errors are ConfigError with the offending JSON path, e.g.
/// "$.detection.budgets[1].alpha: must lie in (0, 1)".
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Reads and parses a config file; a missing or malformed file is a
/// ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

/// The budget grid alpha = beta in {1e-3, 1e-2, 1e-1}.
std::vector<ErrorBudget> default_budget_grid();

}  // namespace rcisprt

#endif  // RCISPRT_CONFIG_HPP
