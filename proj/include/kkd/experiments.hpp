#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "kkd/states.hpp"

namespace kkd {

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;  // base for relative output paths
};

struct RunResult {
  nlohmann::ordered_json summary;  // one-line JSON summary (also printed by the CLI)
};

/// Validate and run one experiment config. Throws ConfigError on schema
/// problems (message names the offending field) and PreconditionError when a
/// module precondition fails at runtime. All outputs are written atomically.
RunResult run_experiment(const nlohmann::json& config, const std::string& config_hash,
                         const RunOverrides& overrides = {});

RunResult run_experiment_file(const std::filesystem::path& config_path,
                              const RunOverrides& overrides = {});

/// Config schema and method notes for one experiment; throws ConfigError for
/// unknown names.
std::string describe_experiment(const std::string& name);

std::vector<std::string> experiment_names();

/// Monomode state definition from JSON: {"type":"fock","kind":
/// "phase_eigenstate"|"cat"|"coeffs", ...parameters}.
FockVector parse_fock_json(const nlohmann::json& spec);

}  // namespace kkd
