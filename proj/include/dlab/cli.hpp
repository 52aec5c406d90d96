#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dlab::cli {

using json = nlohmann::json;

std::string toolkit_version();

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"profiles", "eig-scaling", "model-problem", "kernel",
                                                 "moments",  "mc",          "quasimode",     "report"};
  return kinds;
}

/// Validated run description. `params` has been checked against the schema
/// of `kind` and has every default filled in.
struct RunConfig {
  std::string kind;
  json params;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Command-line values that take precedence over the file.
struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

/// Parses and validates a config document. Throws ConfigError naming the
/// offending field.
RunConfig parse_config(const json& doc, const Overrides& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

/// Thread count from DISSIPATION_LAB_THREADS, if set and valid.
std::optional<int> threads_from_env();

/// FNV-1a of the canonical serialization.
std::string config_hash(const RunConfig& config);
json to_json(const RunConfig& config);

struct TaskRecord {
  std::string name;
  std::string status;  // "ok" or "failed"
  int exit_code = 0;
  std::string error;
  std::vector<std::string> artifacts;
};

struct RunResult {
  int exit_code = 0;
  std::vector<TaskRecord> tasks;
  json summary;
};

/// Executes a validated config, writes artifacts and manifest.json into
/// config.out and returns the process exit code.
RunResult run(const RunConfig& config, bool verbose = false);

/// Merges every manifest under `dir` into summary.json and plot-data CSVs
/// in `out`. Throws ConfigError when there is nothing to merge or the
/// manifests come from different toolkit versions.
json report(const std::filesystem::path& dir, const std::filesystem::path& out);

/// Whole command line: returns the exit code.
int main(int argc, char** argv);

}  // namespace dlab::cli
