#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "breather/config.hpp"

namespace breather {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalFailure = 3;

std::string_view software_version();

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

struct RunSummary {
  std::filesystem::path out_dir;
  std::vector<std::string> files;  // relative to out_dir, manifest.json last
};

/// Runs the configured experiment, writes its CSV/JSON artifacts into
/// run.out_dir and finishes with manifest.json. Worker threads only compute;
/// every file is written from the calling thread. On failure a PARTIAL marker
/// describing the error is left in out_dir and the exception propagates.
RunSummary run_experiment(const ExperimentConfig& config);

/// run_experiment with errors mapped to exit codes: ConfigError gives 2,
/// every other failure 3. Diagnostics go to `log`.
int run_experiment_status(const ExperimentConfig& config, std::ostream& log);

}  // namespace breather
