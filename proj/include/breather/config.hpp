#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "breather/field.hpp"
#include "breather/grid.hpp"
#include "breather/ucp.hpp"

namespace breather {

enum class ExperimentKind { spectrum, ucp, lifting, ssf, wegner, ids };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> experiment_kind_from_string(std::string_view name);

struct ModelConfig {
  int dim = 1;
  /// Empty means no potential (free operator).
  std::optional<SingleSiteShape> shape = SingleSiteShape::ball;
  MeasureSpec measure{0.1, 0.4};

  bool operator==(const ModelConfig&) const = default;
};

struct GridConfig {
  std::vector<int> box_sides{3};
  int mesh_per_unit = 16;

  bool operator==(const GridConfig&) const = default;
};

struct ExperimentSection {
  std::optional<ExperimentKind> kind;
  std::vector<double> energies;  // E or E_list
  std::vector<double> epsilons;  // eps or eps_list
  std::optional<double> b;
  std::vector<double> deltas;
  std::size_t n_samples = 1;
  std::optional<double> kappa;
  std::optional<double> M;

  std::optional<UcpConstants> constants() const;
  bool operator==(const ExperimentSection&) const = default;
};

struct RunConfig {
  std::uint64_t master_seed = 0;
  /// Unset means "not configured": the CLI then consults BREATHER_LAB_THREADS.
  std::optional<std::size_t> threads;
  std::string out_dir = "out";

  std::size_t worker_count() const { return threads.value_or(1); }

  bool operator==(const RunConfig&) const = default;
};

struct ExperimentConfig {
  ModelConfig model;
  GridConfig grid;
  MagneticSpec magnetic;
  ExperimentSection experiment;
  RunConfig run;

  ExperimentKind kind() const;
  /// Re-runs every parse-time check (after command-line overrides).
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses TOML text. Unknown keys, wrong types and invalid values raise
/// ConfigError messages of the form "source:line:col: key: problem".
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<inline>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical TOML; parse_config(to_toml(c)) == c.
std::string to_toml(const ExperimentConfig& config);
/// Canonical form without run.threads and run.out_dir, which do not affect results.
std::string canonical_result_config(const ExperimentConfig& config);

}  // namespace breather
