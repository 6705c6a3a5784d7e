#pragma once

#include "sheat/io.hpp"

namespace sheat {

struct RunOptions {
  int workers = 1;
  fs::path cache_dir = ".sheat-cache";
  bool write_artifacts = true;
};

enum ExitCode { exit_ok = 0, exit_config = 2, exit_gate = 3, exit_inconclusive = 4 };

struct ExperimentResult {
  nlohmann::ordered_json summary;
  std::vector<std::pair<std::string, bool>> gates;
  bool inconclusive = false;
  std::vector<fs::path> artifacts;

  bool gates_pass() const;
  int exit_code() const;
};

/// Runs the manifest's experiment, writing CSV/JSON under output_dir.
ExperimentResult run_experiment(const RunManifest& manifest, const RunOptions& options = {});

/// Builds (or loads) the cache and checks quadrature convergence;
/// throws if a refined rule moves C_inf by more than tolerance.
PsiCache cache_build(const RunManifest& manifest, const fs::path& cache_dir, double tolerance = 1e-7);

}  // namespace sheat
