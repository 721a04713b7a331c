#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lkstopo/config.hpp"
#include "lkstopo/optimizer.hpp"

namespace lkstopo {

/// Thread count from the flag, else LKSTOPO_THREADS, else the runtime
/// default. Returns the count in effect (1 without OpenMP).
int configure_threads(std::optional<int> requested);

/// One CSV row of the optimization history; all fields are deterministic.
std::vector<std::string> history_row(const StepRecord& record);
std::vector<std::string> history_header();

/// Runs `optimize` into `run_dir`: config.yaml (resolved copy), history.csv,
/// timing.csv, gamma_checkpoint.vtk (latest step), gamma_<step>.vtk at the
/// design stride, gamma_final.vtk and summary.txt.
OptimizationResult optimize_to_directory(const CaseConfig& config,
                                         const std::filesystem::path& run_dir,
                                         std::ostream* log = nullptr);

/// Runs `simulate`: warm-up periods plus one measured period with the given
/// physical design; writes config.yaml, flow VTK at the flow stride,
/// flow_final.vtk and summary.txt. Returns the measured objective.
double simulate_to_directory(const CaseConfig& config, std::span<const double> physical,
                             const std::filesystem::path& run_dir,
                             std::ostream* log = nullptr);

/// Command-line entry point. Exit codes: 0 success or pass, 1 verification
/// failure or runtime error, 2 usage or configuration error.
int cli_main(int argc, char** argv);

}  // namespace lkstopo
