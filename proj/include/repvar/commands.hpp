#pragma once

#include "repvar/dof.hpp"
#include "repvar/io.hpp"
#include "repvar/replication.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

namespace repvar::cli {

struct EstimateOptions {
    SchemeSpec scheme = SchemeSpec::brr();
    double level = 0.95;
    IntervalOptions interval;
};

/// parse -> contrasts -> replicate table -> estimates -> variance -> dof -> interval.
io::VarianceReport cmd_estimate(const StratifiedSample& sample, const EstimateOptions& options);

/// Replicate weight CSV for @p sample.
std::string cmd_replicates(const StratifiedSample& sample, const SchemeSpec& scheme);

/// Verified Hadamard matrix as CSV; throws UnconstructibleOrder.
std::string cmd_hadamard(std::size_t order);

/// Runs the simulation and returns the report JSON text (without wall time).
std::string cmd_simulate(const sim::SimulationConfig& config, sim::SimulationReport* report_out = nullptr);

/// Resolves a relative output path against $REPVAR_OUTPUT_DIR when set.
std::filesystem::path resolve_output_path(const std::filesystem::path& path);

inline constexpr const char* kOutputDirEnv = "REPVAR_OUTPUT_DIR";

} // namespace repvar::cli
