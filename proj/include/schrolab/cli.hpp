#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "schrolab/generator.hpp"
#include "schrolab/grid.hpp"
#include "schrolab/schroedinger.hpp"

namespace schrolab::cli {

inline constexpr const char* kSchema = "schrolab.config/1";

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitSolver = 3,
    kExitAssertion = 4,
};

/// How a marginal moves with t in the derivative harness.
struct CurveConfig {
    std::string kind = "heat_flow";  ///< heat_flow | translation | dilation | fixed
    double speed = 0.0;              ///< translation
    double rate = 0.0;               ///< dilation
};

struct HarnessConfig {
    std::string name;
    int samples = 65;
    // interpolate
    bool dump_measures = false;
    // derivative
    CurveConfig curve_mu;
    CurveConfig curve_nu;
    double t = 0.25;
    double h_fd = 1e-3;
    bool richardson = false;
    double tol_static = 1e-2;
    double tol_dynamic = 2e-2;
    // continuity
    std::vector<double> radii;
    double monotone_slack = 1e-4;
    double final_gap = 1e-3;
    // contraction
    std::vector<double> times;
    double relative_slack = 0.01;
    int correction_intervals = 64;
    // talagrand
    std::string branch;
    std::vector<double> horizons;
};

struct ExperimentConfig {
    std::string generator_kind;  ///< laplacian | ornstein_uhlenbeck
    int dimension = 1;
    int grid_points = 513;
    double half_width = 8.0;
    MeasureSpec mu;
    MeasureSpec nu;
    double horizon = 1.0;
    SolverOptions solver;
    HarnessConfig harness;
    std::filesystem::path output_dir;

    Generator generator() const;
    Grid grid() const;
};

/// Parses and validates a configuration document. Unknown keys, missing
/// required keys, wrong types and a wrong `schema` tag raise ConfigError.
/// Relative tabulated-density paths are resolved against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Runs one subcommand; `out` overrides the configured output directory.
/// Returns an ExitCode; errors are reported on stderr.
int run_command(const std::string& command, const ExperimentConfig& config,
                const std::optional<std::filesystem::path>& out = std::nullopt);

/// Full command-line entry point.
int main(int argc, char** argv);

}  // namespace schrolab::cli
