#pragma once

#include "epduct/run_config.hpp"

namespace epduct {

namespace exit_code {
constexpr int ok = 0;
constexpr int generic = 1;
constexpr int config = 2;
constexpr int truncated = 3;        // sonic margin reached before the requested length
constexpr int infeasible = 4;       // no feasible energy weight for L
constexpr int non_contraction = 5;  // Picard failed to contract
constexpr int verify_failed = 6;
}  // namespace exit_code

struct TruncatedError : SolverError {
    using SolverError::SolverError;
};

/// Background, duct grid and frozen coefficients shared by the commands.
struct Workspace {
    RunConfig cfg;
    BackgroundSolution bg_full;  // fine march over the requested length
    BackgroundSolution bg;       // sampled exactly on the duct x1 nodes
    DuctGrid grid;
    BaseCoefficients base;       // on the duct nodes
    BaseCoefficients base_full;  // on the fine march (weight sweeps, L1*)
    OrbitClass orbit = OrbitClass::FiniteL1;
};

/// Runs the 1D background, validates L against the detected L1, and samples
/// everything on the duct grid. Throws TruncatedError when L > L1.
Workspace make_workspace(const RunConfig& cfg);

/// Boundary data per the config: synthetic modes (optionally rescaled to
/// data.sigma_target) or the four CSV files of a manifest.
BoundaryData build_data(const RunConfig& cfg, const Workspace& ws);

int cmd_background(const RunConfig& cfg);
int cmd_weight(const RunConfig& cfg, bool sweep = false);
int cmd_solve_linear(const RunConfig& cfg);
int cmd_solve(const RunConfig& cfg);
int cmd_verify(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);

/// Dispatch + exception-to-exit-code mapping shared by the CLI.
int run_command(const std::string& name, const RunConfig& cfg, bool weight_sweep = false);

}  // namespace epduct
