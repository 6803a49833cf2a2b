#pragma once

#include <string>
#include <vector>

#include "epduct/boundary_data.hpp"
#include "epduct/nonlinear.hpp"

namespace epduct {

/// One run's full configuration. Parsed from a line-oriented
/// `section.key = value` file; every key can also be set programmatically.
struct RunConfig {
    // gas
    double gamma = 1.0;
    double j0 = 0.1;

    // background flow
    double b0 = 0.05;
    double u0 = 2.0;
    double e0 = 0.0;
    double delta = -1.0;        // < 0: 0.05 * u_s
    double bg_length = 2.0;
    double bg_step = 1e-3;

    // duct grid
    double length = 0.5;        // L; must not exceed the detected L1
    int n1 = 201, n2 = 33, n3 = 33;

    // solver
    int m_max = 8;
    int max_iter = 30;
    double epsilon = 1e-2;
    double sigma_bar = 1e-3;
    double contraction_tol = 1e-12;
    double residual_tol = 1e-6;
    double under_relax = 1.0;
    double r_factor = 2.0;
    int threads = 0;            // 0: EPDUCT_THREADS or hardware count

    // energy weight
    double weight_w0 = 1.0;
    double weight_margin = 0.1;

    // data
    std::string data_source = "synthetic";  // synthetic | files
    std::string data_manifest;
    std::vector<SyntheticMode> modes;
    double sigma_target = -1.0;  // > 0: rescale the synthetic modes to this sigma

    // sweeps and verification
    std::vector<double> sigma_factors = {1e-2, 1e-3, 1e-4};
    std::vector<int> verify_n1 = {51, 101, 201};
    int weight_sweep_points = 16;
    bool inject_corruption = false;

    // output
    std::string out_dir = "out";
    bool write_fields = true;

    GasLaw gas() const { return GasLaw(gamma, j0); }
    BackgroundParams background_params() const;
    DuctGrid duct_grid() const { return DuctGrid(n1, n2, n3, length); }
    IterationConfig iteration_config() const;
};

RunConfig parse_config_file(const std::string& path);

/// Apply one `key = value` assignment (the file parser and the CLI
/// overrides share this).
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

}  // namespace epduct
