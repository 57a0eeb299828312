#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loopmorse/morse.hpp"
#include "loopmorse/systems.hpp"

namespace loopmorse {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FredholmSuiteConfig {
    bool enabled = false;
    int K = 8;
    double S0 = 8.0;
    double h = 1.0 / 16;
    bool dump_matrices = false;
};

struct RunConfig {
    // either a catalog name or a custom system built from coefficient tables
    std::string system; // catalog key or "custom"
    std::string manifold_kind = "flat_torus";
    int dim = 1;
    std::string lagrangian_json; // raw coefficient tables for custom systems

    std::string boundary = "periodic";
    std::vector<double> q0, q1;
    std::vector<std::vector<int>> classes;

    double action_bound = 10.0;
    int Nt = 64;
    int seed_count = 48;
    std::uint64_t seed = 0;
    int threads = 0; // 0 = library default

    // flow parameters
    double flow_r0 = 1e-3;
    double flow_precond_scale = 1.0;
    int flow_sphere_samples = 64;
    int flow_bisect_depth = 40;
    long flow_max_steps = 400000;

    FredholmSuiteConfig fredholm;

    std::string out_dir = "out";
    bool fail_on_quarantine = true;
};

// Parse and validate; error messages carry the JSON path of the offending
// field and, on syntax errors, the byte offset from the parser.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Materialize the Lagrangian system the config describes.
std::shared_ptr<const LagrangianSystem> build_system(const RunConfig& cfg);

} // namespace loopmorse
