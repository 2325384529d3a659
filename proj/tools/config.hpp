#pragma once

#include "fraclap/driver.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace fraclap::cli {

/// Bad flags or out-of-range settings; the tool exits with status 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string problem = "sines2d";
    double s = 0.5;
    std::optional<double> kappa;
    double tol_rational = 1e-8;
    double theta = 0.5;
    Refinement refinement = Refinement::adaptive;
    std::size_t max_dofs = 200000;
    /// Number of solves; unlimited when empty.
    std::optional<int> levels;
    /// Initial grid resolution; 0 takes the problem default.
    int n = 0;
    /// Stop once the global estimator drops to this value.
    double tol = 0.0;
    int threads = 0;
    double cg_rel_tol = 1e-12;
    int cg_max_iter = 20000;
    std::string out = "fraclap-out";

    bool operator==(const RunConfig&) const = default;
};

/// Registers the solve flags on `app`, writing into `config`.
void add_solve_flags(CLI::App& app, RunConfig& config);

/// Flags that reproduce `config` when parsed.
std::vector<std::string> to_flags(const RunConfig& config);

/// Parses solve flags (without the subcommand name). Throws ConfigError.
RunConfig parse_solve_flags(const std::vector<std::string>& args);

/// Range checks; throws ConfigError.
void check(const RunConfig& config);

AdaptiveOptions adaptive_options(const RunConfig& config);

} // namespace fraclap::cli
