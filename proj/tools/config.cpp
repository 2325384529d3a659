#include "config.hpp"

#include "fraclap/errors.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>

namespace fraclap::cli {

namespace {

std::string exact(double value)
{
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

} // namespace

void add_solve_flags(CLI::App& app, RunConfig& config)
{
    app.add_option("--problem", config.problem, "sines2d, checkerboard2d or zero")->capture_default_str();
    app.add_option("--s", config.s, "fractional power in (0, 1)")->capture_default_str();
    app.add_option("--kappa", config.kappa, "quadrature step; chosen from --tol-rational when omitted");
    app.add_option("--tol-rational", config.tol_rational, "rational error target relative to ||f||")
        ->capture_default_str();
    app.add_option("--theta", config.theta, "Doerfler parameter in (0, 1]")->capture_default_str();
    app.add_option_function<std::string>(
           "--refinement", [&config](const std::string& text) { config.refinement = refinement_from_string(text); },
           "uniform or adaptive (default adaptive)")
        ->check(CLI::IsMember({"uniform", "adaptive"}));
    app.add_option("--max-dofs", config.max_dofs, "stop once the mesh has this many vertices")->capture_default_str();
    app.add_option("--levels", config.levels, "maximum number of solves");
    app.add_option("--n", config.n, "initial grid cells per side (0: problem default)")->capture_default_str();
    app.add_option("--tol", config.tol, "stop once the estimator is at most this")->capture_default_str();
    app.add_option("--threads", config.threads, "worker threads (0: all cores)")->capture_default_str();
    app.add_option("--cg-tol", config.cg_rel_tol, "relative residual target of each parametric solve")
        ->capture_default_str();
    app.add_option("--cg-max-iter", config.cg_max_iter, "iteration cap of each parametric solve")->capture_default_str();
    app.add_option("--out", config.out, "output directory")->capture_default_str();
}

std::vector<std::string> to_flags(const RunConfig& config)
{
    std::vector<std::string> flags{"--problem",      config.problem,
                                   "--s",            exact(config.s),
                                   "--tol-rational", exact(config.tol_rational),
                                   "--theta",        exact(config.theta),
                                   "--refinement",   to_string(config.refinement),
                                   "--max-dofs",     std::to_string(config.max_dofs),
                                   "--n",            std::to_string(config.n),
                                   "--tol",          exact(config.tol),
                                   "--threads",      std::to_string(config.threads),
                                   "--cg-tol",       exact(config.cg_rel_tol),
                                   "--cg-max-iter",  std::to_string(config.cg_max_iter),
                                   "--out",          config.out};
    if (config.kappa) {
        flags.push_back("--kappa");
        flags.push_back(exact(*config.kappa));
    }
    if (config.levels) {
        flags.push_back("--levels");
        flags.push_back(std::to_string(*config.levels));
    }
    return flags;
}

RunConfig parse_solve_flags(const std::vector<std::string>& args)
{
    RunConfig config;
    CLI::App app{"solve"};
    add_solve_flags(app, config);
    // CLI11 consumes the vector from the back
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    check(config);
    return config;
}

void check(const RunConfig& config)
{
    try {
        (void)make_problem(config.problem);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (!(config.s > 0.0 && config.s < 1.0))
        throw ConfigError("--s must lie in (0, 1)");
    if (config.kappa && !(*config.kappa > 0.0 && std::isfinite(*config.kappa)))
        throw ConfigError("--kappa must be positive");
    if (!(config.tol_rational > 0.0))
        throw ConfigError("--tol-rational must be positive");
    if (!(config.theta > 0.0 && config.theta <= 1.0))
        throw ConfigError("--theta must lie in (0, 1]");
    if (config.n < 0)
        throw ConfigError("--n must be nonnegative");
    if (config.levels && *config.levels < 1)
        throw ConfigError("--levels must be at least 1");
    if (!(config.tol >= 0.0))
        throw ConfigError("--tol must be nonnegative");
    if (config.threads < 0)
        throw ConfigError("--threads must be nonnegative");
    if (!(config.cg_rel_tol > 0.0 && config.cg_rel_tol < 1.0))
        throw ConfigError("--cg-tol must lie in (0, 1)");
    if (config.cg_max_iter < 1)
        throw ConfigError("--cg-max-iter must be at least 1");
    if (config.out.empty())
        throw ConfigError("--out must not be empty");
    const std::size_t n = config.n > 0 ? config.n : make_problem(config.problem).default_n;
    if (config.max_dofs < (n + 1) * (n + 1))
        throw ConfigError("--max-dofs is below the initial mesh size " + std::to_string((n + 1) * (n + 1)));
}

AdaptiveOptions adaptive_options(const RunConfig& config)
{
    AdaptiveOptions o;
    o.s = config.s;
    o.kappa = config.kappa;
    o.tol_rational = config.tol_rational;
    o.tol = config.tol;
    o.theta = config.theta;
    o.refinement = config.refinement;
    o.max_dofs = config.max_dofs;
    o.max_steps = config.levels.value_or(1000000);
    o.initial_n = config.n;
    o.solve.threads = config.threads;
    o.solve.cg_rel_tol = config.cg_rel_tol;
    o.solve.cg_max_iter = config.cg_max_iter;
    return o;
}

} // namespace fraclap::cli
