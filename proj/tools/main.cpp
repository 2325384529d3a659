// fraclap command-line tool: solve, coeffs, reproduce, validate-mesh.

#include "config.hpp"

#include "fraclap/driver.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/io.hpp"
#include "fraclap/mesh.hpp"
#include "fraclap/rational.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

using namespace fraclap;
namespace fs = std::filesystem;

namespace {

constexpr int exit_config = 2;
constexpr int exit_solver = 3;

void print_error(const std::string& kind, const std::string& message)
{
    nlohmann::json line{{"error", kind}, {"message", message}};
    std::cerr << line.dump() << std::endl;
}

std::ofstream open_output(const fs::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw cli::ConfigError("cannot write " + path.string());
    return out;
}

std::string step_directory(int step)
{
    char name[32];
    std::snprintf(name, sizeof name, "step_%03d", step);
    return name;
}

// slope over the last five levels for uniform runs, over the last decade of dofs for adaptive ones
std::optional<double> summary_slope(const RunRecord& record)
{
    try {
        if (record.refinement == Refinement::uniform)
            return fit_rate(record, 5, RateSeries::estimator);
        return fit_rate_last_decade(record, RateSeries::estimator);
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

int run_solve(const cli::RunConfig& config)
{
    cli::check(config);
    const Problem problem = make_problem(config.problem);
    AdaptiveOptions options = cli::adaptive_options(config);

    const fs::path root(config.out);
    fs::create_directories(root);
    options.on_step = [&](const StepRecord& step, const Mesh& mesh, const FractionalSolution& sol) {
        const fs::path dir = root / step_directory(step.step);
        fs::create_directories(dir);
        auto json = open_output(dir / "mesh.json");
        io::write_mesh_json(json, mesh, sol.u);
        auto vtk = open_output(dir / "mesh.vtk");
        io::write_vtk(vtk, mesh, sol.u, sol.error.local);
        auto eta = open_output(dir / "eta.csv");
        io::write_eta_csv(eta, sol.error.local);
        std::printf("step %d dofs %zu eta %.6e\n", step.step, step.dofs, step.eta);
        std::fflush(stdout);
    };

    const RunRecord record = adaptive_loop(problem, options);
    auto csv = open_output(root / "history.csv");
    io::write_history_csv(csv, record);
    auto json = open_output(root / "history.json");
    io::write_history_json(json, record);

    const StepRecord& last = record.steps.back();
    const std::optional<double> slope = summary_slope(record);
    std::printf("final: status %s steps %zu dofs %zu eta %.6e slope %s\n", record.status.c_str(),
                record.steps.size(), last.dofs, last.eta,
                slope ? std::to_string(*slope).c_str() : "n/a");
    return 0;
}

struct CoeffsConfig {
    double s = 0.5;
    std::optional<double> kappa;
    double tol_rational = 1e-8;
    double lambda0 = 1.0;
    std::string out = "-";
};

int run_coeffs(const CoeffsConfig& config)
{
    if (!(config.s > 0.0 && config.s < 1.0))
        throw cli::ConfigError("--s must lie in (0, 1)");
    if (config.kappa && !(*config.kappa > 0.0))
        throw cli::ConfigError("--kappa must be positive");
    if (!(config.tol_rational > 0.0) || !(config.lambda0 > 0.0))
        throw cli::ConfigError("--tol-rational and --lambda0 must be positive");
    double kappa = 0.0;
    try {
        kappa = config.kappa ? *config.kappa : choose_kappa(config.s, config.lambda0, 1.0, config.tol_rational);
    } catch (const DomainError& e) {
        throw cli::ConfigError(e.what());
    }
    const RationalScheme scheme = build_scheme(config.s, kappa, config.lambda0);
    if (config.out == "-") {
        io::write_coefficients_csv(std::cout, scheme);
    } else {
        auto out = open_output(config.out);
        io::write_coefficients_csv(out, scheme);
    }
    std::fprintf(stderr, "s %g kappa %.6g M %d N %d terms %zu bound %.3e\n", config.s, kappa, scheme.m_neg,
                 scheme.n_pos, scheme.size(), epsilon_bound(config.s, kappa, config.lambda0));
    return 0;
}

struct ReproduceConfig {
    std::string table;
    int threads = 0;
    int sines_levels = 7;
    int checker_levels = 6;
    std::size_t adaptive_max_dofs = 100000;
};

constexpr double table_kappa = 0.26;
const std::vector<double> powers{0.1, 0.3, 0.5, 0.7, 0.9};

RunRecord uniform_run(const std::string& name, double s, int levels, int threads)
{
    AdaptiveOptions o;
    o.s = s;
    o.kappa = table_kappa;
    o.refinement = Refinement::uniform;
    o.max_steps = levels;
    o.max_dofs = static_cast<std::size_t>(-1);
    o.solve.threads = threads;
    std::fprintf(stderr, "%s s=%g uniform, %d levels\n", name.c_str(), s, levels);
    return adaptive_loop(make_problem(name), o);
}

void row(double s, double reference, double computed, double tolerance)
{
    const bool ok = std::abs(computed - reference) <= tolerance;
    std::printf("%-6.1f %10.2f %10.3f %8.2f  %s\n", s, reference, computed, tolerance, ok ? "ok" : "MISMATCH");
}

void header(const std::string& title)
{
    std::printf("%s\n%-6s %10s %10s %8s  %s\n", title.c_str(), "s", "reference", "computed", "tol", "verdict");
}

int run_reproduce(const ReproduceConfig& config)
{
    const std::string& t = config.table;
    if (t == "param-counts") {
        const std::vector<int> reference{408, 176, 149, 176, 408};
        header("parametric problems at kappa = 0.26");
        for (std::size_t i = 0; i < powers.size(); ++i)
            row(powers[i], reference[i], static_cast<double>(build_scheme(powers[i], table_kappa, 1.0).size()), 0.0);
        return 0;
    }
    if (t == "sines2d-slopes" || t == "sines2d-efficiency") {
        const bool slopes = t == "sines2d-slopes";
        const std::vector<double> reference_est{-0.92, -0.97, -0.99, -1.00, -1.00};
        const std::vector<double> reference_exact{-1.00, -1.00, -1.00, -1.00, -0.94};
        const std::vector<double> reference_eff{0.86, 1.16, 1.08, 0.96, 0.78};
        std::vector<RunRecord> runs;
        for (double s : powers)
            runs.push_back(uniform_run("sines2d", s, config.sines_levels, config.threads));
        if (slopes) {
            header("sines2d estimator slope, last 5 uniform levels");
            for (std::size_t i = 0; i < powers.size(); ++i)
                row(powers[i], reference_est[i], fit_rate(runs[i], 5, RateSeries::estimator), 0.1);
            header("sines2d exact error slope, last 5 uniform levels");
            for (std::size_t i = 0; i < powers.size(); ++i)
                row(powers[i], reference_exact[i], fit_rate(runs[i], 5, RateSeries::exact), 0.1);
        } else {
            header("sines2d efficiency index, mean over last 5 uniform levels");
            for (std::size_t i = 0; i < powers.size(); ++i)
                row(powers[i], reference_eff[i], mean_efficiency(runs[i], 5), 0.25);
        }
        return 0;
    }
    if (t == "checkerboard2d-slopes") {
        const std::vector<double> reference_unif{-0.35, -0.55, -0.76, -0.95, -1.00};
        const std::vector<double> reference_adapt{-0.65, -0.84, -0.93, -0.97, -1.01};
        std::vector<double> uniform;
        for (double s : powers)
            uniform.push_back(fit_rate(uniform_run("checkerboard2d", s, config.checker_levels, config.threads), 5,
                                       RateSeries::estimator));
        header("checkerboard2d estimator slope, last 5 uniform levels");
        for (std::size_t i = 0; i < powers.size(); ++i)
            row(powers[i], reference_unif[i], uniform[i], 0.1);
        header("checkerboard2d estimator slope, theory -min(1, s + 1/4)");
        for (std::size_t i = 0; i < powers.size(); ++i)
            row(powers[i], -std::min(1.0, powers[i] + 0.25), uniform[i], 0.1);
        if (config.adaptive_max_dofs > 0) {
            std::vector<double> adaptive;
            for (double s : powers) {
                AdaptiveOptions o;
                o.s = s;
                o.kappa = table_kappa;
                o.refinement = Refinement::adaptive;
                o.theta = 0.5;
                o.max_dofs = config.adaptive_max_dofs;
                o.solve.threads = config.threads;
                std::fprintf(stderr, "checkerboard2d s=%g adaptive, %zu dofs\n", s, config.adaptive_max_dofs);
                adaptive.push_back(
                    fit_rate_last_decade(adaptive_loop(checkerboard2d(), o), RateSeries::estimator));
            }
            header("checkerboard2d estimator slope, adaptive (theta 0.5), last decade of dofs");
            for (std::size_t i = 0; i < powers.size(); ++i)
                row(powers[i], reference_adapt[i], adaptive[i], 0.1);
        }
        return 0;
    }
    throw cli::ConfigError("unknown table '" + t
                           + "' (expected param-counts, sines2d-slopes, sines2d-efficiency, checkerboard2d-slopes)");
}

int run_validate_mesh(const std::string& path, std::optional<double> side)
{
    std::ifstream in(path);
    if (!in)
        throw cli::ConfigError("cannot read " + path);
    Mesh mesh = [&] {
        try {
            return io::read_mesh_json(in);
        } catch (const std::exception& e) {
            throw cli::ConfigError(path + ": " + e.what());
        }
    }();
    std::optional<Box> box;
    if (side)
        box = Box{{0.0, 0.0}, {*side, *side}};
    const ValidationReport report = validate(mesh, box);
    nlohmann::json summary{{"ok", report.ok},
                           {"vertices", mesh.num_vertices()},
                           {"cells", mesh.num_cells()},
                           {"problems", report.problems}};
    std::cout << summary.dump() << std::endl;
    if (!report.ok)
        throw cli::ConfigError("invalid mesh: " + report.problems.front());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive finite elements for the spectral fractional Laplacian"};
    app.require_subcommand(1);

    cli::RunConfig solve_config;
    CLI::App* solve = app.add_subcommand("solve", "run the solve-estimate-mark-refine loop");
    cli::add_solve_flags(*solve, solve_config);

    CoeffsConfig coeffs_config;
    CLI::App* coeffs = app.add_subcommand("coeffs", "print the rational scheme as l,weight,diffusion");
    coeffs->add_option("--s", coeffs_config.s, "fractional power")->capture_default_str();
    coeffs->add_option("--kappa", coeffs_config.kappa, "quadrature step; chosen from --tol-rational when omitted");
    coeffs->add_option("--tol-rational", coeffs_config.tol_rational)->capture_default_str();
    coeffs->add_option("--lambda0", coeffs_config.lambda0, "lower bound of the spectrum")->capture_default_str();
    coeffs->add_option("--out", coeffs_config.out, "CSV file, - for stdout")->capture_default_str();

    ReproduceConfig reproduce_config;
    CLI::App* reproduce = app.add_subcommand("reproduce", "compare computed tables with published values");
    reproduce->add_option("table", reproduce_config.table,
                          "param-counts, sines2d-slopes, sines2d-efficiency or checkerboard2d-slopes")
        ->required();
    reproduce->add_option("--threads", reproduce_config.threads)->capture_default_str();
    reproduce->add_option("--sines-levels", reproduce_config.sines_levels)->capture_default_str();
    reproduce->add_option("--checker-levels", reproduce_config.checker_levels)->capture_default_str();
    reproduce->add_option("--adaptive-max-dofs", reproduce_config.adaptive_max_dofs, "0 skips the adaptive runs")
        ->capture_default_str();

    std::string mesh_path;
    std::optional<double> mesh_side;
    CLI::App* check_mesh = app.add_subcommand("validate-mesh", "check a mesh JSON file");
    check_mesh->add_option("mesh", mesh_path, "mesh.json")->required();
    check_mesh->add_option("--side", mesh_side, "require the boundary to be the square (0, side)^2");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("config", e.what());
        return exit_config;
    } catch (const DomainError& e) {
        print_error("config", e.what());
        return exit_config;
    }

    try {
        if (solve->parsed())
            return run_solve(solve_config);
        if (coeffs->parsed())
            return run_coeffs(coeffs_config);
        if (reproduce->parsed()) {
            if (reproduce_config.sines_levels < 5 || reproduce_config.checker_levels < 5)
                throw cli::ConfigError("slope fits need at least 5 levels");
            return run_reproduce(reproduce_config);
        }
        if (check_mesh->parsed())
            return run_validate_mesh(mesh_path, mesh_side);
    } catch (const cli::ConfigError& e) {
        print_error("config", e.what());
        return exit_config;
    } catch (const SolverError& e) {
        print_error("solver", e.what());
        return exit_solver;
    } catch (const DomainError& e) {
        print_error("config", e.what());
        return exit_config;
    } catch (const std::exception& e) {
        print_error("solver", e.what());
        return exit_solver;
    }
    return 0;
}
