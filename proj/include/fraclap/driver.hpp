#pragma once

#include "fraclap/estimator.hpp"
#include "fraclap/fem.hpp"
#include "fraclap/mesh.hpp"
#include "fraclap/rational.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fraclap {

/// A fractional Laplace problem (-Laplace)^s u = f on (0, side)^2 with
/// homogeneous Dirichlet data.
struct Problem {
    std::string name;
    double side = 1.0;
    ScalarField f;
    /// Analytic fractional solution u(s; x, y), if known.
    std::function<double(double s, double x, double y)> exact_solution;
    /// When set, the solution of (u, v) + c (grad u, grad v) = (f, v) is known
    /// and separable: u_c(x, y) = parametric_amplitude(c) * mode(x, y).
    std::function<double(double c)> parametric_amplitude;
    ScalarField mode;
    /// Analytic L2 norm of f, if known.
    std::optional<double> f_norm;
    int default_n = 8;

    bool has_parametric_solution() const { return static_cast<bool>(parametric_amplitude); }
    double parametric_solution(double c, double x, double y) const { return parametric_amplitude(c) * mode(x, y); }
};

/// f = (2/pi) sin x sin y on (0, pi)^2.
Problem sines2d();
/// f = 1 where (x - 1/2)(y - 1/2) > 0, else 0, on (0, 1)^2.
Problem checkerboard2d();
/// f = 0 on (0, side)^2.
Problem zero_problem(double side = 1.0);
/// Looks up "sines2d", "checkerboard2d" or "zero"; throws DomainError otherwise.
Problem make_problem(const std::string& name);

/// Semi-discrete solution sum_l w_l u_l built from the analytic parametric
/// solutions; empty when the problem has none.
ScalarField semi_discrete_solution(const Problem& problem, const RationalScheme& scheme);

/// L2 norm of f: analytic when available, else degree-4 quadrature on `mesh`.
double data_norm(const Problem& problem, const Mesh& mesh);

struct SolveOptions {
    /// Worker threads for the sweep over l; 0 uses the hardware concurrency.
    int threads = 0;
    /// Number of consecutive indices l solved in sequence by one worker. Inside
    /// a block each solve starts from the Galerkin projection onto the previous
    /// two solutions. Results depend on this value, not on `threads`.
    int block_size = 32;
    double cg_rel_tol = 1e-12;
    int cg_max_iter = 20000;
    /// Called with (l, u_l) after each parametric solve, possibly from several
    /// threads at once.
    std::function<void(int, std::span<const double>)> on_parametric;
};

struct FractionalSolution {
    std::vector<double> u;
    ErrorField error;
    long cg_iterations = 0;
};

/// Solves every parametric problem of the scheme on the mesh, sums the
/// weighted solutions and local Bank-Weiser solutions. Block partial sums are
/// formed in ascending l and combined in ascending block order. Throws
/// SolverError naming the offending l when CG fails.
FractionalSolution fractional_solve(const Problem& problem, const RationalScheme& scheme, const Mesh& mesh,
                                    int degree = 1, const SolveOptions& options = {});

enum class Refinement { uniform, adaptive };

std::string to_string(Refinement mode);
Refinement refinement_from_string(const std::string& text);

struct StepRecord {
    int step = 0;
    std::size_t dofs = 0;
    std::size_t cells = 0;
    double eta = 0.0;
    std::optional<double> exact_error;
    std::optional<double> efficiency;
    double wall_seconds = 0.0;
};

struct RunRecord {
    std::string problem;
    double s = 0.0;
    double kappa = 0.0;
    double lambda0 = 1.0;
    int m_neg = 0;
    int n_pos = 0;
    double theta = 0.5;
    Refinement refinement = Refinement::uniform;
    std::string status;
    std::vector<StepRecord> steps;
};

struct AdaptiveOptions {
    double s = 0.5;
    /// Fixed kappa; when empty it is chosen from tol_rational.
    std::optional<double> kappa;
    /// Rational error target relative to ||f||.
    double tol_rational = 1e-8;
    double lambda0 = 1.0;
    /// Stop as soon as the global estimator is <= tol.
    double tol = 0.0;
    double theta = 0.5;
    Refinement refinement = Refinement::adaptive;
    std::size_t max_dofs = 200000;
    int max_steps = 1000;
    /// Initial mesh resolution; 0 uses the problem default.
    int initial_n = 0;
    int degree = 1;
    SolveOptions solve;
    /// Called after every step with the mesh and solution of that step.
    std::function<void(const StepRecord&, const Mesh&, const FractionalSolution&)> on_step;
};

/// Solve - estimate - mark - refine until the estimator meets `tol`, the dof
/// budget is reached or `max_steps` solves were done.
RunRecord adaptive_loop(const Problem& problem, const AdaptiveOptions& options);

/// eta / exact error. Throws DomainError when the exact error is absent or zero.
double efficiency_index(const StepRecord& step);

/// Mean efficiency index over the last `last_k` steps.
double mean_efficiency(const RunRecord& record, int last_k);

enum class RateSeries { estimator, exact };

/// Least-squares slope of log10(value) against log10(dofs) over the last
/// `last_k` steps.
double fit_rate(const RunRecord& record, int last_k, RateSeries series);

/// Same fit over the trailing steps whose dof count is at least a tenth of
/// the final one. Adaptive runs add few dofs per step, so a fixed window of
/// steps spans too short a range.
double fit_rate_last_decade(const RunRecord& record, RateSeries series);

/// ||u_l - u_{l,p}||_{L2} for the requested indices l on a fixed mesh, against
/// the problem's analytic parametric solutions.
std::vector<double> parametric_l2_errors(const Problem& problem, const RationalScheme& scheme, const Mesh& mesh,
                                         std::span<const int> indices, const SolveOptions& options = {});

} // namespace fraclap
