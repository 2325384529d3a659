#include "fraclap/driver.hpp"

#include "fraclap/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

namespace fraclap {

Problem sines2d()
{
    constexpr double pi = std::numbers::pi;
    Problem p;
    p.name = "sines2d";
    p.side = pi;
    p.f = [](double x, double y) { return 2.0 / pi * std::sin(x) * std::sin(y); };
    p.exact_solution = [](double s, double x, double y) {
        return std::pow(2.0, -s) * 2.0 / pi * std::sin(x) * std::sin(y);
    };
    // The data is the first Dirichlet eigenfunction (eigenvalue 2), normalized.
    p.parametric_amplitude = [](double c) { return 1.0 / (1.0 + 2.0 * c); };
    p.mode = p.f;
    p.f_norm = 1.0;
    p.default_n = 8;
    return p;
}

Problem checkerboard2d()
{
    Problem p;
    p.name = "checkerboard2d";
    p.side = 1.0;
    p.f = [](double x, double y) { return (x - 0.5) * (y - 0.5) > 0.0 ? 1.0 : 0.0; };
    p.default_n = 8;
    return p;
}

Problem zero_problem(double side)
{
    Problem p;
    p.name = "zero";
    p.side = side;
    p.f = [](double, double) { return 0.0; };
    p.exact_solution = [](double, double, double) { return 0.0; };
    p.parametric_amplitude = [](double) { return 0.0; };
    p.mode = p.f;
    p.f_norm = 0.0;
    p.default_n = 8;
    return p;
}

Problem make_problem(const std::string& name)
{
    if (name == "sines2d")
        return sines2d();
    if (name == "checkerboard2d")
        return checkerboard2d();
    if (name == "zero")
        return zero_problem();
    throw DomainError("unknown problem '" + name + "' (expected sines2d, checkerboard2d or zero)");
}

ScalarField semi_discrete_solution(const Problem& problem, const RationalScheme& scheme)
{
    if (!problem.has_parametric_solution())
        return {};
    double amplitude = 0.0;
    for (std::size_t i = 0; i < scheme.size(); ++i)
        amplitude += scheme.weights[i] * problem.parametric_amplitude(scheme.diffusion[i]);
    return [amplitude, mode = problem.mode](double x, double y) { return amplitude * mode(x, y); };
}

double data_norm(const Problem& problem, const Mesh& mesh)
{
    if (problem.f_norm)
        return *problem.f_norm;
    const QuadratureRule& rule = triangle_degree4();
    const QuadratureSamples f = sample_at_quadrature(mesh, problem.f);
    double sum = 0.0;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto values = f.cell(static_cast<int>(c));
        double cell_sum = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q)
            cell_sum += rule.weights[q] * values[q] * values[q];
        sum += 2.0 * mesh.signed_area(static_cast<int>(c)) * cell_sum;
    }
    return std::sqrt(sum);
}

namespace {

struct BlockResult {
    std::vector<double> u;
    FractionalAccumulator error;
    long iterations = 0;
};

} // namespace

FractionalSolution fractional_solve(const Problem& problem, const RationalScheme& scheme, const Mesh& mesh,
                                    int degree, const SolveOptions& options)
{
    if (degree != 1)
        throw DomainError("fractional_solve: only degree 1 is supported");
    if (options.block_size < 1)
        throw DomainError("fractional_solve: block size must be positive");

    const FeSpace space(mesh, degree);
    const QuadratureSamples f = sample_at_quadrature(mesh, problem.f);
    const ParametricAssembler assembler(space, f);
    const BwBasis basis(space);
    const std::size_t n = space.num_dofs();

    const std::size_t terms = scheme.size();
    const std::size_t block = static_cast<std::size_t>(options.block_size);
    const std::size_t num_blocks = (terms + block - 1) / block;

    auto solve_block = [&](std::size_t b) {
        BlockResult result{std::vector<double>(n, 0.0), FractionalAccumulator(basis), 0};
        std::deque<std::vector<double>> previous;
        const std::size_t first = b * block;
        const std::size_t last = std::min(terms, first + block);
        for (std::size_t i = first; i < last; ++i) {
            const int l = scheme.index_at(i);
            const double c = scheme.diffusion[i];
            const double w = scheme.weights[i];
            const SparseSystem system = assembler.system(c);
            const std::vector<std::vector<double>> span_basis(previous.begin(), previous.end());
            const std::vector<double> guess = galerkin_initial_guess(system, span_basis);
            CgResult cg;
            try {
                cg = solve_cg(system, options.cg_rel_tol, options.cg_max_iter, guess);
            } catch (const SolverError& e) {
                throw SolverError("parametric problem l = " + std::to_string(l) + ": " + e.what(),
                                  e.relative_residual(), e.iterations());
            }
            result.iterations += cg.iterations;
            for (std::size_t k = 0; k < n; ++k)
                result.u[k] += w * cg.x[k];
            result.error.add(w, parametric_bw_solutions(basis, cg.x, c, f));
            if (options.on_parametric)
                options.on_parametric(l, cg.x);
            previous.push_back(std::move(cg.x));
            if (previous.size() > 2)
                previous.pop_front();
        }
        return result;
    };

    FractionalSolution solution;
    solution.u.assign(n, 0.0);
    FractionalAccumulator total(basis);
    auto reduce = [&](const BlockResult& r) {
        for (std::size_t k = 0; k < n; ++k)
            solution.u[k] += r.u[k];
        total.merge(r.error);
        solution.cg_iterations += r.iterations;
    };

    int threads = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, static_cast<int>(num_blocks)));

    if (threads == 1) {
        for (std::size_t b = 0; b < num_blocks; ++b)
            reduce(solve_block(b));
    } else {
        // Blocks are claimed in ascending order and reduced strictly in block order.
        std::atomic<std::size_t> next{0};
        std::mutex mutex;
        std::condition_variable turn;
        std::size_t reduced = 0;
        bool failed = false;
        std::exception_ptr error;

        auto worker = [&] {
            for (;;) {
                const std::size_t b = next.fetch_add(1);
                if (b >= num_blocks)
                    return;
                std::optional<BlockResult> result;
                try {
                    result.emplace(solve_block(b));
                } catch (...) {
                    std::lock_guard lock(mutex);
                    if (!error)
                        error = std::current_exception();
                    failed = true;
                    turn.notify_all();
                    return;
                }
                std::unique_lock lock(mutex);
                turn.wait(lock, [&] { return failed || reduced == b; });
                if (failed)
                    return;
                reduce(*result);
                ++reduced;
                turn.notify_all();
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
        if (error)
            std::rethrow_exception(error);
    }

    for (std::size_t k = 0; k < n; ++k)
        if (space.boundary_dofs()[k])
            solution.u[k] = 0.0;
    solution.error = total.finish();
    return solution;
}

std::string to_string(Refinement mode) { return mode == Refinement::uniform ? "uniform" : "adaptive"; }

Refinement refinement_from_string(const std::string& text)
{
    if (text == "uniform")
        return Refinement::uniform;
    if (text == "adaptive")
        return Refinement::adaptive;
    throw DomainError("refinement must be 'uniform' or 'adaptive', got '" + text + "'");
}

RunRecord adaptive_loop(const Problem& problem, const AdaptiveOptions& options)
{
    if (!(options.theta > 0.0 && options.theta <= 1.0))
        throw DomainError("adaptive_loop: theta must lie in (0,1]");
    if (options.max_steps < 1)
        throw DomainError("adaptive_loop: at least one step is required");

    const int n0 = options.initial_n > 0 ? options.initial_n : problem.default_n;
    Mesh mesh = unit_square_mesh(n0, problem.side);

    const double f_norm = data_norm(problem, mesh);
    const double kappa = options.kappa
                             ? *options.kappa
                             : choose_kappa(options.s, options.lambda0, f_norm,
                                            options.tol_rational * (f_norm > 0.0 ? f_norm : 1.0));
    const RationalScheme scheme = build_scheme(options.s, kappa, options.lambda0);
    const ScalarField reference = semi_discrete_solution(problem, scheme);

    RunRecord record;
    record.problem = problem.name;
    record.s = options.s;
    record.kappa = kappa;
    record.lambda0 = options.lambda0;
    record.m_neg = scheme.m_neg;
    record.n_pos = scheme.n_pos;
    record.theta = options.theta;
    record.refinement = options.refinement;

    for (int step = 0;; ++step) {
        const auto start = std::chrono::steady_clock::now();
        const FractionalSolution solution = fractional_solve(problem, scheme, mesh, options.degree, options.solve);

        StepRecord entry;
        entry.step = step;
        entry.dofs = mesh.num_vertices();
        entry.cells = mesh.num_cells();
        entry.eta = solution.error.global;
        if (reference) {
            const FeSpace space(mesh, options.degree);
            entry.exact_error = l2_error(space, solution.u, reference);
            if (*entry.exact_error > 0.0)
                entry.efficiency = entry.eta / *entry.exact_error;
        }
        entry.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        record.steps.push_back(entry);
        if (options.on_step)
            options.on_step(entry, mesh, solution);

        if (entry.eta <= options.tol) {
            record.status = "tolerance";
            break;
        }
        if (entry.dofs >= options.max_dofs) {
            record.status = "budget";
            break;
        }
        if (step + 1 >= options.max_steps) {
            record.status = "max_steps";
            break;
        }

        if (options.refinement == Refinement::uniform) {
            mesh = uniform_refine(mesh).mesh;
        } else {
            const MarkedSet marked = dorfler_mark(solution.error.local, options.theta);
            mesh = refine(mesh, marked).mesh;
        }
    }
    return record;
}

double efficiency_index(const StepRecord& step)
{
    if (!step.exact_error || !(*step.exact_error > 0.0))
        throw DomainError("efficiency index undefined: exact error is missing or zero");
    return step.eta / *step.exact_error;
}

double mean_efficiency(const RunRecord& record, int last_k)
{
    if (last_k < 1 || record.steps.size() < static_cast<std::size_t>(last_k))
        throw DomainError("mean_efficiency: not enough steps");
    double sum = 0.0;
    for (std::size_t i = record.steps.size() - last_k; i < record.steps.size(); ++i)
        sum += efficiency_index(record.steps[i]);
    return sum / last_k;
}

namespace {

double log_log_slope(std::span<const StepRecord> steps, RateSeries series)
{
    std::vector<double> xs, ys;
    for (const StepRecord& s : steps) {
        const double value = series == RateSeries::estimator ? s.eta : s.exact_error.value_or(0.0);
        if (!(value > 0.0) || s.dofs == 0)
            throw DomainError("fit_rate: insufficient data (nonpositive value in the fitted range)");
        xs.push_back(std::log10(static_cast<double>(s.dofs)));
        ys.push_back(std::log10(value));
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (!(sxx > 0.0))
        throw DomainError("fit_rate: dof counts do not vary");
    return sxy / sxx;
}

} // namespace

double fit_rate(const RunRecord& record, int last_k, RateSeries series)
{
    if (last_k < 2 || record.steps.size() < static_cast<std::size_t>(last_k))
        throw DomainError("fit_rate: insufficient data for a slope fit");
    return log_log_slope(std::span(record.steps).last(static_cast<std::size_t>(last_k)), series);
}

double fit_rate_last_decade(const RunRecord& record, RateSeries series)
{
    if (record.steps.empty())
        throw DomainError("fit_rate: insufficient data for a slope fit");
    const double floor = static_cast<double>(record.steps.back().dofs) / 10.0;
    std::size_t first = record.steps.size();
    while (first > 0 && static_cast<double>(record.steps[first - 1].dofs) >= floor)
        --first;
    if (record.steps.size() - first < 2)
        throw DomainError("fit_rate: insufficient data for a slope fit");
    return log_log_slope(std::span(record.steps).subspan(first), series);
}

std::vector<double> parametric_l2_errors(const Problem& problem, const RationalScheme& scheme, const Mesh& mesh,
                                         std::span<const int> indices, const SolveOptions& options)
{
    if (!problem.has_parametric_solution())
        throw DomainError("parametric_l2_errors: problem has no analytic parametric solutions");
    const FeSpace space(mesh, 1);
    const ParametricAssembler assembler(space, sample_at_quadrature(mesh, problem.f));
    std::vector<double> errors;
    for (int l : indices) {
        if (l < -scheme.m_neg || l > scheme.n_pos)
            throw DomainError("parametric_l2_errors: index l outside the scheme");
        const double c = scheme.diffusion[scheme.position_of(l)];
        const CgResult cg = solve_cg(assembler.system(c), options.cg_rel_tol, options.cg_max_iter);
        errors.push_back(l2_error(space, cg.x, [&](double x, double y) {
            return problem.parametric_solution(c, x, y);
        }));
    }
    return errors;
}

} // namespace fraclap
