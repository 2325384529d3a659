#include "fraclap/estimator.hpp"

#include "fraclap/errors.hpp"

#include <cmath>

namespace fraclap {

namespace {

constexpr double edge_bubble_mean = 2.0 / 3.0; // integral of 4 t (1 - t) over [0,1]

struct Gradient {
    double x = 0.0;
    double y = 0.0;
};

Gradient p1_gradient(const FeSpace& space, std::span<const double> u, int cell, const CellGeometry& g)
{
    const auto dofs = space.cell_dofs(cell);
    Gradient grad;
    for (int k = 0; k < 3; ++k) {
        grad.x += u[dofs[k]] * g.grad_lambda[k][0];
        grad.y += u[dofs[k]] * g.grad_lambda[k][1];
    }
    return grad;
}

struct EdgeFrame {
    double length = 0.0;
    double nx = 0.0;
    double ny = 0.0;
};

/// Length and outward unit normal of local edge k of a counterclockwise cell.
EdgeFrame edge_frame(const Mesh& mesh, int cell, int k)
{
    const auto& v = mesh.cell(cell);
    const Point& a = mesh.vertex(v[(k + 1) % 3]);
    const Point& b = mesh.vertex(v[(k + 2) % 3]);
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double length = std::hypot(dx, dy);
    return {length, dy / length, -dx / length};
}

void require_supported(const FeSpace& space)
{
    if (space.degree() != 1)
        throw DomainError("Bank-Weiser estimator: only degree-1 trial spaces are supported");
}

double jump_across(const Mesh& mesh, int cell, int k, double c, const Gradient& own, const Gradient& other,
                   int other_cell)
{
    const EdgeFrame e = edge_frame(mesh, cell, k);
    // Normal leaving the lower-indexed cell.
    const double sign = cell < other_cell ? 1.0 : -1.0;
    const Gradient& lo = cell < other_cell ? own : other;
    const Gradient& hi = cell < other_cell ? other : own;
    return c * ((lo.x - hi.x) * sign * e.nx + (lo.y - hi.y) * sign * e.ny);
}

CellResidual residual_from(const FeSpace& space, std::span<const double> u, double c, std::span<const double> f_cell,
                           int cell, const std::vector<Gradient>* gradients)
{
    const Mesh& mesh = space.mesh();
    const QuadratureRule& rule = triangle_degree4();
    const auto dofs = space.cell_dofs(cell);
    CellResidual data;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto& l = rule.points[q];
        const double uh = l[0] * u[dofs[0]] + l[1] * u[dofs[1]] + l[2] * u[dofs[2]];
        data.interior[q] = f_cell[q] - uh; // Laplacian of a P1 function vanishes
    }

    auto gradient_of = [&](int k) {
        if (gradients)
            return (*gradients)[k];
        return p1_gradient(space, u, k, cell_geometry(mesh, k));
    };
    const Gradient own = gradient_of(cell);
    for (int k = 0; k < 3; ++k) {
        const Facet& facet = mesh.facets()[mesh.cell_facet(cell, k)];
        if (facet.on_boundary())
            continue;
        const int other = facet.cells[0] == cell ? facet.cells[1] : facet.cells[0];
        data.interior_facet[k] = true;
        data.jump[k] = jump_across(mesh, cell, k, c, own, gradient_of(other), other);
    }
    return data;
}

} // namespace

BwBasis::BwBasis(const FeSpace& space, BwConfig config) : space_(&space), config_(config)
{
    require_supported(space);
    if (config.p_plus != 2 || config.p_minus != 1)
        throw DomainError("Bank-Weiser estimator: only the (p_plus, p_minus) = (2, 1) pair is supported");

    const Mesh& mesh = space.mesh();
    const QuadratureRule& rule = triangle_degree4();
    const auto& bubbles = values_at_quadrature();
    const std::size_t n = mesh.num_cells();
    active_.resize(n);
    mass_.resize(n);
    stiffness_.resize(n);
    area_.resize(n);

    for (std::size_t c = 0; c < n; ++c) {
        const int ci = static_cast<int>(c);
        const CellGeometry g = cell_geometry(mesh, ci);
        area_[c] = g.area;
        for (int k = 0; k < 3; ++k)
            active_[c][k] = !mesh.facets()[mesh.cell_facet(ci, k)].on_boundary();

        std::array<double, 9> m{};
        std::array<double, 9> s{};
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const auto& l = rule.points[q];
            const double w = rule.weights[q] * 2.0 * g.area;
            std::array<std::array<double, 2>, 3> grad{};
            for (int k = 0; k < 3; ++k) {
                const int i = (k + 1) % 3;
                const int j = (k + 2) % 3;
                for (int d = 0; d < 2; ++d)
                    grad[k][d] = 4.0 * (l[i] * g.grad_lambda[j][d] + l[j] * g.grad_lambda[i][d]);
            }
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    m[a * 3 + b] += w * bubbles[q][a] * bubbles[q][b];
                    s[a * 3 + b] += w * (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1]);
                }
        }
        mass_[c] = m;
        stiffness_[c] = s;
    }
}

int BwBasis::dimension(int cell) const
{
    return static_cast<int>(active_[cell][0]) + static_cast<int>(active_[cell][1]) + static_cast<int>(active_[cell][2]);
}

const std::vector<std::array<double, 3>>& BwBasis::values_at_quadrature()
{
    static const std::vector<std::array<double, 3>> values = [] {
        std::vector<std::array<double, 3>> v;
        for (const auto& l : triangle_degree4().points)
            v.push_back({4.0 * l[1] * l[2], 4.0 * l[2] * l[0], 4.0 * l[0] * l[1]});
        return v;
    }();
    return values;
}

CellResidual local_residual_data(const FeSpace& space, std::span<const double> u, double c, const ScalarField& f,
                                 int cell)
{
    require_supported(space);
    const QuadratureRule& rule = triangle_degree4();
    std::array<double, 6> f_cell{};
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point p = map_to_cell(space.mesh(), cell, rule.points[q]);
        f_cell[q] = f(p.x, p.y);
    }
    return residual_from(space, u, c, f_cell, cell, nullptr);
}

CellResidual local_residual_data(const FeSpace& space, std::span<const double> u, double c,
                                 const QuadratureSamples& f, int cell)
{
    require_supported(space);
    return residual_from(space, u, c, f.cell(cell), cell, nullptr);
}

LocalSolution solve_local_bw(const BwBasis& basis, int cell, double c, const CellResidual& data)
{
    const QuadratureRule& rule = triangle_degree4();
    const auto& bubbles = BwBasis::values_at_quadrature();
    const Mesh& mesh = basis.space().mesh();

    std::array<int, 3> index{};
    int dim = 0;
    for (int k = 0; k < 3; ++k)
        if (basis.active(cell, k))
            index[dim++] = k;
    LocalSolution solution{};
    if (dim == 0)
        return solution;

    const double jac = 2.0 * basis.area(cell);
    std::array<double, 3> rhs{};
    for (int a = 0; a < dim; ++a) {
        const int k = index[a];
        double interior = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q)
            interior += rule.weights[q] * data.interior[q] * bubbles[q][k];
        rhs[a] = jac * interior;
        if (data.interior_facet[k])
            rhs[a] -= 0.5 * data.jump[k] * edge_frame(mesh, cell, k).length * edge_bubble_mean;
    }

    const auto& M = basis.mass(cell);
    const auto& K = basis.stiffness(cell);
    std::array<double, 9> L{};
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b <= a; ++b) {
            const int i = index[a];
            const int j = index[b];
            double v = M[i * 3 + j] + c * K[i * 3 + j];
            for (int m = 0; m < b; ++m)
                v -= L[a * 3 + m] * L[b * 3 + m];
            if (a == b) {
                if (!(v > 0.0))
                    throw SolverError("solve_local_bw: singular local matrix on cell " + std::to_string(cell));
                L[a * 3 + a] = std::sqrt(v);
            } else {
                L[a * 3 + b] = v / L[b * 3 + b];
            }
        }
    std::array<double, 3> y{};
    for (int a = 0; a < dim; ++a) {
        double v = rhs[a];
        for (int m = 0; m < a; ++m)
            v -= L[a * 3 + m] * y[m];
        y[a] = v / L[a * 3 + a];
    }
    for (int a = dim; a-- > 0;) {
        double v = y[a];
        for (int m = a + 1; m < dim; ++m)
            v -= L[m * 3 + a] * y[m];
        y[a] = v / L[a * 3 + a];
    }
    for (int a = 0; a < dim; ++a)
        solution[index[a]] = y[a];
    return solution;
}

std::vector<LocalSolution> parametric_bw_solutions(const BwBasis& basis, std::span<const double> u, double c,
                                                   const QuadratureSamples& f)
{
    const FeSpace& space = basis.space();
    const Mesh& mesh = space.mesh();
    const std::size_t n = mesh.num_cells();
    std::vector<Gradient> gradients(n);
    for (std::size_t cell = 0; cell < n; ++cell) {
        const int ci = static_cast<int>(cell);
        gradients[cell] = p1_gradient(space, u, ci, cell_geometry(mesh, ci));
    }
    std::vector<LocalSolution> solutions(n);
    for (std::size_t cell = 0; cell < n; ++cell) {
        const int ci = static_cast<int>(cell);
        solutions[cell] = solve_local_bw(basis, ci, c, residual_from(space, u, c, f.cell(ci), ci, &gradients));
    }
    return solutions;
}

FractionalAccumulator::FractionalAccumulator(const BwBasis& basis)
    : basis_(&basis), sum_(basis.num_cells(), LocalSolution{})
{
}

void FractionalAccumulator::add(double weight, std::span<const LocalSolution> solutions)
{
    if (solutions.size() != sum_.size())
        throw DomainError("accumulate_fractional: local solutions do not match the mesh");
    for (std::size_t c = 0; c < sum_.size(); ++c)
        for (int k = 0; k < 3; ++k)
            sum_[c][k] += weight * solutions[c][k];
}

void FractionalAccumulator::merge(const FractionalAccumulator& other)
{
    if (other.basis_ != basis_)
        throw DomainError("accumulate_fractional: partial sums built on different bases");
    for (std::size_t c = 0; c < sum_.size(); ++c)
        for (int k = 0; k < 3; ++k)
            sum_[c][k] += other.sum_[c][k];
}

ErrorField FractionalAccumulator::finish() const { return error_field_from_coefficients(*basis_, sum_); }

ErrorField error_field_from_coefficients(const BwBasis& basis, std::vector<LocalSolution> coefficients)
{
    if (coefficients.size() != basis.num_cells())
        throw DomainError("error field: coefficients do not match the mesh");
    const QuadratureRule& rule = triangle_degree4();
    const auto& bubbles = BwBasis::values_at_quadrature();
    ErrorField field;
    field.local.resize(coefficients.size());
    double total = 0.0;
    for (std::size_t c = 0; c < coefficients.size(); ++c) {
        const auto& e = coefficients[c];
        double sum = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double v = e[0] * bubbles[q][0] + e[1] * bubbles[q][1] + e[2] * bubbles[q][2];
            sum += rule.weights[q] * v * v;
        }
        const double eta2 = 2.0 * basis.area(static_cast<int>(c)) * sum;
        field.local[c] = std::sqrt(eta2);
        total += eta2;
    }
    field.global = std::sqrt(total);
    field.coefficients = std::move(coefficients);
    return field;
}

ErrorField accumulate_fractional(const RationalScheme& scheme, std::span<const std::vector<LocalSolution>> per_l,
                                 const BwBasis& basis)
{
    if (per_l.size() != scheme.size())
        throw DomainError("accumulate_fractional: one set of local solutions per index l is required");
    FractionalAccumulator acc(basis);
    for (std::size_t i = 0; i < per_l.size(); ++i)
        acc.add(scheme.weights[i], per_l[i]);
    return acc.finish();
}

} // namespace fraclap
