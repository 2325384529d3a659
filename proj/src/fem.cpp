#include "fraclap/fem.hpp"

#include "fraclap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fraclap {

CellGeometry cell_geometry(const Mesh& mesh, int cell)
{
    const auto& v = mesh.cell(cell);
    const Point& p0 = mesh.vertex(v[0]);
    const Point& p1 = mesh.vertex(v[1]);
    const Point& p2 = mesh.vertex(v[2]);
    const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    if (!(det > 0.0))
        throw DomainError("degenerate cell " + std::to_string(cell) + ": Jacobian determinant <= 0");
    CellGeometry g;
    g.area = 0.5 * det;
    g.grad_lambda[0] = {(p1.y - p2.y) / det, (p2.x - p1.x) / det};
    g.grad_lambda[1] = {(p2.y - p0.y) / det, (p0.x - p2.x) / det};
    g.grad_lambda[2] = {(p0.y - p1.y) / det, (p1.x - p0.x) / det};
    return g;
}

Point map_to_cell(const Mesh& mesh, int cell, const std::array<double, 3>& bary)
{
    const auto& v = mesh.cell(cell);
    Point p;
    for (int k = 0; k < 3; ++k) {
        p.x += bary[k] * mesh.vertex(v[k]).x;
        p.y += bary[k] * mesh.vertex(v[k]).y;
    }
    return p;
}

FeSpace::FeSpace(const Mesh& mesh, int degree) : mesh_(&mesh), degree_(degree)
{
    if (degree != 1 && degree != 2)
        throw DomainError("FeSpace: only degrees 1 and 2 are available");

    const std::size_t nv = mesh.num_vertices();
    coordinates_ = mesh.vertices();
    boundary_ = std::vector<char>(nv, 0);
    const auto vertex_flags = mesh.boundary_vertex_flags();
    for (std::size_t v = 0; v < nv; ++v)
        boundary_[v] = vertex_flags[v] ? 1 : 0;

    if (degree == 2) {
        for (const Facet& facet : mesh.facets()) {
            const Point& a = mesh.vertex(facet.vertices[0]);
            const Point& b = mesh.vertex(facet.vertices[1]);
            coordinates_.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
            boundary_.push_back(facet.on_boundary() ? 1 : 0);
        }
    }

    cell_dofs_.reserve(mesh.num_cells() * static_cast<std::size_t>(dofs_per_cell()));
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        for (int v : mesh.cell(static_cast<int>(c)))
            cell_dofs_.push_back(v);
        if (degree == 2)
            for (int k = 0; k < 3; ++k)
                cell_dofs_.push_back(static_cast<int>(nv) + mesh.cell_facet(static_cast<int>(c), k));
    }
}

void FeSpace::shape_values(const std::array<double, 3>& l, std::span<double> out) const
{
    if (degree_ == 1) {
        out[0] = l[0];
        out[1] = l[1];
        out[2] = l[2];
        return;
    }
    for (int k = 0; k < 3; ++k) {
        out[k] = l[k] * (2.0 * l[k] - 1.0);
        out[3 + k] = 4.0 * l[(k + 1) % 3] * l[(k + 2) % 3];
    }
}

void FeSpace::shape_gradients(const CellGeometry& g, const std::array<double, 3>& l,
                              std::span<std::array<double, 2>> out) const
{
    const auto& gl = g.grad_lambda;
    if (degree_ == 1) {
        out[0] = gl[0];
        out[1] = gl[1];
        out[2] = gl[2];
        return;
    }
    for (int k = 0; k < 3; ++k) {
        const double f = 4.0 * l[k] - 1.0;
        out[k] = {f * gl[k][0], f * gl[k][1]};
        const int i = (k + 1) % 3;
        const int j = (k + 2) % 3;
        out[3 + k] = {4.0 * (l[i] * gl[j][0] + l[j] * gl[i][0]), 4.0 * (l[i] * gl[j][1] + l[j] * gl[i][1])};
    }
}

QuadratureSamples sample_at_quadrature(const Mesh& mesh, const ScalarField& field)
{
    const QuadratureRule& rule = triangle_degree4();
    QuadratureSamples samples;
    samples.points_per_cell = rule.size();
    samples.values.reserve(mesh.num_cells() * rule.size());
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        for (const auto& bary : rule.points) {
            const Point p = map_to_cell(mesh, static_cast<int>(c), bary);
            samples.values.push_back(field(p.x, p.y));
        }
    return samples;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    const int* rp = row_ptr.data();
    const int* ci = col.data();
    const double* v = values.data();
    for (std::size_t i = 0; i < rows; ++i) {
        double sum = 0.0;
        for (int k = rp[i]; k < rp[i + 1]; ++k)
            sum += v[k] * x[ci[k]];
        y[i] = sum;
    }
}

double CsrMatrix::at(std::size_t i, std::size_t j) const
{
    const auto first = col.begin() + row_ptr[i];
    const auto last = col.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(first, last, static_cast<int>(j));
    if (it == last || *it != static_cast<int>(j))
        return 0.0;
    return values[static_cast<std::size_t>(it - col.begin())];
}

ElementMatrices element_matrices(const FeSpace& space, int cell)
{
    const QuadratureRule& rule = triangle_degree4();
    const CellGeometry g = cell_geometry(space.mesh(), cell);
    const int n = space.dofs_per_cell();
    ElementMatrices e;
    e.size = n;
    e.mass.assign(static_cast<std::size_t>(n) * n, 0.0);
    e.stiffness.assign(static_cast<std::size_t>(n) * n, 0.0);
    std::array<double, 6> phi{};
    std::array<std::array<double, 2>, 6> grad{};
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double w = rule.weights[q] * 2.0 * g.area;
        space.shape_values(rule.points[q], phi);
        space.shape_gradients(g, rule.points[q], grad);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                e.mass[i * n + j] += w * phi[i] * phi[j];
                e.stiffness[i * n + j] += w * (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]);
            }
    }
    return e;
}

namespace {

CsrMatrix sparsity_pattern(const FeSpace& space)
{
    const std::size_t n = space.num_dofs();
    const std::size_t per_cell = static_cast<std::size_t>(space.dofs_per_cell());
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(space.mesh().num_cells() * per_cell * per_cell);
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
        const auto dofs = space.cell_dofs(static_cast<int>(c));
        for (int i : dofs)
            for (int j : dofs)
                pairs.emplace_back(i, j);
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    CsrMatrix m;
    m.rows = n;
    m.row_ptr.assign(n + 1, 0);
    m.col.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        ++m.row_ptr[i + 1];
        m.col.push_back(j);
    }
    for (std::size_t i = 0; i < n; ++i)
        m.row_ptr[i + 1] += m.row_ptr[i];
    m.values.assign(m.col.size(), 0.0);
    return m;
}

std::size_t entry_index(const CsrMatrix& m, int i, int j)
{
    const auto first = m.col.begin() + m.row_ptr[i];
    const auto last = m.col.begin() + m.row_ptr[i + 1];
    return static_cast<std::size_t>(std::lower_bound(first, last, j) - m.col.begin());
}

} // namespace

ParametricAssembler::ParametricAssembler(const FeSpace& space, const QuadratureSamples& f)
{
    const QuadratureRule& rule = triangle_degree4();
    if (f.points_per_cell != rule.size() || f.values.size() != space.mesh().num_cells() * rule.size())
        throw DomainError("ParametricAssembler: data samples do not match the mesh");

    mass_ = sparsity_pattern(space);
    stiffness_.assign(mass_.values.size(), 0.0);
    load_.assign(space.num_dofs(), 0.0);
    constrained_ = space.boundary_dofs();

    const int n = space.dofs_per_cell();
    std::array<double, 6> phi{};
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
        const int ci = static_cast<int>(c);
        const auto dofs = space.cell_dofs(ci);
        const ElementMatrices e = element_matrices(space, ci);
        const double area = cell_geometry(space.mesh(), ci).area;
        const auto fc = f.cell(ci);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const std::size_t k = entry_index(mass_, dofs[i], dofs[j]);
                mass_.values[k] += e.mass[i * n + j];
                stiffness_[k] += e.stiffness[i * n + j];
            }
        for (std::size_t q = 0; q < rule.size(); ++q) {
            space.shape_values(rule.points[q], phi);
            const double w = rule.weights[q] * 2.0 * area * fc[q];
            for (int i = 0; i < n; ++i)
                load_[dofs[i]] += w * phi[i];
        }
    }

    for (std::size_t i = 0; i < mass_.rows; ++i)
        for (int k = mass_.row_ptr[i]; k < mass_.row_ptr[i + 1]; ++k)
            if (constrained_[i] || constrained_[mass_.col[k]]) {
                mass_.values[k] = 0.0;
                stiffness_[k] = 0.0;
            }
    for (std::size_t i = 0; i < load_.size(); ++i)
        if (constrained_[i])
            load_[i] = 0.0;
}

SparseSystem ParametricAssembler::system(double c) const
{
    if (!(c > 0.0))
        throw DomainError("assemble_parametric: diffusion coefficient must be positive");
    SparseSystem s;
    s.matrix = mass_;
    for (std::size_t k = 0; k < s.matrix.values.size(); ++k)
        s.matrix.values[k] += c * stiffness_[k];
    for (std::size_t i = 0; i < s.matrix.rows; ++i)
        if (constrained_[i])
            s.matrix.values[entry_index(s.matrix, static_cast<int>(i), static_cast<int>(i))] = 1.0;
    s.rhs = load_;
    s.constrained = constrained_;
    return s;
}

SparseSystem assemble_parametric(const FeSpace& space, double c, const ScalarField& f)
{
    if (!(c > 0.0))
        throw DomainError("assemble_parametric: diffusion coefficient must be positive");
    return ParametricAssembler(space, sample_at_quadrature(space.mesh(), f)).system(c);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += a[i] * b[i];
    return sum;
}

} // namespace

CgResult solve_cg(const SparseSystem& system, double rel_tol, int max_iter, std::span<const double> initial_guess)
{
    const CsrMatrix& A = system.matrix;
    const std::size_t n = A.rows;
    CgResult result;
    result.x.assign(n, 0.0);
    if (!initial_guess.empty()) {
        if (initial_guess.size() != n)
            throw DomainError("solve_cg: initial guess has the wrong size");
        for (std::size_t i = 0; i < n; ++i)
            result.x[i] = system.constrained[i] ? 0.0 : initial_guess[i];
    }

    const double b_norm = std::sqrt(dot(system.rhs, system.rhs));
    if (b_norm == 0.0) {
        std::fill(result.x.begin(), result.x.end(), 0.0);
        return result;
    }
    const double target = rel_tol * b_norm;

    std::vector<double> r(n), z(n), p(n), Ap(n), inv_diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = A.at(i, i);
        if (!(d > 0.0))
            throw SolverError("solve_cg: nonpositive diagonal entry, matrix is not SPD");
        inv_diag[i] = 1.0 / d;
    }

    A.multiply(result.x, Ap);
    for (std::size_t i = 0; i < n; ++i)
        r[i] = system.rhs[i] - Ap[i];
    double r_norm = std::sqrt(dot(r, r));
    if (r_norm <= target) {
        result.relative_residual = r_norm / b_norm;
        return result;
    }

    for (std::size_t i = 0; i < n; ++i)
        z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);

    for (int it = 1; it <= max_iter; ++it) {
        A.multiply(p, Ap);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0))
            throw SolverError("solve_cg: breakdown, matrix is not SPD", r_norm / b_norm, it);
        const double alpha = rz / pAp;
        double rr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            result.x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
            rr += r[i] * r[i];
        }
        r_norm = std::sqrt(rr);
        if (r_norm <= target) {
            result.iterations = it;
            result.relative_residual = r_norm / b_norm;
            return result;
        }
        double rz_next = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = inv_diag[i] * r[i];
            rz_next += r[i] * z[i];
        }
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i)
            p[i] = z[i] + beta * p[i];
    }
    throw SolverError("solve_cg: no convergence after " + std::to_string(max_iter)
                          + " iterations, relative residual " + std::to_string(r_norm / b_norm),
                      r_norm / b_norm, max_iter);
}

std::vector<double> galerkin_initial_guess(const SparseSystem& system, std::span<const std::vector<double>> basis)
{
    const std::size_t n = system.matrix.rows;
    std::vector<double> guess(n, 0.0);

    // Orthonormalize (modified Gram-Schmidt), dropping nearly dependent vectors.
    std::vector<std::vector<double>> q;
    for (const auto& v : basis) {
        if (v.size() != n)
            throw DomainError("galerkin_initial_guess: basis vector has the wrong size");
        std::vector<double> w = v;
        const double original = std::sqrt(dot(w, w));
        if (original == 0.0)
            continue;
        for (const auto& u : q) {
            const double proj = dot(u, w);
            for (std::size_t i = 0; i < n; ++i)
                w[i] -= proj * u[i];
        }
        const double norm = std::sqrt(dot(w, w));
        if (norm <= 1e-10 * original)
            continue;
        for (double& x : w)
            x /= norm;
        q.push_back(std::move(w));
    }
    const std::size_t k = q.size();
    if (k == 0)
        return guess;

    std::vector<std::vector<double>> aq(k, std::vector<double>(n));
    for (std::size_t a = 0; a < k; ++a)
        system.matrix.multiply(q[a], aq[a]);
    std::vector<double> G(k * k), g(k);
    for (std::size_t a = 0; a < k; ++a) {
        g[a] = dot(q[a], system.rhs);
        for (std::size_t b = 0; b < k; ++b)
            G[a * k + b] = dot(q[a], aq[b]);
    }
    // Cholesky of the small Gram matrix.
    for (std::size_t j = 0; j < k; ++j) {
        double d = G[j * k + j];
        for (std::size_t m = 0; m < j; ++m)
            d -= G[j * k + m] * G[j * k + m];
        if (!(d > 0.0))
            return guess;
        G[j * k + j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < k; ++i) {
            double v = G[i * k + j];
            for (std::size_t m = 0; m < j; ++m)
                v -= G[i * k + m] * G[j * k + m];
            G[i * k + j] = v / G[j * k + j];
        }
    }
    std::vector<double> alpha = g;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t m = 0; m < i; ++m)
            alpha[i] -= G[i * k + m] * alpha[m];
        alpha[i] /= G[i * k + i];
    }
    for (std::size_t i = k; i-- > 0;) {
        for (std::size_t m = i + 1; m < k; ++m)
            alpha[i] -= G[m * k + i] * alpha[m];
        alpha[i] /= G[i * k + i];
    }
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t i = 0; i < n; ++i)
            guess[i] += alpha[a] * q[a][i];
    return guess;
}

namespace {

double evaluate_at(const FeSpace& space, std::span<const double> coeffs, int cell, const std::array<double, 3>& bary)
{
    std::array<double, 6> phi{};
    space.shape_values(bary, phi);
    const auto dofs = space.cell_dofs(cell);
    double value = 0.0;
    for (std::size_t i = 0; i < dofs.size(); ++i)
        value += coeffs[dofs[i]] * phi[i];
    return value;
}

} // namespace

double l2_norm(const FeSpace& space, std::span<const double> coeffs)
{
    return l2_error(space, coeffs, [](double, double) { return 0.0; });
}

double l2_error(const FeSpace& space, std::span<const double> coeffs, const ScalarField& exact)
{
    if (coeffs.size() != space.num_dofs())
        throw DomainError("l2_error: coefficient vector does not match the space");
    const QuadratureRule& rule = triangle_degree4();
    const Mesh& mesh = space.mesh();
    double sum = 0.0;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const int ci = static_cast<int>(c);
        const double jac = 2.0 * mesh.signed_area(ci);
        double cell_sum = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point p = map_to_cell(mesh, ci, rule.points[q]);
            const double diff = evaluate_at(space, coeffs, ci, rule.points[q]) - exact(p.x, p.y);
            cell_sum += rule.weights[q] * diff * diff;
        }
        sum += jac * cell_sum;
    }
    return std::sqrt(sum);
}

std::vector<double> interpolate(const FeSpace& space, const ScalarField& field)
{
    std::vector<double> values;
    values.reserve(space.num_dofs());
    for (const Point& p : space.dof_coordinates())
        values.push_back(field(p.x, p.y));
    return values;
}

} // namespace fraclap
