#pragma once

#include "fraclap/mesh.hpp"
#include "fraclap/quadrature.hpp"

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace fraclap {

using ScalarField = std::function<double(double, double)>;

/// Barycentric gradients and area of one triangle.
struct CellGeometry {
    std::array<std::array<double, 2>, 3> grad_lambda{};
    double area = 0.0;
};

CellGeometry cell_geometry(const Mesh& mesh, int cell);

/// Physical coordinates of a barycentric point of a cell.
Point map_to_cell(const Mesh& mesh, int cell, const std::array<double, 3>& bary);

/// Continuous Lagrange space of degree 1 or 2 with homogeneous Dirichlet data
/// on the whole boundary. Degree-2 dofs are numbered vertices first, then one
/// per facet. The mesh must outlive the space.
class FeSpace {
public:
    FeSpace(const Mesh& mesh, int degree = 1);

    const Mesh& mesh() const { return *mesh_; }
    int degree() const { return degree_; }
    int dofs_per_cell() const { return (degree_ + 1) * (degree_ + 2) / 2; }
    std::size_t num_dofs() const { return coordinates_.size(); }

    std::span<const int> cell_dofs(int cell) const
    {
        return {cell_dofs_.data() + static_cast<std::size_t>(cell) * dofs_per_cell(),
                static_cast<std::size_t>(dofs_per_cell())};
    }
    const std::vector<Point>& dof_coordinates() const { return coordinates_; }
    /// 1 for dofs whose node lies on a boundary facet.
    const std::vector<char>& boundary_dofs() const { return boundary_; }

    /// Local shape function values at a barycentric point.
    void shape_values(const std::array<double, 3>& bary, std::span<double> out) const;
    /// Local shape function gradients on a cell at a barycentric point.
    void shape_gradients(const CellGeometry& geometry, const std::array<double, 3>& bary,
                         std::span<std::array<double, 2>> out) const;

private:
    const Mesh* mesh_;
    int degree_;
    std::vector<int> cell_dofs_;
    std::vector<Point> coordinates_;
    std::vector<char> boundary_;
};

/// Values of a field at the degree-4 quadrature points, cell by cell.
struct QuadratureSamples {
    std::vector<double> values;
    std::size_t points_per_cell = 0;

    std::span<const double> cell(int c) const
    {
        return {values.data() + static_cast<std::size_t>(c) * points_per_cell, points_per_cell};
    }
};

QuadratureSamples sample_at_quadrature(const Mesh& mesh, const ScalarField& field);

/// Row-compressed sparse matrix.
struct CsrMatrix {
    std::size_t rows = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> values;

    void multiply(std::span<const double> x, std::span<double> y) const;
    double at(std::size_t i, std::size_t j) const;
};

/// Matrix and load after symmetric elimination of the Dirichlet dofs
/// (unit diagonal, zero row/column/rhs entry).
struct SparseSystem {
    CsrMatrix matrix;
    std::vector<double> rhs;
    std::vector<char> constrained;
};

struct ElementMatrices {
    int size = 0;
    std::vector<double> mass;      // row-major size x size
    std::vector<double> stiffness; // row-major size x size
};

ElementMatrices element_matrices(const FeSpace& space, int cell);

/// Caches mass, stiffness and load of one space so that the system
/// mass + c * stiffness for many reaction-diffusion coefficients c is cheap.
class ParametricAssembler {
public:
    ParametricAssembler(const FeSpace& space, const QuadratureSamples& f);

    /// Throws DomainError for c <= 0.
    SparseSystem system(double c) const;
    const std::vector<double>& load() const { return load_; }

private:
    CsrMatrix mass_;
    std::vector<double> stiffness_;
    std::vector<double> load_;
    std::vector<char> constrained_;
};

/// (u, v) + c (grad u, grad v) = (f, v) on the space, Dirichlet dofs eliminated.
SparseSystem assemble_parametric(const FeSpace& space, double c, const ScalarField& f);

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients. Stops when the recursively
/// updated residual satisfies ||r|| <= rel_tol ||b||; throws SolverError after
/// max_iter iterations. Dirichlet entries of the result are exactly zero.
CgResult solve_cg(const SparseSystem& system, double rel_tol = 1e-12, int max_iter = 20000,
                  std::span<const double> initial_guess = {});

/// Best approximation to the solution in the energy norm from span(basis).
/// Returns zeros for an empty or degenerate basis.
std::vector<double> galerkin_initial_guess(const SparseSystem& system, std::span<const std::vector<double>> basis);

double l2_norm(const FeSpace& space, std::span<const double> coeffs);
double l2_error(const FeSpace& space, std::span<const double> coeffs, const ScalarField& exact);

/// Nodal interpolant; values at Dirichlet dofs are taken from the field as well.
std::vector<double> interpolate(const FeSpace& space, const ScalarField& field);

} // namespace fraclap
