#pragma once

#include "fraclap/fem.hpp"
#include "fraclap/rational.hpp"

#include <array>
#include <span>
#include <vector>

namespace fraclap {

/// Degrees of the Bank-Weiser pair: local space of degree p_plus whose
/// degree-p_minus Lagrange interpolant vanishes.
struct BwConfig {
    int p_plus = 2;
    int p_minus = 1;
};

/// Per-cell Bank-Weiser basis for a degree-1 trial space with BwConfig (2,1):
/// the edge bubbles b_k = 4 lambda_{k+1} lambda_{k+2}, one per local edge k.
/// Bubbles of edges on the Dirichlet boundary are inactive, so a cell with j
/// boundary edges has a (3 - j)-dimensional local space.
class BwBasis {
public:
    explicit BwBasis(const FeSpace& space, BwConfig config = {});

    const FeSpace& space() const { return *space_; }
    BwConfig config() const { return config_; }
    std::size_t num_cells() const { return active_.size(); }

    bool active(int cell, int k) const { return active_[cell][k]; }
    int dimension(int cell) const;
    /// Row-major 3x3 bubble mass and stiffness matrices (inactive rows included).
    const std::array<double, 9>& mass(int cell) const { return mass_[cell]; }
    const std::array<double, 9>& stiffness(int cell) const { return stiffness_[cell]; }
    double area(int cell) const { return area_[cell]; }

    /// Bubble values at the degree-4 quadrature points: value(q)[k].
    static const std::vector<std::array<double, 3>>& values_at_quadrature();

private:
    const FeSpace* space_;
    BwConfig config_;
    std::vector<std::array<bool, 3>> active_;
    std::vector<std::array<double, 9>> mass_;
    std::vector<std::array<double, 9>> stiffness_;
    std::vector<double> area_;
};

/// Residual data of one parametric solution on one cell:
/// r = f - u + c Laplace(u) at the degree-4 quadrature points, and per local
/// edge the normal-derivative jump J = c (grad u_lo - grad u_hi) . n_lo, with
/// lo < hi the incident cell indices and n_lo the unit normal leaving cell lo.
/// J equals c times the sum of both outward normal derivatives, so its value
/// does not depend on which side evaluates it. Boundary edges carry J = 0.
struct CellResidual {
    std::array<double, 6> interior{};
    std::array<double, 3> jump{};
    std::array<bool, 3> interior_facet{};
};

CellResidual local_residual_data(const FeSpace& space, std::span<const double> u, double c, const ScalarField& f,
                                 int cell);
CellResidual local_residual_data(const FeSpace& space, std::span<const double> u, double c,
                                 const QuadratureSamples& f, int cell);

/// Coefficients of a local solution in the cell's bubble basis (0 for inactive bubbles).
using LocalSolution = std::array<double, 3>;

/// Solves (e, v)_T + c (grad e, grad v)_T = (r, v)_T - 1/2 sum_E (J, v)_E over
/// the active bubbles of the cell with a dense Cholesky factorization.
LocalSolution solve_local_bw(const BwBasis& basis, int cell, double c, const CellResidual& data);

/// Local Bank-Weiser solutions of one parametric problem on every cell.
std::vector<LocalSolution> parametric_bw_solutions(const BwBasis& basis, std::span<const double> u, double c,
                                                   const QuadratureSamples& f);

/// Fractional error field: per-cell weighted sum of local solutions, local
/// L2 indicators and their l2 combination.
struct ErrorField {
    std::vector<LocalSolution> coefficients;
    std::vector<double> local;
    double global = 0.0;
};

/// Streaming form of the weighted sum; `add` calls must arrive in the order
/// the sum should be formed in.
class FractionalAccumulator {
public:
    explicit FractionalAccumulator(const BwBasis& basis);

    void add(double weight, std::span<const LocalSolution> solutions);
    void merge(const FractionalAccumulator& other);
    ErrorField finish() const;

private:
    const BwBasis* basis_;
    std::vector<LocalSolution> sum_;
};

/// Indicators of a given coefficient field (degree-4 quadrature of the square).
ErrorField error_field_from_coefficients(const BwBasis& basis, std::vector<LocalSolution> coefficients);

/// Sums w_l e_l over the scheme's indices in ascending l. per_l[i] holds the
/// local solutions for l = i - M.
ErrorField accumulate_fractional(const RationalScheme& scheme, std::span<const std::vector<LocalSolution>> per_l,
                                 const BwBasis& basis);

} // namespace fraclap
