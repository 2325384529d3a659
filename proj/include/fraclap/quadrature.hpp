#pragma once

#include <array>
#include <vector>

namespace fraclap {

/// Quadrature on the reference triangle {(0,0),(1,0),(0,1)}. Points are
/// barycentric triples; weights sum to the reference area 1/2.
struct QuadratureRule {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
    int degree = 0;

    std::size_t size() const { return weights.size(); }
};

/// Six-point symmetric rule, exact for polynomials of degree 4. All points
/// are strictly interior.
const QuadratureRule& triangle_degree4();

} // namespace fraclap
