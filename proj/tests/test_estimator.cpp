#include <doctest.h>

#include "fraclap/driver.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/estimator.hpp"
#include "oracles/oracle.hpp"

#include <cmath>
#include <map>
#include <numbers>

using namespace fraclap;

namespace {

Problem quadratic_problem()
{
    Problem p;
    p.name = "quadratic";
    p.side = 1.0;
    p.f = [](double x, double y) { return 1.0 + 2.0 * x - y + 3.0 * x * y - x * x; };
    return p;
}

Mesh two_level_square() { return uniform_refine(uniform_refine(unit_square_mesh(1)).mesh).mesh; }

Point centroid(const Mesh& mesh, int c)
{
    Point p;
    for (int v : mesh.cell(c)) {
        p.x += mesh.vertex(v).x / 3;
        p.y += mesh.vertex(v).y / 3;
    }
    return p;
}

} // namespace

TEST_SUITE("estimator") {

TEST_CASE("basis dimensions")
{
    const Mesh mesh = unit_square_mesh(2);
    const FeSpace space(mesh, 1);
    const BwBasis basis(space);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        int boundary = 0;
        for (int k = 0; k < 3; ++k) {
            const bool on = mesh.facets()[mesh.cell_facet(static_cast<int>(c), k)].on_boundary();
            boundary += on;
            CHECK(basis.active(static_cast<int>(c), k) == !on);
        }
        CHECK(basis.dimension(static_cast<int>(c)) == 3 - boundary);
    }
    // A lone triangle has no interior facets.
    const Mesh single({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
    const FeSpace lone(single, 1);
    const BwBasis empty(lone);
    CHECK(empty.dimension(0) == 0);
    CellResidual data;
    data.interior.fill(1.0);
    const LocalSolution e = solve_local_bw(empty, 0, 1.0, data);
    CHECK(e == LocalSolution{0, 0, 0});

    CHECK_THROWS_AS(BwBasis(space, BwConfig{3, 1}), DomainError);
    const FeSpace p2(mesh, 2);
    CHECK_THROWS_AS(BwBasis{p2}, DomainError);
}

TEST_CASE("bubble matrices match the Vandermonde oracle")
{
    const Mesh mesh = refine(unit_square_mesh(2, 1.7), MarkedSet{{1, 6}, 0.5}).mesh;
    const FeSpace space(mesh, 1);
    const BwBasis basis(space);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto v = oracle::corners(mesh, static_cast<int>(c));
        const oracle::Lagrange p2(v, 2);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double m = 0, k = 0;
                for (const auto& p : oracle::cell_points(v, oracle::degree8())) {
                    m += p.w * p2.value(3 + i, p.x, p.y) * p2.value(3 + j, p.x, p.y);
                    const auto gi = p2.gradient(3 + i, p.x, p.y);
                    const auto gj = p2.gradient(3 + j, p.x, p.y);
                    k += p.w * (gi[0] * gj[0] + gi[1] * gj[1]);
                }
                CHECK(basis.mass(static_cast<int>(c))[i * 3 + j] == doctest::Approx(m).epsilon(1e-12));
                CHECK(basis.stiffness(static_cast<int>(c))[i * 3 + j]
                      == doctest::Approx(k).epsilon(1e-12).scale(1.0));
            }
    }
}

TEST_CASE("reference triangle with unit residual")
{
    // Reference triangle surrounded by neighbors so that all three bubbles are active.
    const Mesh mesh({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {-1, 1}, {1, -1}},
                    {{0, 1, 2}, {1, 3, 2}, {2, 4, 0}, {0, 5, 1}});
    const FeSpace space(mesh, 1);
    const BwBasis basis(space);
    REQUIRE(basis.dimension(0) == 3);
    CellResidual data;
    data.interior.fill(1.0);
    data.interior_facet = {true, true, true};
    const LocalSolution e = solve_local_bw(basis, 0, 1.0, data);

    const oracle::Lagrange p2(oracle::corners(mesh, 0), 2);
    std::vector<double> a(9, 0.0), rhs(3, 0.0);
    for (const auto& p : oracle::cell_points(oracle::corners(mesh, 0), oracle::duffy(10))) {
        for (int i = 0; i < 3; ++i) {
            rhs[i] += p.w * p2.value(3 + i, p.x, p.y);
            for (int j = 0; j < 3; ++j) {
                const auto gi = p2.gradient(3 + i, p.x, p.y);
                const auto gj = p2.gradient(3 + j, p.x, p.y);
                a[i * 3 + j] += p.w * (p2.value(3 + i, p.x, p.y) * p2.value(3 + j, p.x, p.y) + gi[0] * gj[0]
                                       + gi[1] * gj[1]);
            }
        }
    }
    for (int i = 0; i < 3; ++i)
        CHECK(rhs[i] == doctest::Approx(1.0 / 6.0));
    const auto ref = oracle::dense_solve(a, rhs);
    for (int i = 0; i < 3; ++i)
        CHECK(e[i] == doctest::Approx(ref[i]).epsilon(1e-13));

    CellResidual zero;
    zero.interior_facet = {true, true, true};
    CHECK(solve_local_bw(basis, 0, 1.0, zero) == LocalSolution{0, 0, 0});
}

TEST_CASE("residual data")
{
    const Mesh mesh = unit_square_mesh(4);
    const FeSpace space(mesh, 1);
    const std::vector<double> zero(space.num_dofs(), 0.0);
    const ScalarField no_data = [](double, double) { return 0.0; };
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        const CellResidual r = local_residual_data(space, zero, 1.0, no_data, c);
        for (double v : r.interior)
            CHECK(v == 0.0);
        for (double j : r.jump)
            CHECK(j == 0.0);
    }

    // Affine u: no jumps, interior residual is f - u pointwise.
    const ScalarField affine = [](double x, double y) { return 0.3 - x + 2 * y; };
    const ScalarField f = [](double x, double y) { return std::exp(x) * y; };
    const std::vector<double> u = interpolate(space, affine);
    const QuadratureRule& rule = triangle_degree4();
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        const CellResidual r = local_residual_data(space, u, 5.0, f, c);
        for (int k = 0; k < 3; ++k) {
            CHECK(std::abs(r.jump[k]) < 1e-12);
            CHECK(r.interior_facet[k] == !mesh.facets()[mesh.cell_facet(c, k)].on_boundary());
        }
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point p = map_to_cell(mesh, c, rule.points[q]);
            CHECK(r.interior[q] == doctest::Approx(f(p.x, p.y) - affine(p.x, p.y)).epsilon(1e-13));
        }
    }
}

TEST_CASE("jump of a kinked function")
{
    // u = -x^2/2 interpolated on two columns of cells: the slope drops by 1 across x = 1.
    const Mesh mesh({{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}, {2, 1}}, {{0, 1, 4}, {0, 4, 3}, {1, 2, 5}, {1, 5, 4}});
    const FeSpace space(mesh, 1);
    std::vector<double> u;
    for (const Point& p : mesh.vertices())
        u.push_back(-p.x * p.x / 2);
    const ScalarField f = [](double, double) { return 0.0; };
    for (double c : {1.0, 3.5}) {
        const CellResidual left = local_residual_data(space, u, c, f, 0);
        const CellResidual right = local_residual_data(space, u, c, f, 3);
        // Edge (1,0)-(1,1) is local edge 0 of cell 0 and local edge 1 of cell 3.
        CHECK(left.jump[0] == doctest::Approx(c));
        CHECK(right.jump[1] == doctest::Approx(c));
        // The diagonals separate cells with equal gradients.
        CHECK(left.jump[1] == doctest::Approx(0.0));
        CHECK(right.jump[2] == doctest::Approx(0.0));
        CHECK_FALSE(left.interior_facet[2]);
    }
}

TEST_CASE("jumps agree from both sides")
{
    const Mesh mesh = refine(unit_square_mesh(3), MarkedSet{{2, 9}, 0.5}).mesh;
    const FeSpace space(mesh, 1);
    const std::vector<double> u = interpolate(space, [](double x, double y) { return std::sin(3 * x) * y * y; });
    const ScalarField f = [](double, double) { return 1.0; };
    for (std::size_t fi = 0; fi < mesh.num_facets(); ++fi) {
        const Facet& facet = mesh.facets()[fi];
        if (facet.on_boundary())
            continue;
        double values[2];
        for (int side = 0; side < 2; ++side) {
            const int c = facet.cells[side];
            const CellResidual r = local_residual_data(space, u, 2.0, f, c);
            for (int k = 0; k < 3; ++k)
                if (mesh.cell_facet(c, k) == static_cast<int>(fi))
                    values[side] = r.jump[k];
        }
        CHECK(values[0] == values[1]);
    }
}

TEST_CASE("quadratics are recovered exactly on a parallel patch")
{
    const Mesh mesh = unit_square_mesh(8);
    const FeSpace space(mesh, 1);
    const BwBasis basis(space);
    const ScalarField u_exact = [](double x, double y) { return x * x + 0.3 * x * y - 0.7 * y * y; };
    const double laplacian = 2.0 - 1.4;
    const std::vector<double> u = interpolate(space, u_exact);

    // every neighbour is the point reflection of the cell through the shared edge midpoint
    auto parallel_patch = [&](int cell) {
        const auto& v = mesh.cell(cell);
        for (int k = 0; k < 3; ++k) {
            const Facet& facet = mesh.facets()[mesh.cell_facet(cell, k)];
            if (facet.on_boundary())
                return false;
            const int other = facet.cells[0] == cell ? facet.cells[1] : facet.cells[0];
            const Point& a = mesh.vertex(v[(k + 1) % 3]);
            const Point& b = mesh.vertex(v[(k + 2) % 3]);
            const Point& o = mesh.vertex(v[k]);
            bool found = false;
            for (int w : mesh.cell(other))
                found = found || (std::abs(mesh.vertex(w).x - (a.x + b.x - o.x)) < 1e-12
                                  && std::abs(mesh.vertex(w).y - (a.y + b.y - o.y)) < 1e-12);
            if (!found)
                return false;
        }
        return true;
    };
    int checked = 0;
    for (int cell = 0; cell < static_cast<int>(mesh.num_cells()); ++cell)
        checked += parallel_patch(cell) ? 1 : 0;
    CHECK(checked >= 32);

    for (double c : {1.0, 40.0}) {
        const ScalarField f = [&](double x, double y) { return u_exact(x, y) - c * laplacian; };
        for (int cell = 0; cell < static_cast<int>(mesh.num_cells()); ++cell) {
            if (!parallel_patch(cell))
                continue;
            const LocalSolution e = solve_local_bw(basis, cell, c, local_residual_data(space, u, c, f, cell));
            const auto& v = mesh.cell(cell);
            for (int k = 0; k < 3; ++k) {
                const Point& a = mesh.vertex(v[(k + 1) % 3]);
                const Point& b = mesh.vertex(v[(k + 2) % 3]);
                const double bump = u_exact((a.x + b.x) / 2, (a.y + b.y) / 2)
                                    - (u_exact(a.x, a.y) + u_exact(b.x, b.y)) / 2;
                CHECK(e[k] == doctest::Approx(bump).epsilon(1e-9).scale(1e-6));
            }
        }
    }
}

TEST_CASE("local solutions are linear in the data")
{
    const Mesh mesh = unit_square_mesh(3);
    const FeSpace space(mesh, 1);
    const BwBasis basis(space);
    const int cell = 8;
    REQUIRE(basis.dimension(cell) == 3);
    CellResidual a, b, sum;
    for (int q = 0; q < 6; ++q) {
        a.interior[q] = std::sin(q + 1.0);
        b.interior[q] = std::cos(2.0 * q);
    }
    a.jump = {0.3, -0.2, 0.9};
    b.jump = {-1.1, 0.4, 0.05};
    a.interior_facet = b.interior_facet = sum.interior_facet = {true, true, true};
    for (int q = 0; q < 6; ++q)
        sum.interior[q] = 2.0 * a.interior[q] - b.interior[q];
    for (int k = 0; k < 3; ++k)
        sum.jump[k] = 2.0 * a.jump[k] - b.jump[k];
    const LocalSolution ea = solve_local_bw(basis, cell, 0.8, a);
    const LocalSolution eb = solve_local_bw(basis, cell, 0.8, b);
    const LocalSolution es = solve_local_bw(basis, cell, 0.8, sum);
    for (int k = 0; k < 3; ++k)
        CHECK(es[k] == doctest::Approx(2.0 * ea[k] - eb[k]).epsilon(1e-12));
}

TEST_CASE("fractional accumulation")
{
    const Mesh mesh = unit_square_mesh(4);
    const FeSpace space(mesh, 1);
    const BwBasis basis(space);
    const RationalScheme scheme = truncated_scheme(0.5, 0.26, 2, 2);
    const Problem problem = quadratic_problem();
    const QuadratureSamples f = sample_at_quadrature(mesh, problem.f);
    const ParametricAssembler assembler(space, f);
    std::vector<std::vector<LocalSolution>> per_l;
    for (std::size_t i = 0; i < scheme.size(); ++i) {
        const CgResult u = solve_cg(assembler.system(scheme.diffusion[i]));
        per_l.push_back(parametric_bw_solutions(basis, u.x, scheme.diffusion[i], f));
    }
    const ErrorField field = accumulate_fractional(scheme, per_l, basis);

    // Pythagorean identity and nonnegativity.
    double sum = 0;
    for (double eta : field.local) {
        CHECK(eta >= 0.0);
        sum += eta * eta;
    }
    CHECK(std::abs(field.global * field.global - sum) <= 1e-12 * sum);

    // Inactive bubbles carry no weight.
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        for (int k = 0; k < 3; ++k)
            if (!basis.active(static_cast<int>(c), k))
                CHECK(field.coefficients[c][k] == 0.0);

    // Streaming accumulation in two partial sums gives the same field.
    FractionalAccumulator low(basis), high(basis);
    for (std::size_t i = 0; i < scheme.size(); ++i)
        (i < 3 ? low : high).add(scheme.weights[i], per_l[i]);
    low.merge(high);
    const ErrorField merged = low.finish();
    CHECK(merged.global == doctest::Approx(field.global).epsilon(1e-14));

    // Scaling.
    for (double alpha : {0.0, 0.5, 3.0}) {
        auto scaled = per_l;
        for (auto& level : scaled)
            for (auto& e : level)
                for (double& v : e)
                    v *= alpha;
        const ErrorField s = accumulate_fractional(scheme, scaled, basis);
        CHECK(s.global == doctest::Approx(alpha * field.global).epsilon(1e-13));
        for (std::size_t c = 0; c < mesh.num_cells(); ++c)
            CHECK(s.local[c] == doctest::Approx(alpha * field.local[c]).epsilon(1e-13).scale(1e-300));
    }

    // A single l = 0 term scales the l = 0 indicators by its weight.
    const RationalScheme single = truncated_scheme(0.5, 0.26, 0, 0);
    const std::vector<std::vector<LocalSolution>> only_zero{per_l[scheme.position_of(0)]};
    const ErrorField one = accumulate_fractional(single, only_zero, basis);
    const ErrorField plain = error_field_from_coefficients(basis, per_l[scheme.position_of(0)]);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        CHECK(one.local[c] == doctest::Approx(single.weights[0] * plain.local[c]).epsilon(1e-13).scale(1e-300));

    // Zero local solutions give a zero field.
    std::vector<std::vector<LocalSolution>> zeros(scheme.size(),
                                                  std::vector<LocalSolution>(mesh.num_cells(), LocalSolution{}));
    const ErrorField nothing = accumulate_fractional(scheme, zeros, basis);
    CHECK(nothing.global == 0.0);

    // Mismatched inputs.
    CHECK_THROWS_AS(accumulate_fractional(scheme, only_zero, basis), DomainError);
    std::vector<LocalSolution> short_level(3);
    FractionalAccumulator acc(basis);
    CHECK_THROWS_AS(acc.add(1.0, short_level), DomainError);
    const Mesh other_mesh = unit_square_mesh(4);
    const FeSpace other_space(other_mesh, 1);
    const BwBasis other(other_space);
    FractionalAccumulator foreign(other);
    CHECK_THROWS_AS(acc.merge(foreign), DomainError);
}

TEST_CASE("locality of the local problems")
{
    const Mesh mesh = unit_square_mesh(4);
    const FeSpace space(mesh, 1);
    const BwBasis basis(space);
    const std::vector<double> u = interpolate(space, [](double x, double y) { return x * (1 - x) * y * (1 - y); });
    const ScalarField f = [](double x, double y) { return 2 * (x * (1 - x) + y * (1 - y)); };
    std::vector<CellResidual> data;
    std::vector<LocalSolution> base;
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        data.push_back(local_residual_data(space, u, 1.0, f, c));
        base.push_back(solve_local_bw(basis, c, 1.0, data.back()));
    }
    const ErrorField before = error_field_from_coefficients(basis, base);
    const int target = 13;
    data[target].interior[2] += 0.5;
    std::vector<LocalSolution> changed;
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c)
        changed.push_back(solve_local_bw(basis, c, 1.0, data[c]));
    const ErrorField after = error_field_from_coefficients(basis, changed);
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        if (c == target) {
            CHECK(after.local[c] != before.local[c]);
        } else {
            CHECK(after.local[c] == before.local[c]);
            CHECK(changed[c] == base[c]);
        }
    }
}

TEST_CASE("exactness on zero residual")
{
    const Problem zero = zero_problem();
    const Mesh mesh = unit_square_mesh(4);
    const FractionalSolution sol = fractional_solve(zero, build_scheme(0.5, 0.26, 1.0), mesh);
    CHECK(sol.error.global == 0.0);
    for (double v : sol.u)
        CHECK(v == 0.0);
}

TEST_CASE("indicators respect the square's symmetries")
{
    const Problem problem = sines2d();
    const Mesh mesh = unit_square_mesh(6, problem.side);
    const FractionalSolution sol = fractional_solve(problem, build_scheme(0.5, 0.26, 1.0), mesh);
    std::map<std::pair<long, long>, int> by_center;
    auto key = [](Point p) { return std::pair<long, long>{std::lround(p.x * 1e8), std::lround(p.y * 1e8)}; };
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c)
        by_center[key(centroid(mesh, c))] = c;
    const double pi = problem.side;
    const std::function<Point(Point)> maps[] = {
        [&](Point p) { return Point{pi - p.x, p.y}; },
        [&](Point p) { return Point{p.x, pi - p.y}; },
        [&](Point p) { return Point{p.y, p.x}; },
        [&](Point p) { return Point{pi - p.y, pi - p.x}; },
    };
    for (const auto& map : maps)
        for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
            const auto it = by_center.find(key(map(centroid(mesh, c))));
            REQUIRE(it != by_center.end());
            CHECK(sol.error.local[it->second] == doctest::Approx(sol.error.local[c]).epsilon(1e-10));
        }
}

TEST_CASE("brute-force dense recomputation")
{
    const Problem problem = quadratic_problem();
    const Mesh mesh = two_level_square();
    REQUIRE(mesh.num_cells() <= 64);
    const RationalScheme scheme = truncated_scheme(0.5, 0.26, 3, 3);
    const FractionalSolution sol = fractional_solve(problem, scheme, mesh);
    const oracle::BwResult ref = oracle::bank_weiser(mesh, scheme, problem.f);
    CHECK(std::abs(sol.error.global - ref.global) <= 1e-10 * ref.global);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        CHECK(sol.error.local[c] == doctest::Approx(ref.local[c]).epsilon(1e-9).scale(1e-12));
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
        CHECK(sol.u[v] == doctest::Approx(ref.fractional_u[v]).epsilon(1e-10).scale(1e-8));
}

}
