#include <doctest.h>

#include "fraclap/quadrature.hpp"
#include "oracles/oracle.hpp"

#include <cmath>

using namespace fraclap;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Integral of x^a y^b over the reference triangle.
double monomial_integral(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

} // namespace

TEST_SUITE("quadrature") {

TEST_CASE("degree-4 rule")
{
    const QuadratureRule& rule = triangle_degree4();
    CHECK(rule.size() == 6);
    CHECK(rule.degree == 4);
    double total = 0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto& l = rule.points[q];
        CHECK(l[0] + l[1] + l[2] == doctest::Approx(1.0).epsilon(1e-15));
        for (double v : l)
            CHECK((v > 0.0 && v < 1.0));
        total += rule.weights[q];
    }
    CHECK(total == doctest::Approx(0.5).epsilon(1e-15));

    for (int a = 0; a <= 4; ++a)
        for (int b = 0; a + b <= 4; ++b) {
            double sum = 0;
            for (std::size_t q = 0; q < rule.size(); ++q)
                sum += rule.weights[q] * std::pow(rule.points[q][1], a) * std::pow(rule.points[q][2], b);
            CHECK(sum == doctest::Approx(monomial_integral(a, b)).epsilon(1e-14));
        }
    // Not exact at degree 6.
    double sum = 0;
    for (std::size_t q = 0; q < rule.size(); ++q)
        sum += rule.weights[q] * std::pow(rule.points[q][1], 6);
    CHECK(std::abs(sum - monomial_integral(6, 0)) > 1e-8);
}

TEST_CASE("oracle rules")
{
    const auto g = oracle::gauss_legendre(5);
    for (int p = 0; p <= 9; ++p) {
        double s = 0;
        for (std::size_t i = 0; i < g.x.size(); ++i)
            s += g.w[i] * std::pow(g.x[i], p);
        CHECK(s == doctest::Approx(1.0 / (p + 1)).epsilon(1e-14));
    }
    const auto& t = oracle::degree8();
    for (int a = 0; a <= 8; ++a)
        for (int b = 0; a + b <= 8; ++b) {
            double s = 0;
            for (std::size_t i = 0; i < t.w.size(); ++i)
                s += t.w[i] * std::pow(t.x[i][0], a) * std::pow(t.x[i][1], b);
            CHECK(s == doctest::Approx(monomial_integral(a, b)).epsilon(1e-13));
        }
}

}
