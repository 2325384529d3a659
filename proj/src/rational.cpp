#include "fraclap/rational.hpp"

#include "fraclap/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace fraclap {

namespace {

void check_parameters(double s, double kappa, double lambda0)
{
    if (!(s > 0.0 && s < 1.0))
        throw DomainError("fractional power s must lie in (0,1), got " + std::to_string(s));
    if (!(kappa > 0.0))
        throw DomainError("kappa must be positive, got " + std::to_string(kappa));
    if (!(lambda0 > 0.0))
        throw DomainError("lambda0 must be positive, got " + std::to_string(lambda0));
}

RationalScheme make_scheme(double s, double kappa, double lambda0, int m_neg, int n_pos)
{
    RationalScheme scheme;
    scheme.s = s;
    scheme.kappa = kappa;
    scheme.lambda0 = lambda0;
    scheme.m_neg = m_neg;
    scheme.n_pos = n_pos;

    const double prefactor = 2.0 * kappa * std::sin(std::numbers::pi * s) / std::numbers::pi;
    const std::size_t count = static_cast<std::size_t>(m_neg) + static_cast<std::size_t>(n_pos) + 1;
    scheme.weights.reserve(count);
    scheme.diffusion.reserve(count);
    for (int l = -m_neg; l <= n_pos; ++l) {
        const double w = prefactor * std::exp(2.0 * s * l * kappa);
        const double c = std::exp(2.0 * l * kappa);
        if (!std::isfinite(w) || !std::isfinite(c) || !(w > 0.0) || !(c > 0.0))
            throw DomainError("rational scheme coefficients leave double range at l = " + std::to_string(l)
                              + " (kappa = " + std::to_string(kappa) + " too small)");
        if (!scheme.diffusion.empty() && !(c > scheme.diffusion.back()))
            throw DomainError("diffusion coefficients not strictly increasing at l = " + std::to_string(l));
        scheme.weights.push_back(w);
        scheme.diffusion.push_back(c);
    }
    return scheme;
}

} // namespace

RationalScheme build_scheme(double s, double kappa, double lambda0)
{
    check_parameters(s, kappa, lambda0);
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    const double m_real = std::ceil(pi2 / (4.0 * s * kappa * kappa));
    const double n_real = std::ceil(pi2 / (4.0 * (1.0 - s) * kappa * kappa));
    if (m_real > 1e7 || n_real > 1e7)
        throw DomainError("kappa too small: rational scheme would need more than 1e7 terms");
    return make_scheme(s, kappa, lambda0, static_cast<int>(m_real), static_cast<int>(n_real));
}

RationalScheme truncated_scheme(double s, double kappa, int m_neg, int n_pos, double lambda0)
{
    check_parameters(s, kappa, lambda0);
    if (m_neg < 0 || n_pos < 0)
        throw DomainError("truncated scheme index bounds must be nonnegative");
    return make_scheme(s, kappa, lambda0, m_neg, n_pos);
}

double evaluate_q(const RationalScheme& scheme, double lambda)
{
    if (!(lambda >= scheme.lambda0))
        throw DomainError("evaluate_q: lambda below the certified spectrum bound lambda0");
    double sum = 0.0;
    for (std::size_t i = 0; i < scheme.size(); ++i)
        sum += scheme.weights[i] / (1.0 + scheme.diffusion[i] * lambda);
    return sum;
}

double epsilon_bound(double s, double kappa, double lambda0)
{
    check_parameters(s, kappa, lambda0);
    const double decay = std::exp(-std::numbers::pi * std::numbers::pi / (2.0 * kappa));
    return 2.0 * std::sin(std::numbers::pi * s) / std::numbers::pi
           * (1.0 / (2.0 * s) + 1.0 / (2.0 * (1.0 - s) * lambda0))
           * (1.0 / (1.0 - decay) + 1.0) * decay;
}

double choose_kappa(double s, double lambda0, double f_norm, double tol)
{
    if (!(tol > 0.0))
        throw DomainError("choose_kappa: tolerance must be positive");
    if (!(f_norm >= 0.0))
        throw DomainError("choose_kappa: data norm must be nonnegative");
    constexpr double kappa_min = 0.02;
    constexpr double kappa_max = 1.0;
    auto admissible = [&](double kappa) { return epsilon_bound(s, kappa, lambda0) * f_norm <= tol; };

    if (admissible(kappa_max))
        return kappa_max;
    if (!admissible(kappa_min))
        throw DomainError("choose_kappa: tolerance unreachable even at kappa = 0.02");

    double lo = kappa_min;
    double hi = kappa_max;
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (admissible(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

} // namespace fraclap
