#pragma once

#include <cstddef>
#include <vector>

namespace fraclap {

/// Sinc-quadrature rational approximation of lambda^{-s}:
///
///   Q(lambda) = sum_{l=-M}^{N} w_l / (1 + c_l * lambda),
///   w_l = 2 kappa sin(pi s) / pi * exp(2 s l kappa),   c_l = exp(2 l kappa),
///
/// the trapezoidal rule with step kappa applied to
/// lambda^{-s} = 2 sin(pi s) / pi * int exp(2 s y) / (1 + exp(2 y) lambda) dy.
///
/// Each index l corresponds to one reaction-diffusion problem
/// (u, v) + c_l (grad u, grad v) = (f, v). Entries of `weights` and
/// `diffusion` are stored in ascending l, position i holding l = i - m_neg.
struct RationalScheme {
    double s = 0.5;
    double kappa = 0.26;
    double lambda0 = 1.0;
    int m_neg = 0;
    int n_pos = 0;
    std::vector<double> weights;
    std::vector<double> diffusion;

    std::size_t size() const { return weights.size(); }
    int index_at(std::size_t i) const { return static_cast<int>(i) - m_neg; }
    std::size_t position_of(int l) const { return static_cast<std::size_t>(l + m_neg); }
};

/// Full scheme with M = ceil(pi^2 / (4 s kappa^2)) and N = ceil(pi^2 / (4 (1-s) kappa^2)).
RationalScheme build_scheme(double s, double kappa, double lambda0);

/// Same weights and coefficients, restricted to l = -m_neg..n_pos. Used for
/// small verification runs; the uniform error bound does not hold for it.
RationalScheme truncated_scheme(double s, double kappa, int m_neg, int n_pos, double lambda0 = 1.0);

/// Q(lambda), summed in ascending l. Throws DomainError for lambda < lambda0.
double evaluate_q(const RationalScheme& scheme, double lambda);

/// Uniform bound on |lambda^{-s} - Q(lambda)| for lambda >= lambda0.
double epsilon_bound(double s, double kappa, double lambda0);

/// Largest kappa in [0.02, 1] (50 bisection steps) with
/// epsilon_bound(s, kappa, lambda0) * f_norm <= tol.
double choose_kappa(double s, double lambda0, double f_norm, double tol);

} // namespace fraclap
