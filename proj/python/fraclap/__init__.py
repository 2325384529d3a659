"""Adaptive finite elements for the spectral fractional Laplacian on squares.

Thin wrapper around the C++ library: rational sinc-quadrature schemes,
crossed-diagonal meshes with newest-vertex bisection, and the adaptive
solve / Bank-Weiser estimate / Doerfler mark / refine loop.
"""

from ._fraclap import (
    DomainError,
    Mesh,
    RationalScheme,
    SolverError,
    build_scheme,
    choose_kappa,
    dorfler_mark,
    epsilon_bound,
    fractional_solve,
    refine,
    solve,
    truncated_scheme,
    uniform_refine,
    unit_square_mesh,
    validate,
)

__all__ = [
    "DomainError",
    "Mesh",
    "RationalScheme",
    "SolverError",
    "build_scheme",
    "choose_kappa",
    "dorfler_mark",
    "epsilon_bound",
    "fractional_solve",
    "refine",
    "solve",
    "truncated_scheme",
    "uniform_refine",
    "unit_square_mesh",
    "validate",
]
