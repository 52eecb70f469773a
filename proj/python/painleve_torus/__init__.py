"""Elliptic Painleve VI on the torus.

Indices ``n`` are 4-tuples; only (0, 0, 0, 0) and (1, 0, 0, 0) have explicit
solutions. ``tau`` is a complex number with positive imaginary part.
"""

from ._core import (
    EllipticContext,
    NumericError,
    critical_points,
    epvi_residual,
    gp_grad,
    hamiltonian_flow,
    monodromy,
    omega_membership,
    omega_scan,
    run_cli,
    set_max_threads,
    solution_p,
    synth,
    z_rs,
)


def hitchin_p(tau, r, s):
    """p on the torus from Hitchin's formula."""
    return solution_p(tau, r, s, (0, 0, 0, 0))


def okamoto_p(tau, r, s):
    """p for the (1, 0, 0, 0) solution."""
    return solution_p(tau, r, s, (1, 0, 0, 0))


__all__ = [
    "EllipticContext",
    "NumericError",
    "critical_points",
    "epvi_residual",
    "gp_grad",
    "hamiltonian_flow",
    "hitchin_p",
    "monodromy",
    "okamoto_p",
    "omega_membership",
    "omega_scan",
    "run_cli",
    "set_max_threads",
    "solution_p",
    "synth",
    "z_rs",
]
