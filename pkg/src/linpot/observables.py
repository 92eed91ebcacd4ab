"""Metric expectation values, uncertainties, and normalization.

Closed forms:

    <x>  = d0 - (c0/b0) int dt/m + i alpha/2      (= classical x)
    <p>  = -c0/b0 + i beta/2                      (= classical p)
    Dx   = (b/sqrt(d)) sqrt(d^2 + J^2),           J = int dt/(2 m b^2)
    DxDp = sqrt(1/4 + [ M/(4 b0 d b) - a0 Dx^2 / b ]^2) >= 1/2

The quadrature route evaluates the same moments on the Hermitian-picture
field, where variances are manifestly real: <O>_metric = <rho psi| O' |rho psi>
with x' = x + i alpha/2 and p' = p + i beta/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import GridCoverageError
from .invariant import ScenarioTables
from .packet import auto_space_grid, hermitian_packet, packet_center, packet_width
from .profiles import SpaceGrid


@dataclass(frozen=True)
class MomentReport:
    """Expectation values and spreads of one time slice."""

    t: float
    x_eta: complex
    p_eta: complex
    dx: float
    dp: float
    product: float
    norm: float


def _uncertainties(tables: ScenarioTables, t):
    s = tables.scenario
    b = tables.b(t)
    J = tables.spread(t)
    M = tables.inv_mass(t)
    dx = np.abs(b) / np.sqrt(s.d) * np.hypot(s.d, J)
    bracket = M / (4.0 * s.b0 * s.d * b) - s.a0 * dx**2 / b
    product = np.hypot(0.5, bracket)
    return dx, product / dx, product


def moments_closed_form(t: float, tables: ScenarioTables) -> MomentReport:
    """Closed-form moment report at time t."""
    s = tables.scenario
    b = tables.b(t)
    J = tables.spread(t)
    x_eta = s.d0 - (s.c0 / s.b0) * tables.inv_mass(t) + 0.5j * tables.alpha(t)
    p_eta = -s.c0 / s.b0 + 0.5j * tables.beta(t)
    dx, dp, product = _uncertainties(tables, t)
    # |prefactor|^2 * sqrt(2 pi) * Dx; identically 1 in exact arithmetic
    norm = (
        np.sqrt(s.d)
        / (np.sqrt(2.0 * np.pi) * np.abs(b) * np.abs(s.d + 1j * J))
        * np.sqrt(2.0 * np.pi)
        * dx
    )
    return MomentReport(
        t=float(t),
        x_eta=complex(x_eta),
        p_eta=complex(p_eta),
        dx=float(dx),
        dp=float(dp),
        product=float(product),
        norm=float(norm),
    )


def _coverage_check(dens: np.ndarray):
    peak = float(dens.max())
    if max(dens[0], dens[-1]) > 1e-12 * peak:
        raise GridCoverageError(
            "space grid does not cover the packet support "
            f"(boundary/peak density = {max(dens[0], dens[-1]) / peak:.3e})"
        )


def moments_quadrature(
    t: float, tables: ScenarioTables, grid: SpaceGrid | None = None
) -> MomentReport:
    """Moment report from real-space quadrature on the Hermitian-picture field.

    p-moments use 4th-order central differences with the boundary rows
    dropped from the quadrature; serves as the oracle for the closed forms.
    """
    if grid is None:
        grid = auto_space_grid(tables, t)
    xs = grid.xs
    dx_g = grid.dx
    rho = np.asarray(hermitian_packet(xs, t, tables))
    dens = np.abs(rho) ** 2
    _coverage_check(dens)

    norm = simpson(dens, x=xs)
    xm = simpson(xs * dens, x=xs) / norm
    x2 = simpson(xs * xs * dens, x=xs) / norm

    d1 = (rho[:-4] - 8.0 * rho[1:-3] + 8.0 * rho[3:-1] - rho[4:]) / (12.0 * dx_g)
    d2 = (
        -rho[:-4] + 16.0 * rho[1:-3] - 30.0 * rho[2:-2] + 16.0 * rho[3:-1] - rho[4:]
    ) / (12.0 * dx_g * dx_g)
    xi = xs[2:-2]
    ci = np.conj(rho[2:-2])
    pm = simpson(ci * (-1j) * d1, x=xi) / norm
    p2 = simpson(ci * (-d2), x=xi) / norm

    al = tables.alpha(t)
    be = tables.beta(t)
    dx_val = np.sqrt(max(float(np.real(x2 - xm * xm)), 0.0))
    dp_val = np.sqrt(max(float(np.real(p2 - pm * pm)), 0.0))
    return MomentReport(
        t=float(t),
        x_eta=complex(xm + 0.5j * al),
        p_eta=complex(pm + 0.5j * be),
        dx=dx_val,
        dp=dp_val,
        product=dx_val * dp_val,
        norm=float(norm),
    )


def normalization(t: float, tables: ScenarioTables, grid: SpaceGrid | None = None) -> float:
    """Quadrature of the Hermitian-picture density; 1 on the validity window."""
    if grid is None:
        grid = auto_space_grid(tables, t)
    xs = grid.xs
    dens = np.abs(np.asarray(hermitian_packet(xs, t, tables))) ** 2
    _coverage_check(dens)
    return float(simpson(dens, x=xs))


def uncertainty_series(tables: ScenarioTables, times: np.ndarray | None = None):
    """Closed-form moment series on the shared grid (or the given times).

    Returns a dict of arrays: t, x_eta, p_eta, dx2, dp2, product, norm.
    """
    s = tables.scenario
    if times is None:
        times = tables.grid.nodes
        M = tables.inv_mass_int.values
        J = tables.spread_int.values
        b = tables.b_nodes
        alpha = s.alpha0 + tables.alpha_int.values
        beta = s.beta0 - 2.0 * tables.drive_int.values
    else:
        times = np.asarray(times, dtype=float)
        M = tables.inv_mass(times)
        J = tables.spread(times)
        b = tables.b(times)
        alpha = tables.alpha(times)
        beta = tables.beta(times)
    x_eta = s.d0 - (s.c0 / s.b0) * M + 0.5j * alpha
    p_eta = -s.c0 / s.b0 + 0.5j * beta
    dx2 = b * b / s.d * (s.d**2 + J**2)
    bracket = M / (4.0 * s.b0 * s.d * b) - s.a0 * dx2 / b
    product = np.hypot(0.5, bracket)
    dp2 = product**2 / dx2
    norm = (
        np.sqrt(s.d)
        / (np.abs(b) * np.hypot(s.d, J))
        * np.sqrt(dx2)
    )
    return {
        "t": times,
        "x_eta": x_eta,
        "p_eta": p_eta,
        "dx2": dx2,
        "dp2": dp2,
        "product": product,
        "norm": norm,
    }


__all__ = [
    "MomentReport",
    "moments_closed_form",
    "moments_quadrature",
    "normalization",
    "uncertainty_series",
    "packet_center",
    "packet_width",
]
