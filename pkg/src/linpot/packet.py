"""Invariant eigenfunctions, phases, the Gaussian packet, and its transforms.

The packet is assembled from eigenfunctions of the linear invariant weighted
by a Gaussian, and admits a fully closed form.  The same state transported to
the Hermitian picture (similarity weight rho = exp[(beta x - alpha p)/2]) has
a real Gaussian density; rho acts on entire functions as

    (rho psi)(x) = exp(i alpha beta / 8) * exp(beta x / 2) * psi(x + i alpha/2).

All closed forms here are entire in x, so the shifted argument is evaluated
symbolically (no numerical continuation).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import simpson

from .errors import (
    ConfigError,
    SingularityError,
    UnsupportedFieldError,
    WindowTooSmallError,
)
from .invariant import ScenarioTables
from .profiles import SpaceGrid

_B_TINY = 1e-12


@dataclass(frozen=True)
class ComplexField:
    """Complex amplitude sampled on a space grid at one time slice.

    `analytic`, when present, evaluates the same field at arbitrary (complex)
    argument and makes the field eligible for the similarity transform.
    """

    grid: SpaceGrid
    time: float
    values: np.ndarray
    analytic: object = None


@dataclass(frozen=True)
class LRPhase:
    """Real accompanying phase of one invariant eigenstate, mu(0) = 0."""

    lam: float
    mu_of_t: object

    def __call__(self, t):
        return self.mu_of_t(t)


def _b_checked(tables: ScenarioTables, t) -> float:
    b = tables.b(t)
    if abs(b) < _B_TINY:
        raise SingularityError(f"b(t) vanishes at t={t}")
    return b


def _maybe_scalar(x_in, out):
    if np.isscalar(x_in):
        return complex(out)
    return out


def eigenfunction(lam: float, x, t: float, tables: ScenarioTables):
    """Eigenfunction of the linear invariant at eigenvalue lam.

    phi_lam = (2 pi b)^(-1/2) exp{ (i/2b) [ (2(lam-c) + i beta b) X - a0 X^2 ] }
    with X = x - i alpha/2.  Accepts scalar/array, real or complex x.
    """
    s = tables.scenario
    b = _b_checked(tables, t)
    al = tables.alpha(t)
    be = tables.beta(t)
    X = np.asarray(x, dtype=complex) - 0.5j * al
    expo = (0.5j / b) * ((2.0 * (lam - s.c0) + 1j * be * b) * X - s.a0 * X * X)
    out = np.exp(expo) / np.sqrt(2.0 * np.pi * b + 0j)
    return _maybe_scalar(x, out)


def eigen_residual(lam: float, t: float, tables: ScenarioTables, grid: SpaceGrid | None = None) -> float:
    """Relative residual of the invariant eigenvalue equation.

    The momentum is realized as -i times a 4th-order central difference on a
    sampled eigenfunction; returns max |I phi - lam phi| / max |phi| over the
    interior nodes.
    """
    s = tables.scenario
    if grid is None:
        grid = SpaceGrid(-6.0, 6.0, 4097)
    b = _b_checked(tables, t)
    al = tables.alpha(t)
    be = tables.beta(t)
    xs = grid.xs
    phi = eigenfunction(lam, xs, t, tables)
    dx = grid.dx
    dphi = (phi[:-4] - 8.0 * phi[1:-3] + 8.0 * phi[3:-1] - phi[4:]) / (12.0 * dx)
    xi = xs[2:-2]
    phii = phi[2:-2]
    ivals = (
        s.a0 * (xi - 0.5j * al) * phii
        + b * (-1j * dphi - 0.5j * be * phii)
        + s.c0 * phii
    )
    return float(np.max(np.abs(ivals - lam * phii)) / np.max(np.abs(phi)))


def lr_phase(lam: float, t, tables: ScenarioTables):
    """Accompanying real phase mu_lam(t) = -(lam-c)^2 J(t) - K(t)."""
    _b_checked(tables, np.max(np.atleast_1d(t)))
    c0 = tables.scenario.c0
    return -((lam - c0) ** 2) * tables.spread(t) - tables.metric_phase(t)


def lr_phase_function(lam: float, tables: ScenarioTables) -> LRPhase:
    return LRPhase(lam, lambda t: lr_phase(lam, t, tables))


def weight(lam, scenario) -> complex:
    """Spectral weight as stated for the packet construction.

    g(lam) = sqrt( sqrt(d) / (pi sqrt(2 pi) b0) ) * exp[-d (lam-I0)^2]
             * exp[-i (d0/b0)(lam - I0/2)]

    Note: this g carries squared mass 1/(2 pi b0) under the metric inner
    product; synthesis uses normalized_weight so the packet has unit norm.
    """
    s = getattr(scenario, "scenario", scenario)
    amp = np.sqrt(np.sqrt(s.d) / (np.pi * np.sqrt(2.0 * np.pi) * s.b0))
    lams = np.asarray(lam)  # real spectrum; synthesis may shift it off-axis
    out = (
        amp
        * np.exp(-s.d * (lams - s.i0) ** 2)
        * np.exp(-1j * (s.d0 / s.b0) * (lams - 0.5 * s.i0))
    )
    return _maybe_scalar(lam, out)


def normalized_weight(lam, scenario):
    """weight() rescaled by sqrt(2 pi b0) so that int |g|^2 dlam = 1."""
    s = getattr(scenario, "scenario", scenario)
    return np.sqrt(2.0 * np.pi * s.b0) * weight(lam, s)


def _packet_pieces(tables: ScenarioTables, t: float):
    s = tables.scenario
    b = _b_checked(tables, t)
    return (
        b,
        tables.alpha(t),
        tables.beta(t),
        tables.spread(t),
        tables.metric_phase(t),
        s.c0 - s.i0,  # eigenvalue offset of the packet center
    )


def packet_closed_form(x, t: float, tables: ScenarioTables, drop_metric_phase: bool = False):
    """Closed-form Gaussian packet in the non-Hermitian picture.

    With J = int 1/(2 m b^2), K the metric phase integral, D = c0 - I0 and
    X = x - i alpha/2:

        psi = sqrt( sqrt(d) / (sqrt(2 pi) b (d + iJ)) )
              * exp(-i J D^2) * exp(-i d0 I0 / 2 b0) * exp(-i K)
              * exp{ (i/2b) [ (-2 D + i beta b) X - a0 X^2 ] }
              * exp{ -(X - b W)^2 / (4 b^2 (d + iJ)) },   W = d0/b0 - 2 J D.

    `drop_metric_phase` omits the exp(-iK) factor (verification hook: the
    result then fails the Schroedinger equation by exactly |K'|).
    """
    s = tables.scenario
    b, al, be, J, K, D = _packet_pieces(tables, t)
    if drop_metric_phase:
        K = 0.0
    X = np.asarray(x, dtype=complex) - 0.5j * al
    A = s.d + 1j * J
    W = s.d0 / s.b0 - 2.0 * J * D
    pref = np.sqrt(np.sqrt(s.d) / (np.sqrt(2.0 * np.pi) * b * A))
    phase = np.exp(-1j * (J * D * D + 0.5 * s.d0 * s.i0 / s.b0 + K))
    osc = np.exp((0.5j / b) * ((-2.0 * D + 1j * be * b) * X - s.a0 * X * X))
    gauss = np.exp(-((X - b * W) ** 2) / (4.0 * b * b * A))
    return _maybe_scalar(x, pref * phase * osc * gauss)


def _auto_lambda_count(tables: ScenarioTables, t: float, x_abs_max: float, lam_lo: float, lam_hi: float) -> int:
    # resolve the fastest lambda-oscillation of the integrand: Simpson needs
    # k*h small; 0.02 keeps the quadrature error ~1e-9 of the packet scale
    s = tables.scenario
    J = tables.spread(t)
    b = abs(tables.b(t))
    reach = max(abs(lam_lo - s.c0), abs(lam_hi - s.c0))
    k = 2.0 * J * reach + x_abs_max / b + abs(s.d0 / s.b0) + 1.0
    n = int(np.ceil((lam_hi - lam_lo) * k / 0.02))
    n = max(4097, n)
    return n if n % 2 == 1 else n + 1


def _synthesis_saddle(tables: ScenarioTables, t: float, x: float) -> complex:
    # stationary point (in lam - I0) of the full quadratic exponent of the
    # synthesis integrand at probe position x
    s = tables.scenario
    b = tables.b(t)
    al = tables.alpha(t)
    J = tables.spread(t)
    D = s.c0 - s.i0
    A = s.d + 1j * J
    B = al / (2.0 * b) + 1j * (x / b + 2.0 * J * D - s.d0 / s.b0)
    return B / (2.0 * A)


def packet_quadrature(
    x,
    t: float,
    tables: ScenarioTables,
    half_width: float | None = None,
    n_lambda: int | None = None,
    contour_shift: float | None = None,
):
    """Independent spectral synthesis of the packet.

    Simpson quadrature of g(lam) e^{i mu_lam} phi_lam with the unit-norm
    weight; the oracle the closed form is checked against.

    The integrand is entire in lam with uniform Gaussian decay, so the
    integral over any horizontal line Im(lam) = shift is identical (Cauchy);
    by default the line runs near the integrand's stationary point, where
    late times with a strong metric tilt stay well-conditioned in double
    precision.  The value is independent of the chosen shift.
    """
    s = tables.scenario
    if half_width is None:
        half_width = 10.0 / np.sqrt(2.0 * s.d)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    u_lo = _synthesis_saddle(tables, t, float(xs.min()))
    u_hi = _synthesis_saddle(tables, t, float(xs.max()))
    if contour_shift is None:
        contour_shift = float(np.imag(0.5 * (u_lo + u_hi)))
    # the real-axis window must cover the nominal center and the saddles
    lam_lo = s.i0 + min(0.0, float(np.real(u_lo)), float(np.real(u_hi))) - half_width
    lam_hi = s.i0 + max(0.0, float(np.real(u_lo)), float(np.real(u_hi))) + half_width
    if n_lambda is None:
        n_lambda = _auto_lambda_count(
            tables, t, float(np.max(np.abs(xs))), lam_lo, lam_hi
        )
    lam_r = np.linspace(lam_lo, lam_hi, n_lambda)
    lam = lam_r + 1j * contour_shift

    g = normalized_weight(lam, s)
    mus = -((lam - s.c0) ** 2) * tables.spread(t) - tables.metric_phase(t)
    spectral = g * np.exp(1j * mus)

    out = np.empty(xs.shape, dtype=complex)
    peak = 0.0
    edge = 0.0
    block = max(1, int(2e6) // n_lambda)
    for i0 in range(0, xs.size, block):
        xb = xs[i0 : i0 + block]
        phi = eigenfunction(lam[:, None], xb[None, :], t, tables)
        integ = spectral[:, None] * phi
        out[i0 : i0 + block] = simpson(integ, x=lam_r, axis=0)
        mags = np.abs(integ)
        peak = max(peak, float(mags.max()))
        edge = max(edge, float(mags[0].max()), float(mags[-1].max()))
    if edge > 1e-10 * peak:
        raise WindowTooSmallError(
            f"eigenvalue window [{lam_lo:.3g}, {lam_hi:.3g}] clips the integrand "
            f"(boundary/peak = {edge / peak:.3e})"
        )
    if np.isscalar(x):
        return complex(out[0])
    return out


def dyson_factor(t: float, tables: ScenarioTables):
    """(alpha, beta, constant phase) of the similarity transform at time t."""
    al = tables.alpha(t)
    be = tables.beta(t)
    return al, be, np.exp(0.125j * al * be)


def dyson_apply(fn, x, t: float, tables: ScenarioTables):
    """Apply the similarity weight to an entire function of x."""
    al, be, ph = dyson_factor(t, tables)
    xs = np.asarray(x, dtype=float)
    out = ph * np.exp(0.5 * be * xs) * fn(xs + 0.5j * al)
    return _maybe_scalar(x, out)


def dyson_transform(field: ComplexField, tables: ScenarioTables) -> ComplexField:
    """Hermitian-picture version of a field.

    Requires an analytically continuable field (all closed forms here are);
    a purely sampled field is accepted only for the identity metric.
    """
    t = field.time
    al, be, ph = dyson_factor(t, tables)
    if field.analytic is None:
        if al == 0.0 and be == 0.0:
            return replace(field, values=field.values.copy())
        raise UnsupportedFieldError(
            "similarity transform of a sampled field needs an analytic model"
        )
    fn = field.analytic
    vals = ph * np.exp(0.5 * be * field.grid.xs) * fn(field.grid.xs + 0.5j * al)
    return ComplexField(
        grid=field.grid,
        time=t,
        values=vals,
        analytic=lambda z, _fn=fn, _al=al, _be=be, _ph=ph: _ph
        * np.exp(0.5 * _be * np.asarray(z, dtype=complex))
        * _fn(np.asarray(z, dtype=complex) + 0.5j * _al),
    )


def hermitian_packet(x, t: float, tables: ScenarioTables):
    """rho applied to the closed-form packet (the exp(beta x/2) factor cancels)."""
    return dyson_apply(lambda z: packet_closed_form(z, t, tables), x, t, tables)


def hermitian_eigenfunction(lam: float, x, t: float, tables: ScenarioTables):
    """rho phi_lam in closed form; |.| is x-independent (metric factors cancel)."""
    s = tables.scenario
    b = _b_checked(tables, t)
    _, _, ph = dyson_factor(t, tables)
    xs = np.asarray(x, dtype=complex)
    out = (
        ph
        * np.exp((1j / b) * (lam - s.c0) * xs - (0.5j * s.a0 / b) * xs * xs)
        / np.sqrt(2.0 * np.pi * b + 0j)
    )
    return _maybe_scalar(x, out)


def packet_center(t, tables: ScenarioTables):
    """Center of the Hermitian-picture density: x0 + p0 * int dt/m."""
    s = tables.scenario
    return s.x0 + s.p0 * tables.inv_mass(t)


def packet_width(t, tables: ScenarioTables):
    """Position spread: (b/sqrt(d)) * sqrt(d^2 + J^2)."""
    s = tables.scenario
    b = tables.b(t)
    J = tables.spread(t)
    return np.abs(b) / np.sqrt(s.d) * np.hypot(s.d, J)


def density(x, t, tables: ScenarioTables):
    """Hermitian-picture probability density |rho psi|^2 (unit mass).

    A real Gaussian with center x0 + p0*int dt/m and the packet width; valid
    for metric seeds alpha0 = beta0 = 0.
    """
    s = tables.scenario
    if s.alpha0 != 0.0 or s.beta0 != 0.0:
        raise ConfigError("density requires metric seeds alpha0 = beta0 = 0")
    _b_checked(tables, np.max(np.atleast_1d(t)))
    xbar = packet_center(t, tables)
    w = packet_width(t, tables)
    xs = np.asarray(x, dtype=float)
    out = np.exp(-((xs - xbar) ** 2) / (2.0 * w * w)) / (np.sqrt(2.0 * np.pi) * w)
    if np.isscalar(x) and np.isscalar(t):
        return float(out)
    return out


def sample_packet(tables: ScenarioTables, grid: SpaceGrid, t: float) -> ComplexField:
    """Closed-form packet sampled on a grid, carrying its analytic model."""
    fn = lambda z: packet_closed_form(z, t, tables)
    return ComplexField(grid=grid, time=t, values=np.asarray(fn(grid.xs)), analytic=fn)


def auto_space_grid(
    tables: ScenarioTables,
    t,
    pad_sigmas: float = 12.0,
    n_points: int = 16385,
) -> SpaceGrid:
    """Grid spanning the density support (center +/- pad_sigmas widths) at times t."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    centers = np.array([packet_center(tt, tables) for tt in ts])
    widths = np.array([packet_width(tt, tables) for tt in ts])
    lo = float(np.min(centers - pad_sigmas * widths))
    hi = float(np.max(centers + pad_sigmas * widths))
    return SpaceGrid(lo, hi, n_points)
