"""Independent time-domain oracle: Crank-Nicolson propagation and residuals.

The closed-form packet is checked two ways: (a) direct finite-difference
residual of i d/dt psi = H psi on a refined stencil, and (b) marching the
t=0 packet with Crank-Nicolson and comparing at later times.  The stepping
kernel is compiled (Cython) when available, with a scipy banded-solve
fallback selected at import.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .errors import ConfigError, GridCoverageError, InstabilityError
from .invariant import ScenarioTables
from .packet import ComplexField, packet_closed_form, sample_packet
from .profiles import SpaceGrid

from . import _cn_py

try:
    from . import _cn_cy
except ImportError:  # pragma: no cover - build-dependent
    _cn_cy = None

_BACKENDS = {"python": _cn_py}
if _cn_cy is not None:
    _BACKENDS["cython"] = _cn_cy

DEFAULT_BACKEND = "cython" if _cn_cy is not None else "python"


def available_backends():
    return tuple(sorted(_BACKENDS))


def get_backend(name: str | None = None):
    name = name or DEFAULT_BACKEND
    try:
        return name, _BACKENDS[name]
    except KeyError:
        raise ConfigError(
            f"unknown stepping backend {name!r}; available: {available_backends()}"
        ) from None


@dataclass(frozen=True)
class PropagatorConfig:
    """Crank-Nicolson settings: time step, drift abort, backend choice."""

    dt: float
    eta_drift_abort: float = 0.10
    n_checkpoints: int = 9
    backend: str | None = None

    def validate(self, grid: SpaceGrid):
        if not self.dt > 0.0:
            raise ConfigError("dt must be positive")
        if self.dt > grid.dx:
            raise ConfigError(
                f"dt = {self.dt} exceeds dx = {grid.dx}; refine the time step"
            )


@dataclass
class PropagationResult:
    backend: str
    grid: SpaceGrid
    fields: list  # ComplexField at the requested sample times (final included)
    check_times: np.ndarray
    eta_norms: np.ndarray
    l2_sq_norms: np.ndarray


def l2_sq_norm(values: np.ndarray, grid: SpaceGrid) -> float:
    return float(simpson(np.abs(values) ** 2, x=grid.xs))


def eta_norm(
    values: np.ndarray,
    grid: SpaceGrid,
    t: float,
    tables: ScenarioTables,
    p_halfwidth: float = 25.0,
) -> float:
    """Metric norm int exp(-alpha p) |FT(exp(beta x/2) psi)|^2 dp of a sampled field.

    The symmetric splitting exp[beta x - alpha p] =
    exp(beta x/2) exp(-alpha p) exp(beta x/2) is exact (central commutator),
    so the norm needs only one FFT and a diagonal momentum weight.  The
    weight is applied on a window around the packet momentum; outside it the
    true integrand is below roundoff but the weight would amplify noise.
    """
    al = tables.alpha(t)
    be = tables.beta(t)
    xs = grid.xs
    # roundoff in the far tail would be amplified by the exp(beta x/2) weight
    # and the momentum tilt; taper the sub-roundoff samples away smoothly so
    # the cutoff itself leaks no spectrum (the true field there is
    # transcendentally small)
    amp = np.abs(values)
    ramp = np.clip((np.log10(amp / amp.max() + 1e-300) + 13.0) / 2.0, 0.0, 1.0)
    chi = np.exp(0.5 * be * xs) * values * (0.5 - 0.5 * np.cos(np.pi * ramp))
    n = grid.n_points
    chat = np.fft.fft(chi) * grid.dx / np.sqrt(2.0 * np.pi)
    p = 2.0 * np.pi * np.fft.fftfreq(n, d=grid.dx)
    p0 = tables.scenario.p0
    mask = np.abs(p - p0) <= p_halfwidth
    order = np.argsort(p[mask])
    ps = p[mask][order]
    integ = (np.exp(-al * ps) * np.abs(chat[mask][order]) ** 2)
    dp = 2.0 * np.pi / (n * grid.dx)
    # trim where the integrand first falls below threshold on each side of
    # the peak: the true integrand decays like a Gaussian there, while the
    # exponential weight would re-amplify pure roundoff further out
    peak = int(np.argmax(integ))
    floor = 1e-12 * float(integ[peak])
    right = np.nonzero(integ[peak:] < floor)[0]
    left = np.nonzero(integ[: peak + 1] < floor)[0]
    if right.size == 0 or left.size == 0:
        raise GridCoverageError("momentum window too small for the metric norm")
    sl = slice(int(left[-1]), peak + int(right[0]) + 1)
    return float(np.sum(integ[sl]) * dp)


def cn_space_grid(tables: ScenarioTables, t_final: float, dx: float = 0.01) -> SpaceGrid:
    """Uniform grid covering the packet support (12 widths) over [0, t_final]."""
    from .packet import packet_center, packet_width

    ts = np.linspace(0.0, t_final, 65)
    centers = np.array([packet_center(t, tables) for t in ts])
    widths = np.array([packet_width(t, tables) for t in ts])
    lo = float(np.min(centers - 12.0 * widths))
    hi = float(np.max(centers + 12.0 * widths))
    n = int(np.ceil((hi - lo) / dx)) + 1
    return SpaceGrid(lo, lo + (n - 1) * dx, n)


def propagate_tdse(
    tables: ScenarioTables,
    grid: SpaceGrid,
    t_final: float,
    config: PropagatorConfig,
    sample_times: tuple = (),
) -> PropagationResult:
    """March the t=0 closed-form packet to t_final with Crank-Nicolson.

    The metric norm is monitored at checkpoints; a drift beyond the
    configured fraction aborts with a diagnostic.
    """
    config.validate(grid)
    name, backend = get_backend(config.backend)
    dt = config.dt
    n_total = t_final / dt
    if abs(n_total - round(n_total)) > 1e-9:
        raise ConfigError(f"t_final = {t_final} is not an integer number of steps of {dt}")
    n_total = int(round(n_total))

    marks = set(np.linspace(0.0, t_final, config.n_checkpoints))
    marks.update(float(t) for t in sample_times)
    mark_steps = sorted({int(round(t / dt)) for t in marks if 0.0 <= t <= t_final})
    if mark_steps[-1] != n_total:
        mark_steps.append(n_total)
    sample_steps = {int(round(float(t) / dt)) for t in sample_times}

    init = sample_packet(tables, grid, 0.0)
    psi = np.array(init.values, dtype=np.complex128)
    xs = grid.xs

    fields = []
    if 0 in sample_steps:
        fields.append(ComplexField(grid, 0.0, psi.copy()))
    check_times = [0.0]
    eta0 = eta_norm(psi, grid, 0.0, tables)
    etas = [eta0]
    l2s = [l2_sq_norm(psi, grid)]

    step = 0
    for target in mark_steps:
        if target == 0:
            continue
        k = np.arange(step, target)
        t_half = (k + 0.5) * dt
        m_half = np.asarray(tables.scenario.mass(t_half), dtype=float)
        f_half = np.asarray(tables.scenario.drive(t_half), dtype=float)
        backend.run(psi, xs, m_half, f_half, dt, grid.dx)
        step = target
        t_now = step * dt
        eta = eta_norm(psi, grid, t_now, tables)
        check_times.append(t_now)
        etas.append(eta)
        l2s.append(l2_sq_norm(psi, grid))
        if abs(eta / eta0 - 1.0) > config.eta_drift_abort:
            raise InstabilityError(
                f"metric norm drifted by {abs(eta / eta0 - 1.0):.3%} at t={t_now:.6g} "
                f"(dt={dt}, dx={grid.dx}); refine the discretization"
            )
        if step in sample_steps or (step == n_total and not sample_times):
            fields.append(ComplexField(grid, t_now, psi.copy()))

    if not fields or fields[-1].time != n_total * dt:
        fields.append(ComplexField(grid, n_total * dt, psi.copy()))

    return PropagationResult(
        backend=name,
        grid=grid,
        fields=fields,
        check_times=np.asarray(check_times),
        eta_norms=np.asarray(etas),
        l2_sq_norms=np.asarray(l2s),
    )


def l2_relative_error(field: ComplexField, tables: ScenarioTables) -> float:
    """Relative L2 distance of a propagated field from the closed form."""
    exact = np.asarray(packet_closed_form(field.grid.xs, field.time, tables))
    num = simpson(np.abs(field.values - exact) ** 2, x=field.grid.xs)
    den = simpson(np.abs(exact) ** 2, x=field.grid.xs)
    return float(np.sqrt(num / den))


@dataclass(frozen=True)
class ResidualReport:
    """Closed-form vs numerics mismatch summary."""

    times: tuple
    max_pointwise_error: float
    l2_relative_error: float | None = None


def tdse_residual(
    tables: ScenarioTables,
    probe_times=(0.25, 0.75, 1.25),
    n_probe_x: int = 17,
    h_x: float = 1e-3,
    h_t: float = 1e-3,
    drop_metric_phase: bool = False,
) -> ResidualReport:
    """Finite-difference residual max |i dpsi/dt - H psi| / max |psi|.

    4th-order central stencils in both t and x, evaluated on the closed form
    around each probe time across the packet support.
    """
    from .packet import packet_center, packet_width

    s = tables.scenario
    worst = 0.0
    offsets = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    w1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    w2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
    for t in probe_times:
        xc = packet_center(t, tables)
        wdt = packet_width(t, tables)
        xs = np.linspace(xc - 3.0 * wdt, xc + 3.0 * wdt, n_probe_x)
        # time derivative: 5 slices, each evaluated on the probe points
        slices = np.array(
            [
                packet_closed_form(xs, t + o * h_t, tables, drop_metric_phase)
                for o in offsets
            ]
        )
        dpsi_dt = np.tensordot(w1, slices, axes=(0, 0)) / h_t
        # space second derivative: 5 shifted copies at the probe time
        shifted = np.array(
            [
                packet_closed_form(xs + o * h_x, t, tables, drop_metric_phase)
                for o in offsets
            ]
        )
        d2psi = np.tensordot(w2, shifted, axes=(0, 0)) / (h_x * h_x)
        psi = shifted[2]
        m_t = float(np.asarray(s.mass(t)))
        f_t = float(np.asarray(s.drive(t)))
        hpsi = -d2psi / (2.0 * m_t) + 1j * f_t * xs * psi
        res = np.max(np.abs(1j * dpsi_dt - hpsi)) / np.max(np.abs(psi))
        worst = max(worst, float(res))
    return ResidualReport(times=tuple(probe_times), max_pointwise_error=worst)


def convergence_ratio(
    tables: ScenarioTables,
    grid: SpaceGrid,
    t_final: float,
    dts=(4e-4, 2e-4, 1e-4),
    backend: str | None = None,
):
    """Self-convergence ratio ||psi_4h - psi_2h|| / ||psi_2h - psi_h|| at t_final.

    On a fixed spatial grid the spatial error cancels in the differences, so
    the ratio isolates the time-stepping order (4 for a 2nd-order scheme).
    """
    fields = []
    for dt in dts:
        res = propagate_tdse(
            tables, grid, t_final, PropagatorConfig(dt=dt, backend=backend)
        )
        fields.append(res.fields[-1].values)
    d1 = np.sqrt(simpson(np.abs(fields[0] - fields[1]) ** 2, x=grid.xs))
    d2 = np.sqrt(simpson(np.abs(fields[1] - fields[2]) ** 2, x=grid.xs))
    return float(d1 / d2), fields
