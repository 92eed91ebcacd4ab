"""Time profiles m(t), f(t), grids, and cumulative Simpson quadrature.

Every time-dependent coefficient in the model is an iterated integral of the
mass and drive profiles.  This module owns profile evaluation and the
cumulative tables everything downstream is built from: composite Simpson per
step (midpoints sampled from the integrand itself, O(h^4) global), with cubic
interpolation of the tabulated cumulative between nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import ConfigError, DomainError, NumericError

PROFILE_KINDS = ("constant", "cosine", "polynomial", "table")


@dataclass(frozen=True, eq=False)
class Profile:
    """Scalar function of time: constant, cosine, polynomial or CSV table.

    constant:    params = (value,)
    cosine:      params = (amplitude, angular_frequency) -> amp * cos(w t)
    polynomial:  params = (c0, c1, ...) -> sum c_k t^k
    table:       monotone-cubic interpolation of sorted (t, value) pairs,
                 evaluable only inside the tabulated span
    """

    kind: str
    params: tuple = ()
    knots_t: np.ndarray | None = None
    knots_v: np.ndarray | None = None
    _interp: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ConfigError(f"unknown profile kind {self.kind!r}")
        if self.kind == "table":
            t, v = self.knots_t, self.knots_v
            if t is None or v is None or len(t) < 2:
                raise ConfigError("table profile needs at least two (t, value) rows")
            if np.any(np.diff(t) <= 0):
                raise ConfigError("table profile times must be strictly increasing")
            object.__setattr__(self, "_interp", PchipInterpolator(t, v))

    def __call__(self, t):
        return eval_profile(self, t)

    @property
    def is_zero(self):
        """True when the profile is identically zero (Hermitian-limit drive)."""
        if self.kind in ("constant", "cosine", "polynomial"):
            return all(p == 0.0 for p in self.params) or (
                self.kind == "cosine" and self.params[0] == 0.0
            )
        return bool(np.all(self.knots_v == 0.0))

    def spec_string(self):
        if self.kind == "table":
            return "table:<inline>"
        return self.kind + ":" + ",".join(repr(float(p)) for p in self.params)


def eval_profile(profile: Profile, t):
    """Evaluate a profile at scalar or array t."""
    ts = np.asarray(t, dtype=float)
    if profile.kind == "constant":
        out = np.full_like(ts, profile.params[0])
    elif profile.kind == "cosine":
        amp, omega = profile.params
        out = amp * np.cos(omega * ts)
    elif profile.kind == "polynomial":
        out = np.polynomial.polynomial.polyval(ts, profile.params)
    else:
        lo, hi = profile.knots_t[0], profile.knots_t[-1]
        if np.any(ts < lo) or np.any(ts > hi):
            raise DomainError(
                f"table profile evaluated outside its span [{lo}, {hi}]"
            )
        out = profile._interp(ts)
    if np.isscalar(t):
        return float(out)
    return out


def parse_profile(spec: str, base_dir: Path | None = None) -> Profile:
    """Parse a profile string like 'constant:1.0' or 'cosine:1.0,1.0'."""
    kind, sep, rest = spec.strip().partition(":")
    kind = kind.strip()
    if not sep or kind not in PROFILE_KINDS:
        raise ConfigError(
            f"bad profile spec {spec!r}; expected one of "
            "constant:<v> | cosine:<amp>,<omega> | polynomial:<c0>,... | table:<path.csv>"
        )
    if kind == "table":
        path = Path(rest.strip())
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return load_table_profile(path)
    try:
        params = tuple(float(x) for x in rest.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad numeric parameters in profile spec {spec!r}") from exc
    if kind == "constant" and len(params) != 1:
        raise ConfigError("constant profile takes exactly one value")
    if kind == "cosine" and len(params) != 2:
        raise ConfigError("cosine profile takes amplitude,angular_frequency")
    if kind == "polynomial" and len(params) < 1:
        raise ConfigError("polynomial profile needs at least one coefficient")
    return Profile(kind, params)


def load_table_profile(path: Path) -> Profile:
    """Load a two-column CSV (t, value) as a table profile."""
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read table profile {path}") from exc
    except ValueError:
        # tolerate a single header row
        data = np.loadtxt(path, delimiter=",", comments="#", skiprows=1, ndmin=2)
    if data.shape[1] != 2:
        raise ConfigError(f"table profile {path} must have two columns t,value")
    return Profile("table", (), knots_t=data[:, 0].copy(), knots_v=data[:, 1].copy())


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid on [t_start, t_end] with n_steps steps."""

    t_start: float
    t_end: float
    n_steps: int

    def __post_init__(self):
        if self.n_steps < 2:
            raise ConfigError("TimeGrid needs n_steps >= 2")
        if not self.t_end > self.t_start:
            raise ConfigError("TimeGrid needs t_end > t_start")

    @property
    def h(self):
        return (self.t_end - self.t_start) / self.n_steps

    @property
    def nodes(self):
        return np.linspace(self.t_start, self.t_end, self.n_steps + 1)


@dataclass(frozen=True)
class SpaceGrid:
    """Uniform space grid; the packet support must sit strictly inside."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 256:
            raise ConfigError("SpaceGrid needs n_points >= 256")
        if not self.x_max > self.x_min:
            raise ConfigError("SpaceGrid needs x_max > x_min")

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def xs(self):
        return np.linspace(self.x_min, self.x_max, self.n_points)


class CumulativeIntegral:
    """Cumulative integral from t_start, tabulated at grid nodes.

    values[k] = integral of the integrand from t_start to node k, with
    values[0] = 0.  Calling the object evaluates the cubic interpolant of the
    tabulated cumulative (the shared convention for every coefficient table).
    """

    def __init__(self, grid: TimeGrid, values: np.ndarray):
        self.grid = grid
        self.values = values
        self._spline = CubicSpline(grid.nodes, values)

    def __call__(self, t):
        out = self._spline(t)
        return float(out) if np.isscalar(t) else out

    @property
    def end_value(self):
        return float(self.values[-1])


def _check_finite(samples, times):
    bad = ~np.isfinite(samples)
    if bad.any():
        t_bad = float(np.asarray(times)[bad][0])
        raise NumericError(f"integrand is non-finite at t={t_bad!r}", t=t_bad)


def cumulative_integral(integrand, grid: TimeGrid) -> CumulativeIntegral:
    """Composite Simpson cumulative of a callable integrand.

    One Simpson panel per grid step; the midpoint sample comes from the
    integrand itself (profiles and splines are evaluable anywhere), so the
    global error is O(h^4) for smooth integrands.
    """
    t = grid.nodes
    mid = t[:-1] + 0.5 * grid.h
    f_nodes = np.asarray(integrand(t), dtype=float)
    f_mid = np.asarray(integrand(mid), dtype=float)
    _check_finite(f_nodes, t)
    _check_finite(f_mid, mid)
    inc = (grid.h / 6.0) * (f_nodes[:-1] + 4.0 * f_mid + f_nodes[1:])
    values = np.concatenate(([0.0], np.cumsum(inc)))
    return CumulativeIntegral(grid, values)


def nested_integral(inner, outer_weight, grid: TimeGrid) -> CumulativeIntegral:
    """Cumulative of outer_weight(t') * (integral of inner up to t').

    The inner cumulative is tabulated first; the outer pass applies the same
    Simpson scheme with midpoints read from the inner table's interpolant.
    """
    inner_cum = cumulative_integral(inner, grid)
    return cumulative_integral(
        lambda t: np.asarray(outer_weight(t), dtype=float) * inner_cum(t), grid
    )
