"""Invariant coefficients, metric parameters, and the classical trajectory.

The model is H(t) = p^2 / 2m(t) + i f(t) x with hbar = 1.  A linear invariant
I(t) = a0 (x - i alpha/2) + b(t) (p - i beta/2) + c0 with real constant a0, c0
exists when

    b(t)    = b0 - a0 * int_0^t dt'/m(t'),
    beta(t) = beta0 - 2 * int_0^t f(t') dt',
    alpha(t)= alpha0 + int_0^t beta(t')/m(t') dt',

and the associated similarity weight is exp[beta x - alpha p].  All closed
forms downstream divide by b(t), so the usable horizon is clipped away from
its first root t*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, ValidityWindowError
from .profiles import (
    CumulativeIntegral,
    Profile,
    TimeGrid,
    cumulative_integral,
    nested_integral,
    parse_profile,
)

# fraction of the b-root time the horizon may use
VALIDITY_MARGIN = 0.95

_SEED_FIELDS = ("a0", "b0", "c0", "alpha0", "beta0", "d", "d0", "i0", "t_max")


@dataclass(frozen=True)
class Scenario:
    """Physical problem statement: profiles, invariant seeds, packet shape.

    Consistency relations tie the packet to the invariant: the packet center
    x0 equals d0, the momentum p0 equals -c0/b0, and the mean invariant
    eigenvalue obeys i0 = a0*d0.  They are enforced at validation unless
    explicitly overridden for exploration.
    """

    mass: Profile
    drive: Profile
    a0: float = 1.0
    b0: float = 2.0
    c0: float = -2.0
    alpha0: float = 0.0
    beta0: float = 0.0
    d: float = 1.0
    d0: float = 1.0
    i0: float = 1.0
    t_max: float = 1.8
    n_steps: int = 4096
    hbar: float = 1.0

    @property
    def x0(self):
        return self.d0

    @property
    def p0(self):
        return -self.c0 / self.b0

    def validate(self, override_consistency: bool = False):
        for name in _SEED_FIELDS:
            v = getattr(self, name)
            if isinstance(v, complex):
                raise ConfigError(f"scenario seed {name} must be real, got {v!r}")
            if not math.isfinite(float(v)):
                raise ConfigError(f"scenario seed {name} must be finite")
        if self.hbar != 1.0:
            raise ConfigError("hbar is fixed to 1")
        if self.b0 == 0.0:
            raise ConfigError("b0 must be nonzero")
        if not self.d > 0.0:
            raise ConfigError("packet sharpness d must be positive")
        if self.t_max <= 0.0:
            raise ConfigError("t_max must be positive")
        if self.n_steps < 2:
            raise ConfigError("n_steps must be >= 2")
        if not override_consistency:
            scale = max(1.0, abs(self.a0 * self.d0))
            if abs(self.i0 - self.a0 * self.d0) > 1e-12 * scale:
                raise ConfigError(
                    f"inconsistent packet parameters: i0={self.i0} != a0*d0="
                    f"{self.a0 * self.d0}; pass override_consistency to keep them"
                )
        return self


def reference_scenario(drive: str = "cosine:1.0,1.0", **overrides) -> Scenario:
    """The shipped default: m=1, a0=d=d0=1, b0=2, horizon 1.8."""
    return Scenario(
        mass=parse_profile("constant:1.0"),
        drive=parse_profile(drive),
        **overrides,
    )


@dataclass(frozen=True)
class InvariantCoefficients:
    a0: float
    b0: float
    c0: float
    b_of_t: object  # callable t -> b(t)


@dataclass(frozen=True)
class MetricParams:
    alpha0: float
    beta0: float
    alpha_of_t: object
    beta_of_t: object


@dataclass(frozen=True)
class ClassicalTrajectory:
    x0: float
    p0: float
    x_of_t: object  # callable, complex
    p_of_t: object


class ScenarioTables:
    """All shared time-tabulated coefficients for one scenario run.

    Built once per run on the scenario's TimeGrid; every closed form reads
    from these tables (cubic interpolation between nodes).
    """

    def __init__(self, scenario: Scenario, override_consistency: bool = False):
        scenario.validate(override_consistency)
        self.scenario = scenario
        self.override_consistency = override_consistency
        self.grid = TimeGrid(0.0, scenario.t_max, scenario.n_steps)
        m, f = scenario.mass, scenario.drive
        nodes = self.grid.nodes

        m_nodes = np.asarray(m(nodes), dtype=float)
        if np.any(m_nodes <= 0.0):
            t_bad = nodes[m_nodes <= 0.0][0]
            raise ConfigError(f"mass profile must stay positive; m({t_bad}) <= 0")

        # M(t) = int 1/m, F(t) = int f
        self.inv_mass_int = cumulative_integral(lambda t: 1.0 / np.asarray(m(t)), self.grid)
        self.drive_int = cumulative_integral(f, self.grid)

        self.t_star = self._locate_b_root()
        if self.t_star is not None and scenario.t_max > VALIDITY_MARGIN * self.t_star:
            raise ValidityWindowError(
                f"b(t) = b0 - a0*int dt/m vanishes at t* = {self.t_star:.6g}; "
                f"the horizon must satisfy t_max <= {VALIDITY_MARGIN * self.t_star:.6g} "
                f"(requested {scenario.t_max})",
                t_star=self.t_star,
            )

        # N(t) = int (1/m) int f  (imaginary part of the classical path)
        self.drive_double_int = nested_integral(
            f, lambda t: 1.0 / np.asarray(m(t)), self.grid
        )
        # alpha(t) = alpha0 + int beta/m with beta(t) = beta0 - 2 F(t)
        self.alpha_int = cumulative_integral(
            lambda t: (scenario.beta0 - 2.0 * self.drive_int(t)) / np.asarray(m(t)),
            self.grid,
        )
        # J(t) = int 1/(2 m b^2) drives the width; K(t) is the metric phase
        self.spread_int = cumulative_integral(
            lambda t: 1.0 / (2.0 * np.asarray(m(t)) * self.b(t) ** 2), self.grid
        )
        self.metric_phase_int = cumulative_integral(
            lambda t: 0.25
            * (
                -2.0 * np.asarray(f(t)) * self.alpha(t)
                + self.beta(t) ** 2 / (2.0 * np.asarray(m(t)))
            ),
            self.grid,
        )

    def _locate_b_root(self):
        s = self.scenario
        if s.a0 == 0.0:
            return None

        # probe slightly past the horizon so a root just beyond t_max (inside
        # the margin) is still caught; table profiles may not extend, in
        # which case only the requested window can be searched
        from .errors import DomainError, NumericError

        try:
            grid = TimeGrid(0.0, s.t_max / VALIDITY_MARGIN, s.n_steps)
            m_int = cumulative_integral(
                lambda t: 1.0 / np.asarray(s.mass(t)), grid
            )
        except (DomainError, NumericError):
            grid, m_int = self.grid, self.inv_mass_int

        def b_of(t):
            return s.b0 - s.a0 * m_int(t)

        nodes = grid.nodes
        b_nodes = s.b0 - s.a0 * m_int.values
        sign0 = np.sign(b_nodes[0])
        crossing = np.nonzero(np.sign(b_nodes) != sign0)[0]
        if crossing.size == 0:
            return None
        k = crossing[0]
        return float(brentq(b_of, nodes[k - 1], nodes[k], xtol=1e-14, rtol=1e-15))

    # -- coefficient evaluators (scalar or array t) --------------------------

    def _check_t(self, t):
        ts = np.asarray(t)
        pad = 1e-12 * max(1.0, self.scenario.t_max)
        if np.any(ts < -pad) or np.any(ts > self.scenario.t_max + pad):
            from .errors import DomainError

            raise DomainError(
                f"time outside the tabulated horizon [0, {self.scenario.t_max}]"
            )
        return t

    def inv_mass(self, t):
        return self.inv_mass_int(self._check_t(t))

    def b(self, t):
        return self.scenario.b0 - self.scenario.a0 * self.inv_mass_int(self._check_t(t))

    def beta(self, t):
        return self.scenario.beta0 - 2.0 * self.drive_int(self._check_t(t))

    def alpha(self, t):
        return self.scenario.alpha0 + self.alpha_int(self._check_t(t))

    def spread(self, t):
        return self.spread_int(self._check_t(t))

    def metric_phase(self, t):
        return self.metric_phase_int(self._check_t(t))

    @property
    def b_nodes(self):
        return self.scenario.b0 - self.scenario.a0 * self.inv_mass_int.values

    @property
    def drive_is_zero(self):
        return self.scenario.drive.is_zero


def build_tables(scenario: Scenario, override_consistency: bool = False) -> ScenarioTables:
    return ScenarioTables(scenario, override_consistency)


def _as_tables(obj) -> ScenarioTables:
    return obj if isinstance(obj, ScenarioTables) else ScenarioTables(obj)


def build_coefficients(scenario) -> InvariantCoefficients:
    """Invariant coefficients: a, c constant, b(t) = b0 - a0 * int dt/m."""
    tables = _as_tables(scenario)
    s = tables.scenario
    return InvariantCoefficients(a0=s.a0, b0=s.b0, c0=s.c0, b_of_t=tables.b)


def build_metric(scenario) -> MetricParams:
    """Metric parameters: beta' = -2f and m alpha' = beta, from the seeds."""
    tables = _as_tables(scenario)
    s = tables.scenario
    return MetricParams(
        alpha0=s.alpha0, beta0=s.beta0, alpha_of_t=tables.alpha, beta_of_t=tables.beta
    )


def classical_trajectory(scenario) -> ClassicalTrajectory:
    """Complex classical path: p = p0 - i*int f, x = x0 + p0*int 1/m - i*int (1/m) int f."""
    tables = _as_tables(scenario)
    s = tables.scenario

    def p_of(t):
        return s.p0 - 1j * tables.drive_int(t)

    def x_of(t):
        return s.x0 + s.p0 * tables.inv_mass_int(t) - 1j * tables.drive_double_int(t)

    return ClassicalTrajectory(x0=s.x0, p0=s.p0, x_of_t=x_of, p_of_t=p_of)


def _fd4(values: np.ndarray, h: float) -> np.ndarray:
    """4th-order central first derivative on the interior (drops 2 nodes/side)."""
    return (values[:-4] - 8.0 * values[1:-3] + 8.0 * values[3:-1] - values[4:]) / (12.0 * h)


def constraint_residuals(tables: ScenarioTables):
    """Finite-difference check of the construction identities.

    Returns (max |b' + a0/m|, max |f + (alpha' a0 + beta' b - beta a0/m)/(2b)|)
    over the interior nodes of the shared grid.
    """
    s = tables.scenario
    nodes = tables.grid.nodes
    h = tables.grid.h
    interior = nodes[2:-2]
    m_i = np.asarray(s.mass(interior), dtype=float)
    f_i = np.asarray(s.drive(interior), dtype=float)

    b_nodes = tables.b_nodes
    beta_nodes = s.beta0 - 2.0 * tables.drive_int.values
    alpha_nodes = s.alpha0 + tables.alpha_int.values

    db = _fd4(b_nodes, h)
    dbeta = _fd4(beta_nodes, h)
    dalpha = _fd4(alpha_nodes, h)
    b_i = b_nodes[2:-2]
    beta_i = beta_nodes[2:-2]

    res_b = np.max(np.abs(db + s.a0 / m_i))
    res_f = np.max(
        np.abs(f_i + (dalpha * s.a0 + dbeta * b_i - beta_i * s.a0 / m_i) / (2.0 * b_i))
    )
    return float(res_b), float(res_f)


def phase_reality_residual(tables: ScenarioTables) -> float:
    """max |beta/m - alpha'| on the grid; zero means the eigenphase is real."""
    s = tables.scenario
    nodes = tables.grid.nodes
    h = tables.grid.h
    alpha_nodes = s.alpha0 + tables.alpha_int.values
    dalpha = _fd4(alpha_nodes, h)
    interior = nodes[2:-2]
    beta_i = s.beta0 - 2.0 * tables.drive_int.values[2:-2]
    m_i = np.asarray(s.mass(interior), dtype=float)
    return float(np.max(np.abs(beta_i / m_i - dalpha)))
