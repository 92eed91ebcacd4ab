"""Full verification suite: every closed form against an independent oracle.

Sections:
  analytic    construction identities, eigen-residuals, spectral synthesis
              vs closed form, moment/normalization quadrature, bound checks,
              drive-independence, Schroedinger finite-difference residual
  propagation Crank-Nicolson match, step-halving convergence, norm drifts
  innerprod   regularized Fresnel vs closed form, delta dichotomy

Each check records (value, threshold, direction, passed); the suite passes
only if every check does.
"""

from __future__ import annotations

import numpy as np

from . import innerprod, observables, propagation
from .invariant import (
    ScenarioTables,
    classical_trajectory,
    constraint_residuals,
    phase_reality_residual,
    reference_scenario,
)
from .packet import (
    eigen_residual,
    packet_closed_form,
    packet_quadrature,
    packet_width,
    density,
)
from .profiles import parse_profile

ALL_SECTIONS = ("analytic", "propagation", "innerprod")

NORM_PROBE_TIMES = (0.0, 0.5, 1.0, 1.5, 1.8)


class CheckList:
    def __init__(self):
        self.checks = []

    def add(self, name, value, threshold, mode="le"):
        value = float(value)
        if mode == "le":
            ok = value <= threshold
        elif mode == "ge":
            ok = value >= threshold
        elif mode == "range":
            ok = threshold[0] <= value <= threshold[1]
        else:
            raise ValueError(mode)
        self.checks.append(
            {
                "name": name,
                "value": value,
                "threshold": threshold,
                "mode": mode,
                "passed": bool(ok),
            }
        )
        return ok

    def as_list(self):
        return self.checks

    @property
    def all_pass(self):
        return all(c["passed"] for c in self.checks)


def _probe_times(t_max, fracs=(0.0, 0.28, 0.56, 0.83, 1.0)):
    return tuple(t_max * f for f in fracs)


def _random_scenarios(seed, count=5):
    """Random constant masses in [0.5, 2] with random cosine drives."""
    from .invariant import Scenario

    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        m = rng.uniform(0.5, 2.0)
        amp = rng.uniform(-1.5, 1.5)
        omega = rng.uniform(0.3, 3.0)
        scen = Scenario(
            mass=parse_profile(f"constant:{m}"),
            drive=parse_profile(f"cosine:{amp},{omega}"),
            t_max=min(1.8, 0.9 * 2.0 * m),  # inside the b-root window b0*m/a0
        )
        out.append(scen)
    return out


def _analytic_checks(cl: CheckList, tables: ScenarioTables, seed: int, corrupt_phase: bool):
    s = tables.scenario
    t_max = s.t_max

    res_b, res_f = constraint_residuals(tables)
    cl.add("constraint_residual_b", res_b, 1e-6)
    cl.add("constraint_residual_drive", res_f, 1e-6)
    cl.add("phase_reality_residual", phase_reality_residual(tables), 1e-8)

    worst = 0.0
    for lam in (0.0, 1.0):
        for t in (0.0, min(1.0, 0.55 * t_max)):
            worst = max(worst, eigen_residual(lam, t, tables))
    cl.add("eigen_residual", worst, 1e-6)

    # spectral synthesis vs closed form on a 41 x 10 probe grid
    times = np.linspace(0.0, t_max, 10)
    peak = 0.0
    diff = 0.0
    for t in times:
        xc = observables.packet_center(t, tables)
        w = packet_width(t, tables)
        xs = np.linspace(xc - 5.0 * w, xc + 5.0 * w, 41)
        closed = np.asarray(packet_closed_form(xs, t, tables))
        quad = np.asarray(packet_quadrature(xs, t, tables))
        peak = max(peak, float(np.max(np.abs(closed))))
        diff = max(diff, float(np.max(np.abs(closed - quad))))
    cl.add("packet_synthesis_relerr", diff / peak, 1e-6)

    # quadrature moments vs closed forms
    worst = 0.0
    for t in _probe_times(t_max):
        mc = observables.moments_closed_form(t, tables)
        mq = observables.moments_quadrature(t, tables)
        worst = max(
            worst,
            abs(mc.x_eta - mq.x_eta),
            abs(mc.p_eta - mq.p_eta),
            abs(mc.dx - mq.dx),
            abs(mc.dp - mq.dp),
            abs(mc.product - mq.product),
            abs(mc.norm - mq.norm),
        )
    cl.add("moments_quadrature_maxerr", worst, 1e-5)

    norm_err = max(
        abs(observables.normalization(t, tables) - 1.0) for t in _probe_times(t_max)
    )
    cl.add("normalization_maxerr", norm_err, 1e-8)

    # classical correspondence on the full grid
    traj = classical_trajectory(tables)
    series = observables.uncertainty_series(tables)
    ts = series["t"]
    cl.add(
        "classical_x_maxerr",
        np.max(np.abs(series["x_eta"] - traj.x_of_t(ts))),
        1e-9,
    )
    cl.add(
        "classical_p_maxerr",
        np.max(np.abs(series["p_eta"] - traj.p_of_t(ts))),
        1e-9,
    )

    # uncertainty bound, reference + randomized scenarios
    cl.add("product_min_reference", float(np.min(series["product"])), 0.5 - 1e-12, "ge")
    pmin = np.inf
    for scen in _random_scenarios(seed):
        tb = ScenarioTables(scen)
        pmin = min(pmin, float(np.min(observables.uncertainty_series(tb)["product"])))
    cl.add("product_min_randomized", pmin, 0.5 - 1e-12, "ge")

    # width series against its closed form, and the two pinned products
    b_arr = tables.b_nodes
    J_arr = tables.spread_int.values
    dx2_formula = b_arr * b_arr / s.d * (s.d**2 + J_arr**2)
    cl.add(
        "fig_dx2_series_maxerr",
        np.max(np.abs(series["dx2"] - dx2_formula)),
        1e-9,
    )
    m0 = observables.moments_closed_form(0.0, tables)
    m1 = observables.moments_closed_form(1.0, tables)
    cl.add("product_t0_err", abs(m0.product - np.sqrt(17.0) / 2.0), 1e-9)
    cl.add("product_t1_err", abs(m1.product - 1.0625), 1e-9)

    # Ehrenfest relations by finite differences of the closed-form series
    h = tables.grid.h
    x_arr = series["x_eta"]
    p_arr = series["p_eta"]
    dxdt = (x_arr[:-4] - 8 * x_arr[1:-3] + 8 * x_arr[3:-1] - x_arr[4:]) / (12 * h)
    dpdt = (p_arr[:-4] - 8 * p_arr[1:-3] + 8 * p_arr[3:-1] - p_arr[4:]) / (12 * h)
    ti = ts[2:-2]
    m_i = np.asarray(s.mass(ti), dtype=float)
    f_i = np.asarray(s.drive(ti), dtype=float)
    cl.add("ehrenfest_x_maxerr", np.max(np.abs(dxdt - p_arr[2:-2] / m_i)), 1e-6)
    cl.add("ehrenfest_p_maxerr", np.max(np.abs(dpdt + 1j * f_i)), 1e-6)

    # drive-independence of widths and density
    if not tables.drive_is_zero:
        zero = ScenarioTables(
            type(s)(mass=s.mass, drive=parse_profile("constant:0.0"), t_max=s.t_max,
                    a0=s.a0, b0=s.b0, c0=s.c0, d=s.d, d0=s.d0, i0=s.i0,
                    n_steps=s.n_steps)
        )
        series0 = observables.uncertainty_series(zero)
        fdiff = max(
            float(np.max(np.abs(series["dx2"] - series0["dx2"]))),
            float(np.max(np.abs(series["dp2"] - series0["dp2"]))),
            float(np.max(np.abs(series["product"] - series0["product"]))),
        )
        for t in _probe_times(t_max):
            xs = np.linspace(-10.0, 10.0, 301)
            fdiff = max(
                fdiff,
                float(np.max(np.abs(density(xs, t, tables) - density(xs, t, zero)))),
            )
        cl.add("drive_independence_maxdiff", fdiff, 1e-8)

    # Schroedinger residual of the closed form (the corrupt hook drops the
    # metric phase, which must be caught)
    probes = tuple(t_max * f for f in (0.14, 0.42, 0.69))
    res = propagation.tdse_residual(tables, probes, drop_metric_phase=corrupt_phase)
    cl.add("tdse_fd_residual", res.max_pointwise_error, 1e-5)


def _propagation_checks(cl: CheckList, tables: ScenarioTables, cn_dx: float, cn_dt: float, backend):
    t_probe = min(1.0, 0.55 * tables.scenario.t_max)
    grid = propagation.cn_space_grid(tables, t_probe, dx=cn_dx)
    res = propagation.propagate_tdse(
        tables, grid, t_probe, propagation.PropagatorConfig(dt=cn_dt, backend=backend)
    )
    cl.add("cn_l2_error", propagation.l2_relative_error(res.fields[-1], tables), 5e-4)

    eta_drift = np.max(np.abs(res.eta_norms / res.eta_norms[0] - 1.0))
    cl.add("eta_norm_drift", eta_drift, 5e-3)
    if not tables.drive_is_zero:
        l2_drift = abs(res.l2_sq_norms[-1] / res.l2_sq_norms[0] - 1.0)
        cl.add("l2_norm_drift", l2_drift, 1e-3, "ge")

    ratio, fields = propagation.convergence_ratio(
        tables, grid, t_probe, dts=(4.0 * cn_dt, 2.0 * cn_dt, cn_dt), backend=backend
    )
    cl.add("cn_convergence_ratio", ratio, (3.5, 4.5), "range")

    # Hermitian control: zero drive in the constant-coefficient frame (a0=0),
    # where the closed form reduces to the textbook spreading free Gaussian
    s = tables.scenario
    free = ScenarioTables(
        type(s)(mass=s.mass, drive=parse_profile("constant:0.0"), t_max=s.t_max,
                a0=0.0, b0=1.0, c0=-0.5, d=4.0, d0=1.0, i0=0.0, n_steps=s.n_steps)
    )
    fgrid = propagation.cn_space_grid(free, t_probe, dx=cn_dx)
    fres = propagation.propagate_tdse(
        free, fgrid, t_probe, propagation.PropagatorConfig(dt=cn_dt, backend=backend)
    )
    cl.add("cn_free_l2_error", propagation.l2_relative_error(fres.fields[-1], free), 1e-4)


def _innerprod_checks(cl: CheckList, tables: ScenarioTables):
    s = tables.scenario
    t = 0.0
    worst = 0.0
    for lam_p, lam in ((s.i0, s.i0), (s.i0 + 1.0, s.i0 - 0.5)):
        closed = innerprod.pt_inner_product(lam_p, lam, t, tables)
        quad = innerprod.pt_inner_product_quadrature(lam_p, lam, t, tables)
        worst = max(worst, abs(closed - quad) / abs(closed))
    cl.add("fresnel_quadrature_relerr", worst, 1e-6)

    mag_err = abs(
        abs(innerprod.pt_inner_product(s.i0, s.i0, t, tables))
        - innerprod.pt_magnitude(t, tables)
    )
    cl.add("pt_magnitude_err", mag_err, 1e-12)
    mag_spread = abs(
        abs(innerprod.pt_inner_product(s.i0 + 5.0, s.i0, t, tables))
        - abs(innerprod.pt_inner_product(s.i0, s.i0, t, tables))
    )
    cl.add("pt_magnitude_separation_dependence", mag_spread, 1e-6)

    report = innerprod.delta_dichotomy_report(s.i0, s.i0, t, tables)
    cl.add("pt_smeared_deviation", report.pt_smeared_deviation, 0.5, "ge")
    cl.add("eta_smeared_relerr", report.eta_smeared_error, 1e-6)
    off = innerprod.delta_dichotomy_report(s.i0, s.i0 + 0.3, t, tables)
    cl.add("eta_smeared_offset_relerr", off.eta_smeared_error, 1e-6)
    return report


def run_verification(
    scenario=None,
    *,
    sections=ALL_SECTIONS,
    corrupt_phase: bool = False,
    backend: str | None = None,
    cn_dx: float = 0.01,
    cn_dt: float = 1e-4,
    seed: int = 20260810,
) -> dict:
    """Run the requested verification sections and build the report dict."""
    from . import __version__

    if scenario is None:
        scenario = reference_scenario()
    tables = scenario if isinstance(scenario, ScenarioTables) else ScenarioTables(scenario)

    cl = CheckList()
    verdicts = {}
    if "analytic" in sections:
        _analytic_checks(cl, tables, seed, corrupt_phase)
    if "propagation" in sections:
        _propagation_checks(cl, tables, cn_dx, cn_dt, backend)
    if "innerprod" in sections:
        report = _innerprod_checks(cl, tables)
        verdicts = {
            "pt_is_delta_like": report.pt_is_delta_like,
            "eta_is_delta_like": report.eta_is_delta_like,
            "pt_magnitude": report.pt_magnitude,
        }

    return {
        "tool_version": __version__,
        "backend": backend or propagation.DEFAULT_BACKEND,
        "sections": list(sections),
        "hermitian_limit": bool(tables.drive_is_zero),
        "corrupt_phase_injected": bool(corrupt_phase),
        "checks": cl.as_list(),
        "verdicts": verdicts,
        "all_pass": cl.all_pass,
    }
