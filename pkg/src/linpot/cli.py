"""Run orchestration: config files, CSV artifacts, manifests, exit codes.

Commands:
  simulate   moment series + wavefunction slices for one scenario
  figures    width/product series and the density mesh as CSV
  verify     the full verification suite, persisted as a JSON report

Config files are INI-style with [scenario], [grids] and [output] sections;
all values have shipped defaults (the reference scenario).  CSV cells carry
17 significant digits so doubles round-trip bit-exactly.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__, observables, propagation, verify
from .errors import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_VALIDITY,
    EXIT_VERIFY,
    ConfigError,
    DomainError,
    LinpotError,
    UnsupportedFieldError,
    ValidityWindowError,
)
from .invariant import Scenario, ScenarioTables
from .packet import density, packet_closed_form
from .profiles import parse_profile

_SCENARIO_DEFAULTS = {
    "m": "constant:1.0",
    "f": "cosine:1.0,1.0",
    "a0": "1.0",
    "b0": "2.0",
    "c0": "-2.0",
    "alpha0": "0.0",
    "beta0": "0.0",
    "d": "1.0",
    "d0": "1.0",
    "i0": "1.0",
    "t_max": "1.8",
}
_GRID_DEFAULTS = {
    "time_steps": "4096",
    "space_points": "16385",
    "cn_dx": "0.01",
    "cn_dt": "1e-4",
}
_OUTPUT_DEFAULTS = {
    "psi_slices": "5",
    "fig_time_points": "361",
    "fig_space_points": "241",
}


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    space_points: int
    cn_dx: float
    cn_dt: float
    psi_slices: int
    fig_time_points: int
    fig_space_points: int
    override_consistency: bool = False
    raw: dict | None = None


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge file values over the shipped defaults, then CLI overrides."""
    parser = configparser.ConfigParser()
    parser.read_dict(
        {"scenario": _SCENARIO_DEFAULTS, "grids": _GRID_DEFAULTS, "output": _OUTPUT_DEFAULTS}
    )
    base_dir = Path.cwd()
    if path is not None:
        cfg_path = Path(path)
        if not cfg_path.is_file():
            raise ConfigError(f"config file not found: {path}")
        read = parser.read(cfg_path)
        if not read:
            raise ConfigError(f"cannot parse config file: {path}")
        base_dir = cfg_path.parent
        known = {
            "scenario": set(_SCENARIO_DEFAULTS),
            "grids": set(_GRID_DEFAULTS),
            "output": set(_OUTPUT_DEFAULTS),
        }
        for section in parser.sections():
            if section not in known:
                raise ConfigError(f"unknown config section [{section}]")
            extra = set(parser[section]) - known[section]
            if extra:
                raise ConfigError(f"unknown keys in [{section}]: {sorted(extra)}")

    overrides = overrides or {}
    for key, value in overrides.items():
        section, name = key
        if value is not None:
            parser[section][name] = str(value)

    sc = parser["scenario"]
    gr = parser["grids"]
    out = parser["output"]

    def _f(section, name):
        try:
            return float(section[name])
        except ValueError as exc:
            raise ConfigError(f"bad numeric value for {name}: {section[name]!r}") from exc

    def _i(section, name):
        try:
            return int(section[name])
        except ValueError as exc:
            raise ConfigError(f"bad integer value for {name}: {section[name]!r}") from exc

    scenario = Scenario(
        mass=parse_profile(sc["m"], base_dir),
        drive=parse_profile(sc["f"], base_dir),
        a0=_f(sc, "a0"),
        b0=_f(sc, "b0"),
        c0=_f(sc, "c0"),
        alpha0=_f(sc, "alpha0"),
        beta0=_f(sc, "beta0"),
        d=_f(sc, "d"),
        d0=_f(sc, "d0"),
        i0=_f(sc, "i0"),
        t_max=_f(sc, "t_max"),
        n_steps=_i(gr, "time_steps"),
    )
    raw = {s: dict(parser[s]) for s in ("scenario", "grids", "output")}
    return RunConfig(
        scenario=scenario,
        space_points=_i(gr, "space_points"),
        cn_dx=_f(gr, "cn_dx"),
        cn_dt=_f(gr, "cn_dt"),
        psi_slices=_i(out, "psi_slices"),
        fig_time_points=_i(out, "fig_time_points"),
        fig_space_points=_i(out, "fig_space_points"),
        raw=raw,
    )


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    rows = zip(*[np.atleast_1d(c) for c in columns])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def prepare_run_dir(out_dir: str, command: str) -> Path:
    run_dir = Path(out_dir)
    if run_dir.exists() and run_dir.is_dir():
        if any(run_dir.iterdir()) and not (run_dir / "manifest.json").exists():
            print(
                f"note: {run_dir} holds an incomplete previous run (no manifest); overwriting",
                file=sys.stderr,
            )
    run_dir.mkdir(parents=True, exist_ok=True)
    manifest = run_dir / "manifest.json"
    if manifest.exists():
        manifest.unlink()  # the run is complete only once the manifest reappears
    return run_dir


def write_manifest(run_dir: Path, command: str, config: RunConfig, files: list[Path],
                   wall_time: float, extra: dict | None = None) -> Path:
    payload = {
        "tool": "linpot",
        "tool_version": __version__,
        "command": command,
        "config": config.raw,
        "override_consistency": config.override_consistency,
        "backend_default": propagation.DEFAULT_BACKEND,
        "wall_time_s": wall_time,
        "files": [
            {"name": p.name, "bytes": p.stat().st_size, "sha256": _sha256(p)}
            for p in sorted(files, key=lambda q: q.name)
        ],
    }
    if extra:
        payload.update(extra)
    path = run_dir / "manifest.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def cmd_simulate(config: RunConfig, out_dir: str) -> int:
    t0 = time.perf_counter()
    run_dir = prepare_run_dir(out_dir, "simulate")
    tables = ScenarioTables(config.scenario, config.override_consistency)
    series = observables.uncertainty_series(tables)
    files = []

    moments = run_dir / "moments.csv"
    write_csv(
        moments,
        ["t", "re_x", "im_x", "re_p", "im_p", "dx2", "dp2", "product", "norm"],
        [
            series["t"],
            series["x_eta"].real,
            series["x_eta"].imag,
            series["p_eta"].real,
            series["p_eta"].imag,
            series["dx2"],
            series["dp2"],
            series["product"],
            series["norm"],
        ],
    )
    files.append(moments)

    slice_times = np.linspace(0.0, config.scenario.t_max, config.psi_slices)
    for idx, t in enumerate(slice_times):
        from .packet import auto_space_grid

        grid = auto_space_grid(tables, t, pad_sigmas=8.0, n_points=config.space_points)
        xs = grid.xs
        psi = np.asarray(packet_closed_form(xs, float(t), tables))
        dens = (
            np.asarray(density(xs, float(t), tables))
            if (config.scenario.alpha0 == 0.0 and config.scenario.beta0 == 0.0)
            else np.abs(psi) ** 2
        )
        p = run_dir / f"psi_t{idx}.csv"
        write_csv(p, ["x", "re_psi", "im_psi", "density"], [xs, psi.real, psi.imag, dens])
        files.append(p)

    write_manifest(
        run_dir,
        "simulate",
        config,
        files,
        time.perf_counter() - t0,
        extra={"slice_times": [float(t) for t in slice_times]},
    )
    print(f"simulate: wrote {len(files)} files to {run_dir}")
    return EXIT_OK


def cmd_figures(config: RunConfig, out_dir: str) -> int:
    t0 = time.perf_counter()
    run_dir = prepare_run_dir(out_dir, "figures")
    tables = ScenarioTables(config.scenario, config.override_consistency)
    times = np.linspace(0.0, config.scenario.t_max, config.fig_time_points)
    series = observables.uncertainty_series(tables, times)
    files = []

    fig1a = run_dir / "fig1a.csv"
    write_csv(fig1a, ["t", "dx2", "dp2"], [times, series["dx2"], series["dp2"]])
    files.append(fig1a)

    fig1b = run_dir / "fig1b.csv"
    write_csv(fig1b, ["t", "product"], [times, series["product"]])
    files.append(fig1b)

    from .packet import packet_center, packet_width

    centers = np.array([packet_center(t, tables) for t in times])
    widths = np.array([packet_width(t, tables) for t in times])
    xs = np.linspace(
        float(np.min(centers - 4.0 * widths)),
        float(np.max(centers + 4.0 * widths)),
        config.fig_space_points,
    )
    mesh_t = np.repeat(times, xs.size)
    mesh_x = np.tile(xs, times.size)
    dens = np.concatenate([np.asarray(density(xs, float(t), tables)) for t in times])
    fig2 = run_dir / "fig2.csv"
    write_csv(fig2, ["t", "x", "density"], [mesh_t, mesh_x, dens])
    files.append(fig2)

    write_manifest(run_dir, "figures", config, files, time.perf_counter() - t0)
    print(f"figures: wrote {len(files)} files to {run_dir}")
    return EXIT_OK


def cmd_verify(config: RunConfig, out_dir: str, sections, corrupt_phase: bool,
               backend: str | None) -> int:
    t0 = time.perf_counter()
    run_dir = prepare_run_dir(out_dir, "verify")
    report = verify.run_verification(
        config.scenario,
        sections=sections,
        corrupt_phase=corrupt_phase,
        backend=backend,
        cn_dx=config.cn_dx,
        cn_dt=config.cn_dt,
    )
    path = run_dir / "verify_report.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    write_manifest(run_dir, "verify", config, [path], time.perf_counter() - t0)

    for check in report["checks"]:
        flag = "PASS" if check["passed"] else "FAIL"
        print(f"[{flag}] {check['name']}: {check['value']:.6g} (mode {check['mode']}, "
              f"threshold {check['threshold']})")
    if report["hermitian_limit"]:
        print("note: zero drive; Hermitian-limit branch (norm-drift check not applicable)")
    if not report["all_pass"]:
        failed = [c["name"] for c in report["checks"] if not c["passed"]]
        print(f"verification FAILED: {failed}", file=sys.stderr)
        return EXIT_VERIFY
    print(f"verification passed ({len(report['checks'])} checks) -> {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linpot",
        description=(
            "Invariant-based dynamics of a particle in a complex time-dependent "
            "linear potential: closed-form packet, metric observables, and "
            "independent numerical verification."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="INI config file")
        p.add_argument("--out", metavar="DIR", help="run directory")
        p.add_argument("--t-max", type=float, metavar="T", help="horizon override")
        p.add_argument(
            "--grid-points",
            type=int,
            metavar="N",
            help="time-grid steps for the shared coefficient tables",
        )
        p.add_argument(
            "--drive", metavar="SPEC", help="drive profile override, e.g. cosine:1.0,1.0"
        )
        p.add_argument(
            "--override-consistency",
            action="store_true",
            help="allow packet parameters that break i0 = a0*d0",
        )

    sim = sub.add_parser("simulate", help="emit the moment series and wavefunction slices")
    common(sim)
    sim.add_argument("--psi-slices", type=int, metavar="N", help="number of psi_t*.csv slices")

    fig = sub.add_parser("figures", help="emit width/product series and the density mesh")
    common(fig)

    ver = sub.add_parser("verify", help="run the verification suite")
    common(ver)
    ver.add_argument(
        "--sections",
        default=",".join(verify.ALL_SECTIONS),
        metavar="LIST",
        help="comma-separated subset of: " + ",".join(verify.ALL_SECTIONS),
    )
    ver.add_argument("--backend", choices=propagation.available_backends(), help="stepping backend")
    ver.add_argument(
        "--corrupt-phase",
        action="store_true",
        help=argparse.SUPPRESS,  # negative-control hook for the test suite
    )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = {
            ("scenario", "t_max"): getattr(args, "t_max", None),
            ("grids", "time_steps"): getattr(args, "grid_points", None),
            ("scenario", "f"): getattr(args, "drive", None),
            ("output", "psi_slices"): getattr(args, "psi_slices", None),
        }
        config = load_config(args.config, overrides)
        if args.override_consistency:
            config = replace(config, override_consistency=True)
        config.scenario.validate(config.override_consistency)
        out_dir = args.out or f"runs/{args.command}"

        if args.command == "simulate":
            return cmd_simulate(config, out_dir)
        if args.command == "figures":
            return cmd_figures(config, out_dir)
        sections = tuple(s.strip() for s in args.sections.split(",") if s.strip())
        bad = set(sections) - set(verify.ALL_SECTIONS)
        if bad:
            raise ConfigError(f"unknown verify sections: {sorted(bad)}")
        return cmd_verify(config, out_dir, sections, args.corrupt_phase, args.backend)
    except (ConfigError, DomainError, UnsupportedFieldError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidityWindowError as exc:
        print(
            f"validity window error: {exc}\n"
            f"hint: rerun with --t-max {0.95 * exc.t_star:.6g} or smaller",
            file=sys.stderr,
        )
        return EXIT_VALIDITY
    except LinpotError as exc:
        print(f"verification-grade failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
