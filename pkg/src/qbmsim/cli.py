"""Command-line front end: evolve, certify, immediate, sweep.

Configs are JSON with a versioned schema; results are written as CSV (RFC
4180 quoting, LF endings, 17 significant digits) or as a static SVG line
chart.  Exit codes: 0 success, 1 scientific failure, 2 config or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
import warnings
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from ._version import __version__
from .certify import (
    DEFAULT_MARGIN,
    FeasibilityError,
    SeparabilityCertificate,
    build_certificate,
    certificate_constants,
    critical_beta,
    immediate_entanglement_check,
    product_initial_covariance,
    verify_all_times_separable,
)
from .entanglement import PPT_TOL, ppt_verdict, reduce_two_mode, lambda_of_block
from .model import OscillatorNetwork, SpectralFamily, build_potential_matrix, \
    build_quadratic_form, make_spectral_model
from .symplectic import (
    _propagator_from_modes,
    is_valid_covariance,
    make_pure_gaussian,
    mean_energy,
    normal_modes,
    symplectic_spectrum,
)


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


_STATE_KINDS = ("vacuum", "squeezed", "matrix", "certificate")
_TOP_KEYS = {"version", "model", "beta", "system_state", "time_grid",
             "tolerances", "seed", "sweep_ns"}


@dataclass
class ExperimentConfig:
    model: dict
    version: int = 1
    beta: float | None = None
    system_state: dict = field(default_factory=lambda: {"kind": "vacuum"})
    time_grid: dict | None = None
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    sweep_ns: list[int] | None = None
    raw: dict = field(default_factory=dict)

    @property
    def ppt_tol(self) -> float:
        return float(self.tolerances.get("ppt", PPT_TOL))

    @property
    def margin(self) -> float:
        return float(self.tolerances.get("margin", DEFAULT_MARGIN))


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    version = data.get("version", 1)
    if version != 1:
        raise ConfigError(f"version: unsupported schema version {version!r}")
    model = data.get("model")
    if not isinstance(model, dict):
        raise ConfigError("model: required and must be an object")
    has_explicit = "omegas" in model or "kappas" in model
    has_family = "family" in model
    if has_explicit == has_family:
        raise ConfigError(
            "model: exactly one of {omegas, kappas} or {family} must be given"
        )
    if has_explicit:
        for key in ("omegas", "kappas"):
            if key not in model:
                raise ConfigError(f"model.{key}: missing")
            _require_number_list(model[key], f"model.{key}")
        for i, w in enumerate(model["omegas"]):
            if w <= 0.0:
                raise ConfigError(f"model.omegas[{i}]: must be positive, got {w!r}")
    else:
        fam = model["family"]
        if not isinstance(fam, dict):
            raise ConfigError("model.family: must be an object")
        for key in ("p", "omega_max", "coupling_norm", "n_env"):
            if key not in fam:
                raise ConfigError(f"model.family.{key}: missing")
            if not isinstance(fam[key], (int, float)) or isinstance(fam[key], bool):
                raise ConfigError(f"model.family.{key}: must be a number")
        if fam["omega_max"] <= 0:
            raise ConfigError("model.family.omega_max: must be positive")
        if fam["coupling_norm"] < 0:
            raise ConfigError("model.family.coupling_norm: must be nonnegative")
        if int(fam["n_env"]) != fam["n_env"] or fam["n_env"] < 1:
            raise ConfigError("model.family.n_env: must be a positive integer")
    beta = data.get("beta")
    if beta is not None:
        if not isinstance(beta, (int, float)) or isinstance(beta, bool) or beta <= 0:
            raise ConfigError(f"beta: must be a positive number, got {beta!r}")
        beta = float(beta)
    state = data.get("system_state", {"kind": "vacuum"})
    _validate_state(state)
    grid = data.get("time_grid")
    if grid is not None:
        _validate_grid(grid)
    tol = data.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("tolerances: must be an object")
    for key, val in tol.items():
        if key not in ("ppt", "margin"):
            raise ConfigError(f"tolerances.{key}: unknown tolerance")
        if not isinstance(val, (int, float)) or isinstance(val, bool) or val <= 0:
            raise ConfigError(f"tolerances.{key}: must be positive, got {val!r}")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"seed: must be a nonnegative integer, got {seed!r}")
    sweep_ns = data.get("sweep_ns")
    if sweep_ns is not None:
        if (not isinstance(sweep_ns, list) or not sweep_ns
                or not all(isinstance(n, int) and not isinstance(n, bool) for n in sweep_ns)):
            raise ConfigError("sweep_ns: must be a nonempty list of integers")
    return ExperimentConfig(model=model, version=version, beta=beta,
                            system_state=state, time_grid=grid, tolerances=tol,
                            seed=seed, sweep_ns=sweep_ns, raw=data)


def _require_number_list(value, name: str) -> None:
    if (not isinstance(value, list)
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                       for x in value)):
        raise ConfigError(f"{name}: must be a list of numbers")


def _validate_state(state) -> None:
    if not isinstance(state, dict) or "kind" not in state:
        raise ConfigError("system_state: must be an object with a 'kind' key")
    kind = state["kind"]
    if kind not in _STATE_KINDS:
        raise ConfigError(f"system_state.kind: must be one of {_STATE_KINDS}")
    if kind == "squeezed":
        for key in ("r", "theta"):
            if not isinstance(state.get(key), (int, float)) or isinstance(state.get(key), bool):
                raise ConfigError(f"system_state.{key}: must be a number")
    if kind == "matrix":
        entries = state.get("entries")
        if (not isinstance(entries, list) or len(entries) != 2
                or any(not isinstance(row, list) or len(row) != 2 for row in entries)):
            raise ConfigError("system_state.entries: must be a 2x2 array")
        m = np.asarray(entries, dtype=float)
        if not is_valid_covariance(m):
            raise ConfigError(
                "system_state.entries: not a valid single-mode covariance matrix"
            )


def _validate_grid(grid) -> None:
    if not isinstance(grid, dict):
        raise ConfigError("time_grid: must be an object")
    for key in ("start", "stop", "points"):
        if key not in grid:
            raise ConfigError(f"time_grid.{key}: missing")
    start, stop, points = grid["start"], grid["stop"], grid["points"]
    spacing = grid.get("spacing", "linear")
    if spacing not in ("linear", "log"):
        raise ConfigError(f"time_grid.spacing: must be 'linear' or 'log', got {spacing!r}")
    if not isinstance(points, int) or isinstance(points, bool) or points < 2:
        raise ConfigError("time_grid.points: must be an integer >= 2")
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (start, stop)):
        raise ConfigError("time_grid.start/stop: must be numbers")
    if stop <= start:
        raise ConfigError("time_grid.stop: must exceed time_grid.start")
    if spacing == "log" and start <= 0:
        raise ConfigError("time_grid.start: must be positive for log spacing")
    if start < 0:
        raise ConfigError("time_grid.start: must be nonnegative")


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: JSON syntax error at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}") from exc
    return parse_config(data)


def _grid_times(grid: dict) -> np.ndarray:
    spacing = grid.get("spacing", "linear")
    if spacing == "log":
        return np.geomspace(grid["start"], grid["stop"], grid["points"])
    return np.linspace(grid["start"], grid["stop"], grid["points"])


def _materialize_network(config: ExperimentConfig) -> OscillatorNetwork:
    try:
        if "family" in config.model:
            fam = config.model["family"]
            family = SpectralFamily(exponent=float(fam["p"]),
                                    omega_max=float(fam["omega_max"]),
                                    coupling_norm=float(fam["coupling_norm"]),
                                    n_env=int(fam["n_env"]))
            return make_spectral_model(family,
                                       omega_sys=float(fam.get("omega_sys", 1.0)))
        return OscillatorNetwork(omegas=np.asarray(config.model["omegas"], float),
                                 kappas=np.asarray(config.model["kappas"], float))
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc


def _system_covariance(config: ExperimentConfig, net: OscillatorNetwork):
    """Return (gamma_sys, beta), building a certificate when requested."""
    kind = config.system_state["kind"]
    if kind == "certificate":
        cert = build_certificate(net, margin=config.margin)
        return cert.gamma0_sys, cert.beta
    if kind == "vacuum":
        gamma_sys = np.eye(2)
    elif kind == "squeezed":
        gamma_sys = make_pure_gaussian(float(config.system_state["r"]),
                                       float(config.system_state["theta"]))
    else:
        gamma_sys = np.asarray(config.system_state["entries"], dtype=float)
    if config.beta is None:
        raise ConfigError("beta: required unless system_state.kind is 'certificate'")
    return gamma_sys, config.beta


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(
                    f"row {i} has {len(row)} cells, expected {len(self.columns)}"
                )
            for cell in row:
                if isinstance(cell, (int, float)) and not isinstance(cell, bool):
                    if not math.isfinite(cell):
                        raise ValueError(f"row {i} contains a non-finite value")


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def emit(table: ResultTable, fmt: str, path: str, y_column: str | None = None) -> None:
    """Write a result table as 'csv' or 'svg' (single static line chart)."""
    if not table.rows:
        raise ValueError("refusing to write an empty table")
    if fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for key in sorted(table.metadata):
                fh.write(f"# {key}: {table.metadata[key]}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow([_format_cell(c) for c in row])
    elif fmt == "svg":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(_svg_line_chart(table, y_column))
    else:
        raise ValueError(f"unknown output format {fmt!r}")


def _svg_line_chart(table: ResultTable, y_column: str | None) -> str:
    if y_column is None:
        if len(table.columns) < 2:
            raise ValueError("table needs at least two columns for a chart")
        y_column = table.columns[1]
    if y_column not in table.columns:
        raise ValueError(f"unknown column {y_column!r} for SVG output")
    xi, yi = 0, table.columns.index(y_column)
    pts = [(float(r[xi]), float(r[yi])) for r in table.rows
           if isinstance(r[xi], (int, float, np.integer, np.floating))
           and isinstance(r[yi], (int, float, np.integer, np.floating))]
    if not pts:
        raise ValueError("no numeric rows to plot")
    width, height = 720, 480
    left, right, top, bottom = 80, 20, 30, 50
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    xmin, xmax = min(xs), max(xs)
    ymin, ymax = min(ys), max(ys)
    if xmax == xmin:
        xmax = xmin + 1.0
    if ymax == ymin:
        ymax = ymin + 1.0

    def sx(x):
        return left + (x - xmin) / (xmax - xmin) * (width - left - right)

    def sy(y):
        return height - bottom - (y - ymin) / (ymax - ymin) * (height - top - bottom)

    points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">'
        f'{escape(y_column)} vs {escape(table.columns[xi])}</text>',
    ]
    for i in range(5):
        frac = i / 4.0
        xv = xmin + frac * (xmax - xmin)
        yv = ymin + frac * (ymax - ymin)
        gx, gy = sx(xv), sy(yv)
        parts.append(f'<line x1="{gx:.2f}" y1="{height - bottom}" x2="{gx:.2f}" '
                     f'y2="{height - bottom + 5}" stroke="black"/>')
        parts.append(f'<text x="{gx:.2f}" y="{height - bottom + 18}" '
                     f'text-anchor="middle" font-family="sans-serif" font-size="11">'
                     f'{escape(f"{xv:.4g}")}</text>')
        parts.append(f'<line x1="{left - 5}" y1="{gy:.2f}" x2="{left}" '
                     f'y2="{gy:.2f}" stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{gy + 4:.2f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">'
                     f'{escape(f"{yv:.4g}")}</text>')
    parts.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" '
                 f'stroke="black"/>')
    parts.append(f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" '
                 f'y2="{height - bottom}" stroke="black"/>')
    parts.append(f'<polyline points="{points}" fill="none" stroke="#1f6feb" '
                 f'stroke-width="1.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _base_metadata(config: ExperimentConfig, command: str) -> dict:
    return {
        "artifact_version": __version__,
        "command": command,
        "config": json.dumps(config.raw, sort_keys=True, separators=(",", ":")),
        "seed": str(config.seed),
    }


def run_evolve(config: ExperimentConfig) -> ResultTable:
    t0 = time.perf_counter()
    net = _materialize_network(config)
    if config.time_grid is None:
        raise ConfigError("time_grid: required for evolve")
    times = _grid_times(config.time_grid)
    gamma_sys, beta = _system_covariance(config, net)
    gamma0 = product_initial_covariance(gamma_sys, net, beta)
    modes = normal_modes(build_potential_matrix(net))
    w = build_quadratic_form(build_potential_matrix(net))
    rows = []
    for t in times:
        s = _propagator_from_modes(modes, float(t))
        gamma_t = s @ gamma0 @ s.T
        verdict = ppt_verdict(gamma_t, tol=config.ppt_tol)
        rows.append((float(t), verdict.min_pt_symplectic, verdict.log_negativity,
                     mean_energy(gamma_t, w), float(symplectic_spectrum(gamma_t).min())))
    meta = _base_metadata(config, "evolve")
    meta["beta"] = _format_cell(float(beta))
    meta["wall_clock_s"] = f"{time.perf_counter() - t0:.6f}"
    return ResultTable(
        columns=["t", "min_pt_symplectic", "log_negativity", "mean_energy",
                 "min_symplectic"],
        rows=rows,
        metadata=meta,
    )


def run_certify(config: ExperimentConfig) -> tuple[ResultTable, SeparabilityCertificate]:
    t0 = time.perf_counter()
    net = _materialize_network(config)
    cert = build_certificate(net, margin=config.margin)
    grid = config.time_grid or {"start": 0.0, "stop": 100.0, "points": 400,
                                "spacing": "linear"}
    report = verify_all_times_separable(cert, net, _grid_times(grid))
    rows = [(float(t), float(m))
            for t, m in zip(report.times, report.min_pt_by_time)]
    meta = _base_metadata(config, "certify")
    c = cert.constants
    meta.update({
        "omega_env_max": _format_cell(c.omega_env_max),
        "delta": _format_cell(c.delta),
        "omega_bound": _format_cell(c.omega_bound),
        "gamma_ref": _format_cell(c.gamma_ref),
        "beta_star": _format_cell(cert.beta_star),
        "beta": _format_cell(cert.beta),
        "margin": _format_cell(cert.margin),
        "gamma0_sys": json.dumps(cert.gamma0_sys.tolist()),
        "min_pt_overall": _format_cell(report.min_pt),
        "passed": str(report.passed),
    })
    meta["wall_clock_s"] = f"{time.perf_counter() - t0:.6f}"
    table = ResultTable(columns=["t", "min_pt_symplectic"], rows=rows, metadata=meta)
    return table, cert


def certificate_to_dict(cert: SeparabilityCertificate) -> dict:
    c = cert.constants
    return {
        "constants": {
            "omega_env_max": c.omega_env_max,
            "delta": c.delta,
            "omega_bound": c.omega_bound,
            "gamma_ref": c.gamma_ref,
        },
        "beta_star": cert.beta_star,
        "beta": cert.beta,
        "margin": cert.margin,
        "gamma0_sys": cert.gamma0_sys.tolist(),
    }


def run_immediate(config: ExperimentConfig):
    t0 = time.perf_counter()
    net = _materialize_network(config)
    gamma_sys, beta = _system_covariance(config, net)
    if config.time_grid is not None:
        if config.time_grid["start"] <= 0:
            raise ConfigError("time_grid.start: must be positive for immediate")
        times = _grid_times(config.time_grid)
    else:
        times = None
    try:
        report = immediate_entanglement_check(gamma_sys, net, beta, times=times)
    except ValueError as exc:
        # a mixed matrix state passes schema validation but not the purity gate
        raise ConfigError(f"system_state: {exc}") from exc
    lam_cols = [f"lambda_mode_{m}" for m in report.probed_modes]
    gamma0 = product_initial_covariance(gamma_sys, net, beta)
    lam0 = [lambda_of_block(reduce_two_mode(gamma0, m)) for m in report.probed_modes]
    pt0 = float(ppt_verdict(gamma0).min_pt_symplectic)
    rows = [(0.0, *lam0, pt0 ** 2, pt0)]
    lam_full = report.lambda_full
    for i, t in enumerate(report.times):
        rows.append((float(t), *report.lambda_by_mode[i].tolist(),
                     float(lam_full[i]), float(report.pt_min[i])))
    meta = _base_metadata(config, "immediate")
    meta.update({
        "beta": _format_cell(float(beta)),
        "lambda_dot0": _format_cell(report.lambda_dot0),
        "lambda_dot0_fd": _format_cell(report.lambda_dot0_fd),
        "onset_order": _format_cell(report.onset_order),
        "onset_coeff": _format_cell(report.onset_coeff),
        "epsilon_found": _format_cell(report.epsilon_found),
        "passed": str(report.passed),
    })
    meta["wall_clock_s"] = f"{time.perf_counter() - t0:.6f}"
    table = ResultTable(columns=["t", *lam_cols, "lambda_full", "min_pt_symplectic"],
                        rows=rows, metadata=meta)
    return table, report


def run_sweep(config: ExperimentConfig) -> ResultTable:
    if config.sweep_ns is None:
        raise ConfigError("sweep_ns: required for sweep")
    if "family" not in config.model:
        raise ConfigError("model.family: sweep requires a spectral-family model")
    fam_cfg = config.model["family"]
    ns = sorted(set(config.sweep_ns))
    if len(ns) != len(config.sweep_ns):
        warnings.warn("sweep_ns contains duplicates; deduplicated", stacklevel=2)
    rows = []
    n_ok = 0
    for n in ns:
        t0 = time.perf_counter()
        try:
            fam = SpectralFamily(exponent=float(fam_cfg["p"]),
                                 omega_max=float(fam_cfg["omega_max"]),
                                 coupling_norm=float(fam_cfg["coupling_norm"]),
                                 n_env=int(n))
            net = make_spectral_model(fam, omega_sys=float(fam_cfg.get("omega_sys", 1.0)))
            constants = certificate_constants(net)
            beta_star = critical_beta(net, margin=config.margin)
            rows.append((int(n), constants.delta, constants.omega_bound,
                         constants.gamma_ref, beta_star,
                         time.perf_counter() - t0, "ok"))
            n_ok += 1
        except (ValueError, FeasibilityError) as exc:
            rows.append((int(n), "", "", "", "", time.perf_counter() - t0,
                         f"error: {exc}"))
    meta = _base_metadata(config, "sweep")
    meta["n_ok"] = str(n_ok)
    return ResultTable(
        columns=["n_env", "delta", "omega_bound", "gamma_ref", "beta_star",
                 "wall_clock_s", "status"],
        rows=rows,
        metadata=meta,
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbmsim",
        description="Gaussian dynamics and entanglement certification for an "
                    "oscillator coupled to a harmonic bath",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("evolve", "evolve an initial state and track entanglement and energy"),
        ("certify", "build an always-separable initial state and verify it"),
        ("immediate", "trace the short-time entanglement onset"),
        ("sweep", "scan certificate constants across bath sizes"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="path to a JSON config file")
        p.add_argument("--out", required=True, help="output file path")
        p.add_argument("--format", choices=("csv", "svg"), default="csv")
        p.add_argument("--tol", type=float, default=None,
                       help="override the PPT boundary tolerance")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.tol is not None:
            if args.tol <= 0:
                raise ConfigError("--tol: must be positive")
            config.tolerances["ppt"] = args.tol
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed: must be nonnegative")
            config.seed = args.seed
        failed = False
        if args.command == "evolve":
            table = run_evolve(config)
        elif args.command == "certify":
            table, cert = run_certify(config)
            cert_path = args.out + ".certificate.json"
            with open(cert_path, "w", encoding="utf-8") as fh:
                json.dump(certificate_to_dict(cert), fh, indent=2, sort_keys=True)
                fh.write("\n")
            print(f"certificate written to {cert_path}")
            failed = table.metadata["passed"] != "True"
        elif args.command == "immediate":
            table, report = run_immediate(config)
            failed = not report.passed
        else:
            table = run_sweep(config)
            failed = int(table.metadata["n_ok"]) == 0
        emit(table, args.format, args.out)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FeasibilityError as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    if failed:
        print("result: FAIL", file=sys.stderr)
        return 1
    print("result: OK")
    return 0
