"""Experiment runner: scenario subcommands in, CSV and plot files out.

Scenarios bind the library end to end: transport traces, bound-term
reports, empirical scale selection, mollifier diagnostics, the
vanishing-level ladder, and the acceptance suite.  Configuration is a
flat ``key = value`` text file (``#`` starts a comment); unknown keys
are rejected so a typo cannot silently fall back to a default.  Flag
precedence: built-in defaults, then the config file, then --grid /
--seed / --out, then each --override in order.

For a fixed configuration every CSV and .dat file is reproduced byte
for byte on rerun; wall time lives only in the manifest, which is
written on every run, including failed ones.

Exit codes: 0 success, 2 configuration error, 3 runtime failure,
4 acceptance verification failure.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
import time
from typing import Callable

import numpy as np

from . import __version__
from .acceptance import run_criteria
from .commutator import (
    LHS_GRID_CAP,
    RegularisationParams,
    bound_report_five,
    bound_report_seven,
    decomposition_residual,
    report_to_csv,
    vanishing_sequence,
    vanishing_to_csv,
)
from .flows import (
    AlternatingShear,
    CellularRotation,
    SmoothSpectral,
    SpectralMode,
    sample_flow,
)
from .grid import GridSpec, ScalarField
from .mollifiers import (
    AnisotropicMollifier,
    anisotropic_l1_decay,
    cancellation_residual,
)
from .norms import LP_NODE_CAP
from .pigeonhole import BoundConstants, ScanCaps, select_empirical, selection_to_csv
from .tower import TowerReal, render
from .transport import backward_advect, mixing_trace, snapshot_times


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


SCENARIOS = ("simulate", "bounds5", "bounds7", "pigeonhole",
             "mollifier_check", "vanishing", "verify")

_SCENARIO_HELP = {
    "simulate": "advect a datum and trace its mixing norms",
    "bounds5": "five-term bound report for one transport run",
    "bounds7": "seven-term bound report (second cutoffs active)",
    "pigeonhole": "empirical scale selection from measured band energies",
    "mollifier_check": "cancellation residuals and anisotropic decay table",
    "vanishing": "drive all bound terms below a decreasing level ladder",
    "verify": "run the acceptance criteria and report pass/fail",
}

# Every recognized key with its global default.  Values stay strings
# until the scenario builder converts them, so precedence is a plain
# dict update and the manifest can echo exactly what was resolved.
_DEFAULTS: dict[str, str] = {
    "scenario": "",
    "out": "out",
    "seed": "0",
    "grid": "32x32",
    "flow": "sine_shear(0.3,1.0)",
    "datum": "checkerboard(2)",
    "test_function": "single_mode(1,1)",
    "t": "1.0",
    "cadence": "",
    "snapshots": "17",
    "lam": "1.0",
    "delta": "0.03",
    "delta_prime": "0.01",
    "epsilon": "0.1",
    "epsilon_prime": "0.04",
    "kappa": "1.0",
    "kappa_ladder": "1,0.5,0.25",
    "a": "1.0",
    "b": "1.0",
    "c": "1.0",
    "weak_norm": "false",
    "trials": "500",
    "max_n1": "64",
    "max_m": "12",
    "max_n2": "16",
    "criteria": "all",
}

# Scenario-specific defaults, applied before the config file.  The
# empirical selector needs either a constant velocity (degenerate
# branch) or grids of 1024+ per axis, so its default demonstrates the
# former; the ladder scenario needs a flow weak enough that the forced
# averaging parameter stays small at desk resolution.
_SCENARIO_DEFAULTS: dict[str, dict[str, str]] = {
    "simulate": {"flow": "sine_shear(1.0,0.25)"},
    "bounds5": {"datum": "single_mode(1,0)"},
    "bounds7": {"datum": "single_mode(1,0)"},
    "pigeonhole": {"flow": "zero", "grid": "128x128"},
    "vanishing": {"flow": "sine_shear(0.05,2.0)", "grid": "64x64"},
}


def _fmt(v: float) -> str:
    return "%.17g" % float(v)


def _cell(v) -> str:
    if isinstance(v, TowerReal):
        return render(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return _fmt(v)


# ---------------------------------------------------------------------------
# raw configuration: files, flags, overrides
# ---------------------------------------------------------------------------


def parse_config_text(text: str, source: str = "config") -> dict[str, str]:
    """key = value lines; # comments; duplicates and unknown keys rejected."""
    pairs: dict[str, str] = {}
    for lineno, rawline in enumerate(text.splitlines(), 1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}: line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _DEFAULTS:
            raise ConfigError(f"{source}: line {lineno}: unknown key {key!r}")
        if key in pairs:
            raise ConfigError(f"{source}: line {lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def resolve_config(scenario: str, config_path: str | None, out: str | None,
                   seed: int | None, grid: str | None,
                   overrides: list[str]) -> dict[str, str]:
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario: unknown scenario {scenario!r}")
    raw = dict(_DEFAULTS)
    raw.update(_SCENARIO_DEFAULTS.get(scenario, {}))
    raw["scenario"] = scenario
    if config_path is not None:
        try:
            with open(config_path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"config: cannot read {config_path}: {exc}")
        pairs = parse_config_text(text)
        if pairs.get("scenario", scenario) != scenario:
            raise ConfigError(
                f"scenario: config says {pairs['scenario']!r} but the "
                f"subcommand is {scenario!r}")
        pairs.pop("scenario", None)
        raw.update(pairs)
    if grid is not None:
        raw["grid"] = grid
    if seed is not None:
        if seed < 0:
            raise ConfigError("seed: must be nonnegative")
        raw["seed"] = str(seed)
    if out is not None:
        raw["out"] = out
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override: expected key=value, got {item!r}")
        key, _, value = item.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _DEFAULTS or key == "scenario":
            raise ConfigError(f"override: unknown key {key!r}")
        raw[key] = value
    return raw


# ---------------------------------------------------------------------------
# typed accessors; every failure names its field
# ---------------------------------------------------------------------------


def _float_of(raw: dict[str, str], key: str, positive: bool = False) -> float:
    try:
        v = float(raw[key])
    except ValueError:
        raise ConfigError(f"{key}: {raw[key]!r} is not a number")
    if not math.isfinite(v):
        raise ConfigError(f"{key}: must be finite")
    if positive and v <= 0:
        raise ConfigError(f"{key}: must be positive")
    return v


def _opt_float_of(raw: dict[str, str], key: str) -> float | None:
    if raw[key] == "" or raw[key].lower() == "none":
        return None
    return _float_of(raw, key, positive=True)


def _int_of(raw: dict[str, str], key: str, minimum: int | None = None) -> int:
    try:
        v = int(raw[key])
    except ValueError:
        raise ConfigError(f"{key}: {raw[key]!r} is not an integer")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{key}: must be at least {minimum}")
    return v


def _bool_of(raw: dict[str, str], key: str) -> bool:
    v = raw[key].lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: {raw[key]!r} is not a boolean")


def _grid_of(raw: dict[str, str]) -> GridSpec:
    parts = raw["grid"].lower().split("x")
    try:
        sizes = [int(p) for p in parts]
    except ValueError:
        raise ConfigError(f"grid: {raw['grid']!r} is not of the form NxN")
    if len(set(sizes)) != 1:
        raise ConfigError("grid: all axes must have the same node count")
    try:
        return GridSpec(len(sizes), sizes[0])
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}")


def _ladder_of(raw: dict[str, str]) -> list[float]:
    try:
        levels = [float(p) for p in raw["kappa_ladder"].split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"kappa_ladder: {raw['kappa_ladder']!r} is not a "
                          "comma-separated float list")
    if not levels or any(v <= 0 for v in levels):
        raise ConfigError("kappa_ladder: needs positive levels")
    if any(b >= a for a, b in zip(levels, levels[1:])):
        raise ConfigError("kappa_ladder: levels must strictly decrease")
    return levels


def _criteria_of(raw: dict[str, str]) -> list[int] | None:
    if raw["criteria"].lower() == "all":
        return None
    try:
        nums = [int(p) for p in raw["criteria"].split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"criteria: {raw['criteria']!r} is not a "
                          "comma-separated list of criterion numbers")
    if not nums or any(k < 1 or k > 10 for k in nums):
        raise ConfigError("criteria: numbers must lie in 1..10")
    return nums


_CALL_RE = re.compile(r"^([a-z_][a-z_0-9]*)\s*(?:\(([^()]*)\))?$")


def _call_of(text: str, field: str) -> tuple[str, list[float]]:
    m = _CALL_RE.match(text.strip())
    if m is None:
        raise ConfigError(f"{field}: cannot parse {text!r}")
    args: list[float] = []
    if m.group(2) is not None and m.group(2).strip():
        for part in m.group(2).split(","):
            try:
                args.append(float(part.strip()))
            except ValueError:
                raise ConfigError(f"{field}: argument {part.strip()!r} is "
                                  "not a number")
    return m.group(1), args


def _int_arg(args: list[float], idx: int, field: str) -> int:
    v = args[idx]
    if v != int(v):
        raise ConfigError(f"{field}: argument {idx + 1} must be an integer")
    return int(v)


def _flow_of(raw: dict[str, str], dim: int):
    name, args = _call_of(raw["flow"], "flow")
    try:
        if name == "zero":
            if args:
                raise ConfigError("flow: zero takes no arguments")
            return SmoothSpectral((), dim)
        if name in ("step_shear", "sine_shear"):
            if len(args) != 2:
                raise ConfigError(f"flow: {name} takes (amplitude, tau)")
            if dim != 2:
                raise ConfigError(f"flow: {name} needs a 2-d grid")
            profile = "step" if name == "step_shear" else "sine"
            return AlternatingShear(args[0], args[1], profile)
        if name == "cellular":
            if len(args) != 1:
                raise ConfigError("flow: cellular takes (cells_per_axis)")
            if dim != 2:
                raise ConfigError("flow: cellular needs a 2-d grid")
            return CellularRotation(_int_arg(args, 0, "flow"))
        if name == "spectral":
            if not 1 <= len(args) <= 3:
                raise ConfigError("flow: spectral takes (seed[, modes[, kmax]])")
            seed = _int_arg(args, 0, "flow")
            count = _int_arg(args, 1, "flow") if len(args) > 1 else 3
            kmax = _int_arg(args, 2, "flow") if len(args) > 2 else 2
            if count < 1 or kmax < 1:
                raise ConfigError("flow: spectral mode count and kmax must be "
                                  "at least 1")
            rng = np.random.default_rng(seed)
            modes = []
            for _ in range(count):
                freq = np.zeros(dim, dtype=int)
                while not freq.any():
                    freq = rng.integers(-kmax, kmax + 1, size=dim)
                amp = rng.standard_normal(dim) / float(np.hypot(*freq)
                                                       if dim == 2
                                                       else np.linalg.norm(freq))
                phase = float(rng.uniform(0.0, 2.0 * np.pi))
                modes.append(SpectralMode(tuple(int(f) for f in freq),
                                          tuple(float(x) for x in amp), phase))
            return SmoothSpectral(tuple(modes), dim)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"flow: {exc}")
    raise ConfigError(f"flow: unknown flow {name!r}")


def _field_of(raw: dict[str, str], key: str, grid: GridSpec,
              seed: int) -> ScalarField:
    name, args = _call_of(raw[key], key)
    coords = grid.node_coords()
    if name == "checkerboard":
        if len(args) != 1:
            raise ConfigError(f"{key}: checkerboard takes (tiles_per_axis)")
        k = _int_arg(args, 0, key)
        if k < 1:
            raise ConfigError(f"{key}: tile count must be at least 1")
        tiles = sum(np.floor(c * k).astype(int) for c in coords)
        return ScalarField(grid, np.where(tiles % 2 == 0, 1.0, -1.0))
    if name == "single_mode":
        if not 1 <= len(args) <= grid.dim:
            raise ConfigError(f"{key}: single_mode takes 1..{grid.dim} "
                              "integer frequencies")
        freq = [_int_arg(args, i, key) for i in range(len(args))]
        freq += [0] * (grid.dim - len(freq))
        phase = sum(k * c for k, c in zip(freq, coords))
        return ScalarField(grid, np.cos(2.0 * np.pi * phase))
    if name == "random":
        if len(args) > 1:
            raise ConfigError(f"{key}: random takes at most (seed)")
        s = _int_arg(args, 0, key) if args else seed
        rng = np.random.default_rng(s)
        white = rng.standard_normal(grid.shape)
        weight = 1.0 / (1.0 + sum(m.astype(float) ** 2 for m in grid.frequencies()))
        vals = np.fft.ifftn(np.fft.fftn(white) * weight).real
        vals -= vals.mean()
        peak = float(np.abs(vals).max())
        if peak > 0:
            vals /= peak
        return ScalarField(grid, vals)
    raise ConfigError(f"{key}: unknown pattern {name!r}")


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

Series = tuple[str, str, str, list[tuple[object, object]]]


def emit_plotdata(out_dir: str, scenario: str, series: list[Series]) -> list[str]:
    """Two-column whitespace-separated files, one per series, named
    <scenario>_<name>.dat.  Header comments carry the column meanings;
    tower-valued entries use the textual tower form."""
    if not series:
        raise ValueError("series must be nonempty")
    written = []
    for name, xlabel, ylabel, rows in series:
        if not rows:
            raise ValueError(f"series {name!r} has no rows")
        fname = f"{scenario}_{name}.dat"
        with open(os.path.join(out_dir, fname), "w") as fh:
            fh.write(f"# {scenario} {name}\n")
            fh.write(f"# column 1: {xlabel}; column 2: {ylabel}\n")
            for x, y in rows:
                fh.write(f"{_cell(x)} {_cell(y)}\n")
        written.append(fname)
    return written


def _write_csv(path: str, header: str, rows: list[list[str]]) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _write_manifest(out_dir: str, raw: dict[str, str], status: str,
                    wall: float, files: list[str],
                    error: str | None = None) -> None:
    lines = [f"status = {status}"]
    if error is not None:
        lines.append(f"error = {error}")
    lines.append(f"version = {__version__}")
    lines.append(f"wall_seconds = {wall:.3f}")
    lines.append(f"files = {', '.join(sorted(files))}")
    lines.append("")
    lines.append("# resolved configuration")
    lines.extend(f"{k} = {raw[k]}" for k in sorted(raw))
    with open(os.path.join(out_dir, "manifest.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# scenario builders: validate and close over inputs, then execute
# ---------------------------------------------------------------------------

Execute = Callable[[str], tuple[list[str], int]]


def _build_simulate(raw: dict[str, str]) -> Execute:
    grid = _grid_of(raw)
    seed = _int_of(raw, "seed", 0)
    flow = _flow_of(raw, grid.dim)
    datum = _field_of(raw, "datum", grid, seed)
    horizon = _float_of(raw, "t", positive=True)
    cadence = _opt_float_of(raw, "cadence")
    weak = _bool_of(raw, "weak_norm")
    if weak and grid.n ** grid.dim > LP_NODE_CAP:
        raise ConfigError(f"weak_norm: the LP norm is capped at "
                          f"{LP_NODE_CAP} nodes")

    def execute(out_dir: str) -> tuple[list[str], int]:
        times = snapshot_times(horizon, cadence)
        trace = mixing_trace(datum, flow, times)
        header = "t,hminus1"
        rows = [[_fmt(t), _fmt(v)] for t, v in trace]
        if weak:
            weak_trace = mixing_trace(datum, flow, times, norm="wminus11")
            header += ",wminus11"
            for row, (_, w) in zip(rows, weak_trace):
                row.append(_fmt(w))
        _write_csv(os.path.join(out_dir, "trace.csv"), header, rows)
        series: list[Series] = [("hminus1", "time", "H^-1 norm", trace)]
        if weak:
            series.append(("wminus11", "time", "W^-1,1 norm", weak_trace))
        files = ["trace.csv"] + emit_plotdata(out_dir, "simulate", series)
        print(f"simulate: {len(trace)} trace points, final hminus1 = "
              f"{trace[-1][1]:.6g}")
        return files, 0

    return execute


def _build_bounds(raw: dict[str, str], seven: bool) -> Execute:
    grid = _grid_of(raw)
    if grid.n > LHS_GRID_CAP:
        raise ConfigError(f"grid: bound quadratures need at most "
                          f"{LHS_GRID_CAP} nodes per axis")
    seed = _int_of(raw, "seed", 0)
    flow = _flow_of(raw, grid.dim)
    datum = _field_of(raw, "datum", grid, seed)
    phi_t = _field_of(raw, "test_function", grid, seed)
    horizon = _float_of(raw, "t", positive=True)
    cadence = _opt_float_of(raw, "cadence")
    lam = _float_of(raw, "lam", positive=True)
    delta = _float_of(raw, "delta", positive=True)
    epsilon = _float_of(raw, "epsilon", positive=True)
    dp = _opt_float_of(raw, "delta_prime") if seven else None
    ep = _opt_float_of(raw, "epsilon_prime") if seven else None
    if seven and (dp is None or ep is None):
        raise ConfigError("delta_prime: the seven-term report needs both "
                          "second cutoffs")
    try:
        params = RegularisationParams(lam, delta, epsilon, dp, ep)
    except ValueError as exc:
        raise ConfigError(f"params: {exc}")
    scenario = "bounds7" if seven else "bounds5"

    def execute(out_dir: str) -> tuple[list[str], int]:
        from .transport import advect

        rho = advect(datum, flow, horizon, cadence)
        phi = backward_advect(phi_t, flow, snapshot_times(horizon, cadence))
        make = bound_report_seven if seven else bound_report_five
        report = make(rho, phi, flow, params)
        path = os.path.join(out_dir, "bounds.csv")
        report_to_csv(report, path)
        residual = decomposition_residual(report)
        with open(path, "a") as fh:
            fh.write(f"# identity_residual = {_fmt(residual)}\n")
        rhs_rows = [(i + 1, t.rhs_value) for i, t in enumerate(report.terms)]
        order = " ".join(t.name for t in report.terms)
        files = ["bounds.csv"] + emit_plotdata(
            out_dir, scenario,
            [("rhs", f"term index ({order})", "rhs bound value", rhs_rows)])
        worst = max(report.terms, key=lambda t: t.rhs_value)
        print(f"{scenario}: identity residual {residual:.3e}, largest rhs "
              f"{worst.name} = {worst.rhs_value:.6g}")
        return files, 0

    return execute


def _build_pigeonhole(raw: dict[str, str]) -> Execute:
    grid = _grid_of(raw)
    seed = _int_of(raw, "seed", 0)
    flow = _flow_of(raw, grid.dim)
    phi_t = _field_of(raw, "test_function", grid, seed)
    horizon = _float_of(raw, "t", positive=True)
    count = _int_of(raw, "snapshots", 2)
    kappa = _float_of(raw, "kappa", positive=True)
    try:
        caps = ScanCaps(_int_of(raw, "max_n1", 1), _int_of(raw, "max_m", 1),
                        _int_of(raw, "max_n2", 1))
        consts = BoundConstants(_float_of(raw, "a", positive=True),
                                _float_of(raw, "b", positive=True),
                                _float_of(raw, "c", positive=True), grid.dim)
    except ValueError as exc:
        raise ConfigError(f"caps: {exc}")

    def execute(out_dir: str) -> tuple[list[str], int]:
        times = np.linspace(0.0, horizon, count)
        phi = backward_advect(phi_t, flow, [float(t) for t in times])
        u = sample_flow(flow, grid)
        sel, rep = select_empirical(phi, u, kappa, caps, consts)
        with open(os.path.join(out_dir, "selection.csv"), "w") as fh:
            fh.write(selection_to_csv(sel))
        band_rows = []
        for b in rep.bv_bands:
            band_rows.append(["velocity", str(b.rung),
                              "" if b.outer is None else _fmt(b.outer),
                              "" if b.inner is None else _fmt(b.inner),
                              "" if b.energy is None else _fmt(b.energy),
                              b.status])
        for i, (scale, energy) in enumerate(zip(rep.l2_scales,
                                                rep.l2_energies)):
            inner = rep.l2_scales[i + 1] if i + 1 < len(rep.l2_scales) else ""
            band_rows.append(["test_function", str(i + 1), _fmt(scale),
                              "" if inner == "" else _fmt(inner),
                              _fmt(energy), "scanned"])
        _write_csv(os.path.join(out_dir, "bands.csv"),
                   "side,rung,outer,inner,energy,status", band_rows)
        _write_csv(
            os.path.join(out_dir, "certificate.csv"),
            "lam,horizon,u_tv,phi_sup,l2_total,l2_mean,cross_term,"
            "cross_ratio,certificate,unreachable,l2_truncated",
            [[_fmt(rep.lam), _fmt(rep.horizon), _fmt(rep.u_tv),
              _fmt(rep.phi_sup), _fmt(rep.l2_total), _fmt(rep.l2_mean),
              _fmt(rep.cross_term), _fmt(rep.cross_ratio),
              _fmt(rep.certificate), str(rep.unreachable),
              str(int(rep.l2_truncated))]])
        series: list[Series] = [("l2bands", "outer scale", "band energy",
                                 list(zip(rep.l2_scales, rep.l2_energies)))]
        bv_rows = [(b.outer, b.energy) for b in rep.bv_bands
                   if b.status == "scanned" and b.outer is not None]
        if bv_rows:
            series.append(("bvbands", "outer scale", "band energy", bv_rows))
        files = ["selection.csv", "bands.csv", "certificate.csv"]
        files += emit_plotdata(out_dir, "pigeonhole", series)
        print(f"pigeonhole: selected velocity rung {sel.n2} and "
              f"test-function rung {sel.n1}; certificate "
              f"{rep.certificate:.6g}; {rep.unreachable} unreachable "
              "velocity rungs")
        return files, 0

    return execute


_DECAY_LEVELS = (2.0, 4.0, 8.0, 16.0, 32.0)


def _build_mollifier_check(raw: dict[str, str]) -> Execute:
    trials = _int_of(raw, "trials", 1)
    seed = _int_of(raw, "seed", 0)

    def execute(out_dir: str) -> tuple[list[str], int]:
        rng = np.random.default_rng(seed)
        rows = []
        worst = 0.0
        for trial in range(trials):
            mat = np.array([[0.0, 0.0], [0.0, 0.0]])
            while float(np.abs(mat).max()) < 1e-8:
                a, b, c = rng.standard_normal(3)
                mat = np.array([[a, b], [c, -a]])
            mat /= float(np.sqrt((mat ** 2).sum()))
            lam = float(rng.uniform(1.0, 8.0))
            moll = AnisotropicMollifier.make(lam, mat, 1e-5)
            points = rng.uniform(-1.2, 1.2, size=(16, 2))
            res = float(cancellation_residual(moll, points).max())
            worst = max(worst, res)
            rows.append([str(trial), _fmt(lam), _fmt(res)])
        _write_csv(os.path.join(out_dir, "residuals.csv"),
                   "trial,lam,residual", rows)
        shear = np.array([[0.0, 1.0], [0.0, 0.0]])
        decay_rows = []
        products = []
        for lam in _DECAY_LEVELS:
            moll = AnisotropicMollifier.make(lam, shear, 1e-15)
            dec = anisotropic_l1_decay(moll)
            products.append((lam, lam * dec))
            decay_rows.append([_fmt(lam), _fmt(dec), _fmt(lam * dec)])
        _write_csv(os.path.join(out_dir, "decay.csv"),
                   "lam,l1_decay,product", decay_rows)
        files = ["residuals.csv", "decay.csv"]
        files += emit_plotdata(out_dir, "mollifier_check",
                               [("decay", "averaging parameter",
                                 "parameter times L1 decay", products)])
        print(f"mollifier_check: max cancellation residual = {worst:.3e} "
              f"over {trials} trials")
        return files, 0

    return execute


def _build_vanishing(raw: dict[str, str]) -> Execute:
    grid = _grid_of(raw)
    seed = _int_of(raw, "seed", 0)
    flow = _flow_of(raw, grid.dim)
    phi_t = _field_of(raw, "test_function", grid, seed)
    horizon = _float_of(raw, "t", positive=True)
    count = _int_of(raw, "snapshots", 2)
    ladder = _ladder_of(raw)

    def execute(out_dir: str) -> tuple[list[str], int]:
        rungs = vanishing_sequence(flow, phi_t, ladder, T=horizon,
                                   snapshots=count)
        vanishing_to_csv(rungs, os.path.join(out_dir, "vanishing.csv"))
        worst_rows = [(r.kappa, max(r.rhs.values())) for r in rungs]
        files = ["vanishing.csv"] + emit_plotdata(
            out_dir, "vanishing",
            [("worst", "level", "largest rhs bound", worst_rows)])
        for r in rungs:
            mark = "achieved" if r.achieved else "missed"
            print(f"vanishing: level {r.kappa:g} {mark}, largest rhs "
                  f"{max(r.rhs.values()):.6g}")
        return files, 0

    return execute


def _build_verify(raw: dict[str, str]) -> Execute:
    numbers = _criteria_of(raw)

    def execute(out_dir: str) -> tuple[list[str], int]:
        results = run_criteria(numbers)
        rows = [[str(r.number), r.title, "1" if r.passed else "0"]
                for r in results]
        _write_csv(os.path.join(out_dir, "verify.csv"),
                   "criterion,title,passed", rows)
        for r in results:
            word = "PASS" if r.passed else "FAIL"
            print(f"criterion {r.number} [{r.title}]: {word} "
                  f"({r.seconds:.1f}s): {r.detail}")
        failures = sum(1 for r in results if not r.passed)
        return ["verify.csv"], failures

    return execute


_BUILDERS: dict[str, Callable[[dict[str, str]], Execute]] = {
    "simulate": _build_simulate,
    "bounds5": lambda raw: _build_bounds(raw, seven=False),
    "bounds7": lambda raw: _build_bounds(raw, seven=True),
    "pigeonhole": _build_pigeonhole,
    "mollifier_check": _build_mollifier_check,
    "vanishing": _build_vanishing,
    "verify": _build_verify,
}


def run_experiment(raw: dict[str, str]) -> int:
    """Validate, execute, and emit one scenario.

    Configuration problems raise ConfigError before any file is touched;
    once execution starts the manifest is written no matter what."""
    execute = _BUILDERS[raw["scenario"]](raw)
    out_dir = raw["out"]
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"out: cannot create {out_dir}: {exc}")
    start = time.perf_counter()
    try:
        files, failures = execute(out_dir)
    except Exception as exc:  # the manifest must record the failure
        wall = time.perf_counter() - start
        _write_manifest(out_dir, raw, "error", wall, [],
                        error=f"{type(exc).__name__}: {exc}")
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    wall = time.perf_counter() - start
    status = "ok" if failures == 0 else "verification_failed"
    _write_manifest(out_dir, raw, status, wall, files)
    if failures:
        print(f"verify: {failures} criteria failed", file=sys.stderr)
        return 4
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="bvmix",
        description="mixing-norm experiments for transport by BV flows")
    sub = parser.add_subparsers(dest="scenario", required=True,
                                metavar="scenario")
    for name in SCENARIOS:
        p = sub.add_parser(name, help=_SCENARIO_HELP[name])
        p.add_argument("--config", metavar="PATH",
                       help="key = value experiment file")
        p.add_argument("--out", metavar="DIR",
                       help="output directory (default: out)")
        p.add_argument("--seed", type=int, metavar="N",
                       help="experiment seed")
        p.add_argument("--grid", metavar="NxN",
                       help="grid nodes per axis, e.g. 64x64")
        p.add_argument("--override", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="set one config key; repeatable")
    args = parser.parse_args(argv)
    try:
        raw = resolve_config(args.scenario, args.config, args.out, args.seed,
                             args.grid, args.override)
        return run_experiment(raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
