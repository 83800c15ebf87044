"""Command-line interface: configuration, result records and plot data.

Usage::

    stark-shell bound-states --a 1 --alpha -2.3130352855
    stark-shell resonance-1d --alpha -2 --a 0 --f-grid 0.03:0.12:10 --fit
    stark-shell det-scan-3d --a 1 --alpha -2.3130352855 --F 0.05 --plot det-heatmap

Exit codes: 0 success, 1 failed validation check, 2 configuration error,
3 numerical non-convergence (partial rows are still written).
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import io
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConvergenceError, DomainError, StarkShellError, TruncationError
from .zerofield import ShellParams

SCHEMA_VERSION = 1
COMMANDS = (
    "bound-states",
    "stark-shift",
    "resonance-1d",
    "det-scan-3d",
    "resonance-3d",
    "width-fit",
    "validate",
)
PLOT_KINDS = ("trajectory", "width-loglog", "det-heatmap")

# Every numeric knob with its default.
NUMERIC_DEFAULTS = {
    "ell_max": 10,
    "nodes_inner": 40,
    "nodes_outer": 40,
    "r_cut_multiplier": 24.0,
    "refinement_levels": 2,
    "quad_tolerance": 1e-6,
    "l_max": 6,
    "theta": math.pi / 6,
    "p": 3,
    "n_target": 28,
    "n_gamma": 32,
    "n_beta": 32,
    "n_cheb": 40,
    "u_nodes": 16,
    "truncation_tol": 1e-4,
    "re_range": [-1.5, -0.5],
    "im_range": [-0.2, 0.05],
    "grid_points": 41,
}


class ConfigError(StarkShellError, ValueError):
    """Invalid run configuration (exit code 2)."""


@dataclass(frozen=True)
class SweepSpec:
    start: float
    stop: float
    count: int
    spacing: str = "log"

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("sweep count must be >= 1")
        if self.spacing not in ("log", "linear"):
            raise ConfigError("sweep spacing must be 'log' or 'linear'")
        if not (self.start > 0 and self.stop >= self.start):
            raise ConfigError("sweep needs 0 < start <= stop")
        if self.count > 1 and self.stop == self.start:
            raise ConfigError("sweep with several points needs stop > start")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    @classmethod
    def parse(cls, text: str, spacing: str = "log") -> "SweepSpec":
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid spec {text!r} must look like start:stop:count")
        try:
            return cls(float(parts[0]), float(parts[1]), int(parts[2]), spacing)
        except ValueError as exc:
            raise ConfigError(f"cannot parse grid spec {text!r}: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: ShellParams
    sweep: SweepSpec | None = None
    numerics: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "csv"
    fit: bool = False
    input: str | None = None
    seed: complex | None = None
    plot: str | None = None
    plot_output: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be 'csv' or 'json'")
        unknown = set(self.numerics) - set(NUMERIC_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown numerics keys: {sorted(unknown)}")
        if self.plot is not None and self.plot not in PLOT_KINDS:
            raise ConfigError(f"plot kind must be one of {PLOT_KINDS}")
        if self.output is not None:
            parent = Path(self.output).resolve().parent
            if not parent.is_dir() or not os.access(parent, os.W_OK):
                raise ConfigError(f"output directory {parent} is not writable")

    def knob(self, name):
        return self.numerics.get(name, NUMERIC_DEFAULTS[name])

    def echo(self) -> dict:
        out = {
            "command": self.command,
            "params": dataclasses.asdict(self.params),
            "sweep": dataclasses.asdict(self.sweep) if self.sweep else None,
            "numerics": {k: self.knob(k) for k in sorted(NUMERIC_DEFAULTS)},
            "output": self.output,
            "format": self.format,
            "fit": self.fit,
            "input": self.input,
            "seed": None if self.seed is None else [self.seed.real, self.seed.imag],
        }
        return out


@dataclass
class ResultRecord:
    schema_version: int
    config_echo: dict
    tables: dict
    provenance: dict
    notes: list = field(default_factory=list)
    failed: bool = False

    @property
    def rows(self) -> list:
        return next(iter(self.tables.values()), [])

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True, default=_json_default)

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        data = json.loads(text)
        return cls(**data)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not serialisable: {type(obj)}")


# ---------------------------------------------------------------------------
# Output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render_csv(record: ResultRecord) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version: {record.schema_version}\n")
    buf.write(f"# tool: stark-shell {record.provenance.get('version', '')}\n")
    buf.write("# config: " + json.dumps(record.config_echo, sort_keys=True, default=_json_default) + "\n")
    for note in record.notes:
        buf.write(f"# note: {note}\n")
    if record.failed:
        buf.write("# status: FAILED (partial results)\n")
    for name, rows in record.tables.items():
        buf.write(f"# table: {name}\n")
        cols = _columns(rows)
        if cols:
            buf.write(",".join(cols) + "\n")
        for row in rows:
            buf.write(",".join(_fmt(row.get(c, "")) for c in cols) + "\n")
    return buf.getvalue()


def _columns(rows):
    cols = []
    for row in rows:
        for key in row:
            if key not in cols:
                cols.append(key)
    return cols


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the same directory and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.resolve().parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_record(record: ResultRecord, config: RunConfig, stream=None) -> None:
    text = record.to_json() + "\n" if config.format == "json" else render_csv(record)
    if config.output:
        atomic_write(config.output, text)
    else:
        (stream or sys.stdout).write(text)


PLOT_COLUMNS = {
    "trajectory": (
        "trajectory",
        ["F", "re_z", "im_z", "width"],
        "F [field strength], Re z [energy], Im z [energy], Gamma = -2 Im z [energy]",
    ),
    "width-loglog": (
        "trajectory",
        ["inv_F", "log_width"],
        "1/F [1/field strength], log Gamma [natural log of energy]",
    ),
    "det-heatmap": (
        "det_scan",
        ["re_z", "im_z", "abs_det"],
        "Re z [energy], Im z [energy], |det_p| [dimensionless]",
    ),
}


def emit_plotdata(record: ResultRecord, kind: str, path: str | os.PathLike) -> int:
    """Write columnar plot data for ``kind``; returns the number of rows."""
    if kind not in PLOT_COLUMNS:
        raise ConfigError(f"unknown plot kind {kind!r}")
    table, cols, axes = PLOT_COLUMNS[kind]
    rows = [r for r in record.tables.get(table, []) if r.get("status", "ok") == "ok"]
    if not rows:
        raise ConfigError(f"record has no '{table}' rows; cannot emit {kind}")
    buf = io.StringIO()
    buf.write(f"# kind: {kind}\n# axes: {axes}\n")
    buf.write(" ".join(cols) + "\n")
    for r in rows:
        if kind == "width-loglog":
            vals = [1.0 / r["F"], math.log(r["width"]) if r["width"] > 0 else float("nan")]
        else:
            vals = [r[c] for c in cols]
        buf.write(" ".join(_fmt(float(v)) for v in vals) + "\n")
    atomic_write(path, buf.getvalue())
    return len(rows)


# ---------------------------------------------------------------------------
# Commands


def _cmd_bound_states(cfg: RunConfig, rec: ResultRecord):
    from .zerofield import critical_strength, find_bound_states

    p = cfg.params
    if p.a <= 0:
        raise ConfigError("bound-states needs a > 0")
    rows = [
        {
            "ell": s.ell,
            "energy": float(s.energy),
            "kappa": float(s.kappa),
            "multiplicity": s.multiplicity,
            "shallow": s.shallow,
        }
        for s in find_bound_states(ShellParams(p.a, p.alpha), cfg.knob("ell_max"))
    ]
    if not rows:
        rec.notes.append(
            f"no channel binds (alpha >= -1/a = {critical_strength(0, p.a):.17g})"
        )
    rec.tables["bound_states"] = rows


def _shift_quad(cfg):
    from .starkshift import QuadratureSpec

    return QuadratureSpec(
        cfg.knob("nodes_inner"),
        cfg.knob("nodes_outer"),
        cfg.knob("r_cut_multiplier"),
        cfg.knob("refinement_levels"),
        cfg.knob("quad_tolerance"),
    )


def _cmd_stark_shift(cfg: RunConfig, rec: ResultRecord):
    from .starkshift import a2_coefficient

    res = a2_coefficient(ShellParams(cfg.params.a, cfg.params.alpha), _shift_quad(cfg))
    row = {
        "E0": res.E0,
        "a1": res.a1,
        "a2": res.a2,
        "m1_elem": res.m1_elem,
        "m2_elem": res.m2_elem,
        "mu1_at_E0": res.mu1_at_E0,
        "mu0_prime": res.mu0_prime,
        "oracle_rel_err": res.oracle_rel_err,
        "verified": res.verified,
    }
    if cfg.params.F > 0:
        row["F"] = cfg.params.F
        row["E_pert"] = res.E0 + res.a2 * cfg.params.F**2
    rec.tables["stark_shift"] = [row]


def _point_row(pt, status="ok"):
    return {
        "F": float(pt.F),
        "re_z": float(pt.z.real),
        "im_z": float(pt.z.imag),
        "width": float(pt.width),
        "residual": float(pt.newton_residual),
        "iterations": int(pt.iterations),
        "status": status,
    }


def _fit_row(fit):
    return {
        "c": fit.c,
        "b": fit.b,
        "logC": fit.logC,
        "rms_residual": fit.rms_residual,
        "F_min": fit.F_window[0],
        "F_max": fit.F_window[1],
        "n_points": fit.n_points,
        "c_expected": fit.c_expected,
        "c_rel_error": fit.c_rel_error,
    }


def _sweep_1d(cfg: RunConfig, rec: ResultRecord):
    from .resonance1d import find_resonance, zero_field_energy

    if cfg.sweep is None:
        raise ConfigError("resonance-1d needs --f-grid start:stop:count")
    rows = []
    rec.tables["trajectory"] = rows
    base = cfg.params
    zs = []
    guess = complex(zero_field_energy(base) if cfg.seed is None else cfg.seed)
    Fs = cfg.sweep.values()
    for k, F in enumerate(Fs):
        if k >= 2:
            guess = zs[-1] + (zs[-1] - zs[-2]) * (F - Fs[k - 1]) / (Fs[k - 1] - Fs[k - 2])
        elif k == 1:
            guess = zs[-1]
        try:
            pt = find_resonance(guess, ShellParams(base.a, base.alpha, float(F)))
        except ConvergenceError:
            rows.append({"F": float(F), "status": "failed"})
            rec.failed = True
            raise
        zs.append(pt.z)
        rows.append(_point_row(pt))
    return rows


def _fit_from_rows(rows, alpha):
    from .resonance1d import ResonancePoint, Trajectory, width_fit

    pts = [
        ResonancePoint(complex(r["re_z"], r["im_z"]), r["width"], r["F"], r["residual"], r["iterations"])
        for r in rows
        if r.get("status", "ok") == "ok"
    ]
    return width_fit(Trajectory(pts, None), -alpha * alpha / 4.0)


def _cmd_resonance_1d(cfg: RunConfig, rec: ResultRecord):
    rows = _sweep_1d(cfg, rec)
    if cfg.fit:
        rec.tables["fit"] = [_fit_row(_fit_from_rows(rows, cfg.params.alpha))]


def _cmd_width_fit(cfg: RunConfig, rec: ResultRecord):
    if cfg.input:
        try:
            src = ResultRecord.from_json(Path(cfg.input).read_text())
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise ConfigError(f"cannot read result record {cfg.input}: {exc}") from exc
        rows = src.tables.get("trajectory")
        if not rows:
            raise ConfigError(f"{cfg.input} has no trajectory table")
        alpha = src.config_echo["params"]["alpha"]
        rec.notes.append(f"fit of trajectory from {cfg.input}")
    else:
        rows = _sweep_1d(cfg, rec)
        alpha = cfg.params.alpha
    rec.tables["fit"] = [_fit_row(_fit_from_rows(rows, alpha))]


def _surface_quad(cfg):
    from .weyl3d import SurfaceQuadrature

    return SurfaceQuadrature(
        cfg.knob("n_target"),
        cfg.knob("n_gamma"),
        cfg.knob("n_beta"),
        cfg.knob("n_cheb"),
        cfg.knob("u_nodes"),
        cfg.knob("quad_tolerance"),
    )


def _need_shell(cfg):
    if cfg.params.a <= 0:
        raise ConfigError(f"{cfg.command} needs a > 0")


def _cmd_det_scan(cfg: RunConfig, rec: ResultRecord):
    from .weyl3d import det_scan

    _need_shell(cfg)
    n = int(cfg.knob("grid_points"))
    if n < 1:
        raise ConfigError("grid_points must be >= 1")
    re = np.linspace(*cfg.knob("re_range"), n)
    im = np.linspace(*cfg.knob("im_range"), n)
    Z = re[None, :] + 1j * im[:, None]
    vals = det_scan(Z, cfg.knob("theta"), cfg.params, cfg.knob("l_max"), _surface_quad(cfg), cfg.knob("p"))
    rec.tables["det_scan"] = [
        {
            "re_z": float(Z[i, j].real),
            "im_z": float(Z[i, j].imag),
            "abs_det": float(abs(vals[i, j])),
            "re_det": float(vals[i, j].real),
            "im_det": float(vals[i, j].imag),
        }
        for i in range(n)
        for j in range(n)
    ]


def _cmd_resonance_3d(cfg: RunConfig, rec: ResultRecord):
    from .starkshift import a2_coefficient
    from .weyl3d import find_resonance_3d

    _need_shell(cfg)
    p = cfg.params
    seed = cfg.seed
    if seed is None:
        shift = a2_coefficient(ShellParams(p.a, p.alpha), _shift_quad(cfg))
        seed = complex(shift.E0 + shift.a2 * p.F**2)
        rec.notes.append(f"seed from quadratic shift: E0 + a2 F^2 = {seed.real:.17g}")
    try:
        pt = find_resonance_3d(
            seed,
            cfg.knob("theta"),
            p,
            cfg.knob("l_max"),
            _surface_quad(cfg),
            cfg.knob("p"),
            truncation_tol=cfg.knob("truncation_tol"),
        )
    except (ConvergenceError, TruncationError):
        rec.tables["resonance_3d"] = [{"F": p.F, "status": "failed"}]
        rec.failed = True
        raise
    row = _point_row(pt)
    row.update(l_max=cfg.knob("l_max"), theta=cfg.knob("theta"))
    rec.tables["resonance_3d"] = [row]


def _cmd_validate(cfg: RunConfig, rec: ResultRecord):
    from .validation import run_checks

    rows = run_checks()
    rec.tables["checks"] = rows
    if not all(r["passed"] for r in rows):
        rec.notes.append("one or more checks failed")


DISPATCH = {
    "bound-states": _cmd_bound_states,
    "stark-shift": _cmd_stark_shift,
    "resonance-1d": _cmd_resonance_1d,
    "det-scan-3d": _cmd_det_scan,
    "resonance-3d": _cmd_resonance_3d,
    "width-fit": _cmd_width_fit,
    "validate": _cmd_validate,
}


def run(config: RunConfig) -> ResultRecord:
    """Execute one configuration; rows are deterministic for a fixed config."""
    rec = ResultRecord(
        schema_version=SCHEMA_VERSION,
        config_echo=config.echo(),
        tables={},
        provenance={
            "version": __version__,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "threads": os.environ.get("STARK_SHELL_THREADS", "default"),
        },
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            DISPATCH[config.command](config, rec)
        except (ConvergenceError, TruncationError) as exc:
            rec.failed = True
            rec.provenance["error"] = str(exc)
            rec.provenance["diagnostics"] = _plain(getattr(exc, "diagnostics", {}))
            raise _Partial(rec) from exc
        finally:
            rec.provenance["warnings"] = sorted({str(w.message) for w in caught})
    return rec


class _Partial(Exception):
    def __init__(self, record):
        super().__init__("non-convergence")
        self.record = record


def _plain(obj):
    try:
        return json.loads(json.dumps(obj, default=lambda o: repr(o)))
    except (TypeError, ValueError):
        return repr(obj)


# ---------------------------------------------------------------------------
# Argument parsing


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex number {text!r}") from exc


def _parse_range(text: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"range {text!r} must look like lo:hi")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"cannot parse range {text!r}") from exc
    if not hi > lo:
        raise ConfigError(f"range {text!r} needs hi > lo")
    return [lo, hi]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stark-shell", description="Delta-shell Stark resonances.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON file mirroring the run configuration")
    ap.add_argument("--a", type=float, help="shell radius (0 allowed for resonance-1d)")
    ap.add_argument("--alpha", type=float, help="coupling strength")
    ap.add_argument("--F", type=float, dest="F", help="field strength")
    ap.add_argument("--f-grid", help="field sweep start:stop:count")
    ap.add_argument("--f-spacing", choices=("log", "linear"), help="sweep spacing (default log)")
    ap.add_argument("--fit", action="store_true", default=None, help="fit the width law")
    ap.add_argument("--input", help="JSON result record to refit (width-fit)")
    ap.add_argument("--seed", help="complex starting point, e.g. -1-0.001j")
    ap.add_argument("--output", "-o", help="output path (default: stdout)")
    ap.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    ap.add_argument("--plot", choices=PLOT_KINDS, help="also emit plot data of this kind")
    ap.add_argument("--plot-output", help="plot data path (default: <output>.<kind>.dat)")
    num = ap.add_argument_group("numerics")
    num.add_argument("--ell-max", type=int, help="bound-state channel cutoff (10)")
    num.add_argument("--l-max", type=int, help="3D angular truncation (6)")
    num.add_argument("--theta", type=float, help="3D contour angle in (0, pi/3) (pi/6)")
    num.add_argument("--p", type=int, help="determinant regularisation order (3)")
    num.add_argument("--re-range", help="det-scan Re z range, written --re-range=lo:hi (-1.5:-0.5)")
    num.add_argument("--im-range", help="det-scan Im z range, written --im-range=lo:hi (-0.2:0.05)")
    num.add_argument("--grid-points", type=int, help="det-scan points per axis (41)")
    num.add_argument("--nodes-inner", type=int, help="radial nodes inside the shell (40)")
    num.add_argument("--nodes-outer", type=int, help="radial nodes per outer panel (40)")
    num.add_argument("--quad-tolerance", type=float, help="quadrature tolerance (1e-6)")
    num.add_argument("--truncation-tol", type=float, help="L_max vs L_max+2 root shift (1e-4)")
    return ap


def config_from_args(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        cmd = data.get("command", args.command)
        if cmd != args.command:
            raise ConfigError(f"config is for {cmd!r}, command line says {args.command!r}")
    params = dict(data.get("params", {}))
    for key in ("a", "alpha", "F"):
        if getattr(args, key) is not None:
            params[key] = getattr(args, key)
    missing = [k for k in ("a", "alpha") if k not in params]
    if missing and args.command not in ("validate",) and not (args.command == "width-fit" and args.input):
        raise ConfigError(f"missing parameter(s): {', '.join('--' + m for m in missing)}")
    params.setdefault("a", 1.0)
    params.setdefault("alpha", -2.0)
    try:
        shell = ShellParams(float(params["a"]), float(params["alpha"]), float(params.get("F", 0.0)))
    except (DomainError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid parameters: {exc}") from exc
    if shell.F < 0:
        raise ConfigError("F must be >= 0")

    sweep = None
    spacing = args.f_spacing or (data.get("sweep") or {}).get("spacing", "log")
    if args.f_grid:
        sweep = SweepSpec.parse(args.f_grid, spacing)
    elif data.get("sweep"):
        try:
            sweep = SweepSpec(**data["sweep"])
        except TypeError as exc:
            raise ConfigError(f"bad sweep block: {exc}") from exc

    numerics = dict(data.get("numerics", {}))
    for key in (
        "ell_max",
        "l_max",
        "theta",
        "p",
        "grid_points",
        "nodes_inner",
        "nodes_outer",
        "quad_tolerance",
        "truncation_tol",
    ):
        val = getattr(args, key)
        if val is not None:
            numerics[key] = val
    if args.re_range:
        numerics["re_range"] = _parse_range(args.re_range)
    if args.im_range:
        numerics["im_range"] = _parse_range(args.im_range)
    theta = numerics.get("theta", NUMERIC_DEFAULTS["theta"])
    if not 0 < theta < math.pi / 3:
        raise ConfigError("theta must lie in (0, pi/3)")
    if numerics.get("p", 3) < 3:
        raise ConfigError("p must be >= 3")

    seed = args.seed if args.seed is not None else data.get("seed")
    if isinstance(seed, list):
        seed = complex(*seed)
    elif isinstance(seed, str):
        seed = _parse_complex(seed)
    out = data.get("output", {})
    if isinstance(out, str):
        out = {"path": out}
    fit = args.fit if args.fit is not None else bool(data.get("fit", False))
    return RunConfig(
        command=args.command,
        params=shell,
        sweep=sweep,
        numerics=numerics,
        output=args.output or out.get("path"),
        format=args.format or out.get("format", "csv"),
        fit=fit,
        input=args.input or data.get("input"),
        seed=seed,
        plot=args.plot or data.get("plot"),
        plot_output=args.plot_output or data.get("plot_output"),
    )


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    code = 0
    try:
        rec = run(cfg)
    except _Partial as part:
        rec = part.record
        print(f"non-convergence: {rec.provenance.get('error')}", file=sys.stderr)
        code = 3
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    write_record(rec, cfg)
    for note in rec.notes:
        print(note, file=sys.stderr)
    if cfg.plot and code == 0:
        target = cfg.plot_output or (
            f"{cfg.output}.{cfg.plot}.dat" if cfg.output else f"{cfg.command}.{cfg.plot}.dat"
        )
        try:
            emit_plotdata(rec, cfg.plot, target)
        except ConfigError as exc:
            print(f"configuration error: {exc}", file=sys.stderr)
            return 2
    if cfg.command == "validate" and not all(r["passed"] for r in rec.tables["checks"]):
        code = max(code, 1)
    return code


if __name__ == "__main__":
    sys.exit(main())
