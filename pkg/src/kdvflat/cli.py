"""Batch command line: one JSON config in, CSV and JSON artifacts out.

Exit codes: 0 ok, 2 configuration error, 3 property failure, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, airy
from .errors import ConfigError, DomainError, KdvFlatError, NumericalError
from .flatout import gevrey_fit
from .pde import Discretization, energy_report, solve_free
from .pipelines import named_profile, named_target, run_null_control, run_reach
from .verify import VerifyOptions, run_verify

log = logging.getLogger("kdvflat")

REPORT_SCHEMA = "kdvflat.report"
REPORT_VERSION = 1
COMMANDS = ("null-control", "reach", "simulate", "airy", "verify")

EXIT_OK, EXIT_CONFIG, EXIT_PROPERTY, EXIT_NUMERICAL = 0, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    a: float = 0.0
    T: float = 1.0
    tau: float = 0.5
    s: float = 2.0
    M: float = 1.0
    N: int | None = None
    target: object = "x2"
    target_N: int = 6
    y0: object = "sin"
    trace_depth: int = 6
    discretization: dict = field(default_factory=dict)
    output_dir: str = "out"
    seed: int = 0
    n_snapshots: int = 11
    n_polys: int = 300
    mutation: dict | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        for name in ("a", "T", "tau", "s", "M"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{name} must be a finite number")
        if self.a < 0:
            raise ConfigError(f"a must be >= 0, got {self.a}")
        if not 0 < self.tau < self.T:
            raise ConfigError(f"need 0 < tau < T, got tau={self.tau}, T={self.T}")
        if self.command == "null-control" and not 1.5 <= self.s < 3.0:
            raise ConfigError(f"null control needs s in [3/2, 3), got {self.s}")
        if self.N is not None and self.N < 1:
            raise ConfigError("N must be >= 1")
        if self.n_snapshots < 2:
            raise ConfigError("n_snapshots must be >= 2")
        self.disc()  # validates the block

    def disc(self) -> Discretization:
        try:
            return Discretization(**self.discretization)
        except TypeError as exc:
            raise ConfigError(f"bad discretization block: {exc}") from exc

    @classmethod
    def from_json(cls, doc: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "command" not in doc:
            raise ConfigError("config needs a 'command'")
        return cls(**doc)

    def profile(self):
        if isinstance(self.y0, dict):
            path = self.y0.get("file")
            if not path:
                raise ConfigError("y0 object must name a 'file' with columns x,y")
            data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
            return (data[:, 0], data[:, 1])
        return named_profile(self.y0, self.seed)


# --------------------------------------------------------------------------
# artifacts


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_control(path: Path, control) -> None:
    write_csv(path, ["t", "u"], zip(control.times, control.values))


def write_snapshots(path: Path, traj, n: int) -> None:
    idx = np.unique(np.linspace(0, traj.t_grid.size - 1, n).round().astype(int))
    rows = ((traj.t_grid[j], x, traj.y[j, k]) for j in idx for k, x in enumerate(traj.x_grid))
    write_csv(path, ["t", "x", "y"], rows)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_report(path: Path, cfg: RunConfig, status: str, results: dict) -> dict:
    doc = {
        "schema": REPORT_SCHEMA,
        "schema_version": REPORT_VERSION,
        "package_version": __version__,
        "command": cfg.command,
        "status": status,
        "config": _clean(dataclasses.asdict(cfg)),
        "results": _clean(results),
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True))
    return doc


# --------------------------------------------------------------------------
# commands


def cmd_null_control(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    N = 12 if cfg.N is None else cfg.N
    r = run_null_control(cfg.profile(), cfg.a, cfg.T, cfg.tau, cfg.s, cfg.M, N, cfg.trace_depth, cfg.disc())
    write_control(out / "u.csv", r.control)
    write_snapshots(out / "state_snapshots.csv", r.trajectory, cfg.n_snapshots)
    free_phase = r.control.values[r.control.times <= cfg.tau]
    results = {
        "final_relative_l2": r.final_ratio,
        "initial_l2": r.meta["l0"],
        "tail_bound": r.control.tail_bound,
        "envelope": list(r.envelope) if r.envelope else None,
        "residual_defect_relative": r.residual,
        "free_phase_series_defect": r.free_phase_defect,
        "free_phase_u_max": float(np.max(np.abs(free_phase))) if free_phase.size else 0.0,
        "trace_depth": r.trace_depth,
        "N": N,
    }
    return EXIT_OK, results


def cmd_reach(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    y1 = named_target(cfg.target, cfg.target_N)
    r = run_reach(y1, cfg.a, cfg.T, cfg.tau, cfg.N, cfg.M, cfg.disc())
    write_control(out / "u.csv", r.control)
    tr = r.trajectory
    T = tr.t_grid[-1]
    write_csv(out / "final_state.csv", ["t", "x", "y"], ((T, x, y) for x, y in zip(tr.x_grid, tr.y[-1])))
    results = {
        "final_max_error": r.final_error,
        "b": r.b,
        "roundtrip_defect": r.roundtrip_defect,
        "tail_bound": r.control.tail_bound,
        "envelope": list(r.envelope) if r.envelope else None,
        "residual_defect_relative": r.residual,
        "y_left_T": float(tr.y[-1][0]),
        "N": r.meta["N"],
    }
    return EXIT_OK, results


def cmd_simulate(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    tr = solve_free(cfg.profile(), cfg.a, cfg.T, cfg.disc())
    write_snapshots(out / "state_snapshots.csv", tr, cfg.n_snapshots)
    er = energy_report(tr, cfg.a)
    results = {
        "l2_initial": float(er.l2_norms[0]),
        "l2_final": float(er.l2_norms[-1]),
        "max_step_growth": er.max_step_growth,
        "dissipation_integral": er.dissipation_integral,
        "kato_constant_fit": er.kato_constant_fit,
        "kato_bound": er.kato_bound,
        "kato_margin": er.kato_margin,
        "smoothing_fit": er.smoothing_fit,
    }
    return EXIT_OK, results


def _bump(s):
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    out = np.zeros_like(s)
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def cmd_airy(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    t_kernel = 1.0 / 3.0
    xs = np.linspace(-2.0, 2.0, 81)
    E = airy.fundamental_solution(xs, t_kernel)
    write_csv(out / "fundamental_solution.csv", ["t", "x", "y"], ((t_kernel, x, e) for x, e in zip(xs, E)))
    t_line = cfg.T
    xl = np.linspace(-1.0, 1.0, 41)
    yl = airy.line_solution(_bump, 1.0, xl, t_line)
    write_csv(out / "line_solution.csv", ["t", "x", "y"], ((t_line, x, y) for x, y in zip(xl, yl)))
    fit, mags = airy.line_derivative_fit(_bump, 1.0, xl, t_line)
    tb = airy.airy_table()
    afit = gevrey_fit(tb.derivs)
    results = {
        "Ai0": airy.airy_eval(0.0, 0, tb),
        "Ai1": airy.airy_eval(0.0, 1, tb),
        "E_at_origin_t_third": float(airy.fundamental_solution(0.0, t_kernel)),
        "mass": airy.fundamental_mass(t_kernel),
        "airy_taylor_fit": {"s": afit.s, "R": afit.R, "C": afit.C},
        "line_derivative_fit": {"s": fit.s, "R": fit.R, "C": fit.C, "magnitudes": mags},
    }
    return EXIT_OK, results


def cmd_verify(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    opts = VerifyOptions(n_polys=cfg.n_polys, seed=cfg.seed, disc=cfg.disc(), mutation=cfg.mutation)
    props = run_verify(opts)
    failed = [p.name for p in props if not p.passed]
    results = {"properties": [p.to_json() for p in props], "failed": failed}
    return (EXIT_PROPERTY if failed else EXIT_OK), results


HANDLERS = {
    "null-control": cmd_null_control,
    "reach": cmd_reach,
    "simulate": cmd_simulate,
    "airy": cmd_airy,
    "verify": cmd_verify,
}


def run(cfg: RunConfig, out: Path | None = None) -> tuple[int, dict]:
    out = Path(out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    code, results = HANDLERS[cfg.command](cfg, out)
    status = "ok" if code == EXIT_OK else "property_failure"
    return code, write_report(out / "report.json", cfg, status, results)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kdvflat", description="Flatness-based control runs for linear KdV.")
    p.add_argument("config", help="path to the JSON run configuration")
    p.add_argument("-o", "--output-dir", help="override the config's output_dir")
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        doc = json.loads(Path(args.config).read_text())
        cfg = RunConfig.from_json(doc)
    except (OSError, json.JSONDecodeError) as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_CONFIG
    except (ConfigError, TypeError) as exc:
        log.error("invalid config: %s", exc)
        return EXIT_CONFIG
    out = Path(args.output_dir) if args.output_dir else None
    try:
        code, doc = run(cfg, out)
    except (ConfigError, DomainError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (NumericalError, KdvFlatError, ArithmeticError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    if code == EXIT_PROPERTY:
        log.error("property failures: %s", ", ".join(doc["results"]["failed"]))
    else:
        log.info("wrote artifacts to %s", out or cfg.output_dir)
    return code


if __name__ == "__main__":
    sys.exit(main())
