"""Convergence studies on the ellipse benchmark: run configs, CSV and tables."""
import csv
import io
import logging
import os
from contextlib import nullcontext
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .error_analysis import NORMS, rates, sample_points
from .estimator import PPIFESolver
from .exceptions import UsageError
from .problem import EllipseProblem
from .timestep import ELLIPTIC_PROJECTION, INTERPOLATION

log = logging.getLogger(__name__)

DEFAULT_STUDY = (10, 20, 40, 80, 160)
LARGE_STUDY = (320, 640, 1280)

PRESETS = {
    "table1": dict(epsilon=1, sigma0=1.0, theta=1.0, beta_minus=1.0, beta_plus=10.0),
    "table2": dict(epsilon=-1, sigma0=100.0, theta=1.0, beta_minus=1.0, beta_plus=10.0),
    "table3": dict(epsilon=1, sigma0=1.0, theta=0.5, beta_minus=1.0, beta_plus=10.0),
    "table4": dict(epsilon=-1, sigma0=100.0, theta=0.5, beta_minus=1.0, beta_plus=10.0),
    "table5": dict(epsilon=1, sigma0=1.0, theta=1.0, beta_minus=1.0, beta_plus=10000.0),
    "table6": dict(epsilon=1, sigma0=1.0, theta=0.5, beta_minus=1.0, beta_plus=10000.0),
}


@dataclass
class RunConfig:
    study: tuple = DEFAULT_STUDY
    theta: float = 1.0
    epsilon: int = 1
    sigma0: float = 1.0
    alpha: float = 1.0
    beta_minus: float = 1.0
    beta_plus: float = 10.0
    dt_ratio: float = 2.0
    t_final: float = 1.0
    init: str = INTERPOLATION
    csv: str = None
    export: str = None
    mesh_dump: str = None
    matrix_dump: str = None

    def validate(self):
        study = tuple(int(n) for n in self.study)
        if not study or any(n < 2 for n in study):
            raise UsageError("mesh sizes must be integers >= 2")
        if any(b <= a for a, b in zip(study, study[1:])):
            raise UsageError("study list must be strictly increasing")
        if self.epsilon not in (-1, 0, 1):
            raise UsageError(f"epsilon must be -1, 0 or 1, got {self.epsilon}")
        if not 0.0 <= self.theta <= 1.0:
            raise UsageError("theta must lie in [0, 1]")
        for name in ("beta_minus", "beta_plus", "alpha", "dt_ratio", "t_final"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        if self.sigma0 < 0 or (self.epsilon in (-1, 0) and self.sigma0 == 0):
            raise UsageError("sigma0 must be positive (nonnegative for epsilon = 1)")
        if self.init not in (INTERPOLATION, ELLIPTIC_PROJECTION):
            raise UsageError(f"init must be {INTERPOLATION!r} or {ELLIPTIC_PROJECTION!r}")
        return replace(self, study=study)

    def problem(self):
        return EllipseProblem(beta_minus=self.beta_minus, beta_plus=self.beta_plus,
                              t_final=self.t_final)

    def solver(self, n_side):
        return PPIFESolver(n_side=n_side, theta=self.theta, epsilon=self.epsilon,
                           sigma0=self.sigma0, alpha=self.alpha, dt_ratio=self.dt_ratio,
                           init=self.init)


def config_keys():
    return [f.name for f in fields(RunConfig)]


@dataclass
class ConvergenceReport:
    config: RunConfig
    records: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures


CSV_COLUMNS = ["h", "dt"] + [c for n in NORMS for c in (n, f"{n}_rate")]


def _fmt(v):
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return ""
    return f"{v:.5e}"


def report_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        row = [_fmt(r.h), _fmt(r.dt)]
        for n in NORMS:
            row += [_fmt(getattr(r, n)), _fmt(r.rates.get(n))]
        w.writerow(row)
    return buf.getvalue()


def format_table(records):
    """Aligned text table: h, then error and rate per norm."""
    head = f"{'h':>8} |" + "|".join(f"{n:>12} {'rate':>7} " for n in NORMS)
    lines = [head, "-" * len(head)]
    for r in records:
        cells = []
        for n in NORMS:
            rate = r.rates.get(n)
            rs = f"{rate:7.4f}" if rate is not None else " " * 7
            cells.append(f"{getattr(r, n):12.4E} {rs} ")
        lines.append(f"{'1/%d' % round(1 / r.h):>8} |" + "|".join(cells))
    return "\n".join(lines)


def _thread_limit():
    n = os.environ.get("PPIFE_THREADS")
    if not n:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=max(1, int(n)))


def run_study(cfg, out=None):
    """Solve on each mesh of ``cfg.study`` and collect final-time errors.

    The CSV (if requested) is rewritten after every mesh so partial results
    survive a failure on a finer mesh.
    """
    cfg = cfg.validate()
    problem = cfg.problem()
    report = ConvergenceReport(config=cfg)
    raw = []
    solver = None
    with _thread_limit():
        for ns in cfg.study:
            try:
                solver = cfg.solver(ns).fit(problem)
                raw.append(solver.error_record(problem))
            except Exception as exc:  # keep earlier meshes
                log.error("mesh %d failed: %s", ns, exc)
                report.failures.append((ns, str(exc)))
                break
            report.records = rates(raw)
            if cfg.csv:
                with open(cfg.csv, "w") as fh:
                    fh.write(report_csv(report.records))
            if out is not None:
                log.info("N_s = %d done (%d solver iterations)", ns, solver.n_iter_)
    if solver is not None and hasattr(solver, "coef_"):
        if cfg.export:
            export_field(solver.space_, solver.coef_, cfg.export)
        if cfg.mesh_dump:
            solver.mesh_.dump(cfg.mesh_dump)
        if cfg.matrix_dump:
            from .linalg import write_matrix_market

            write_matrix_market(cfg.matrix_dump, solver.stiffness_)
    if out is not None:
        out.write(format_table(report.records) + "\n")
    return report


def export_field(space, coeffs, path):
    """Write ``x y value side`` at the per-element 5x5 sample points."""
    pts, elems = sample_points(space.mesh)
    vals, _ = space.evaluate(coeffs, pts, elems)
    sides = space.side(elems, pts)
    try:
        with open(path, "w") as fh:
            fh.write("# x y value side\n")
            for (x, y), v, s in zip(pts, vals, sides):
                fh.write(f"{x:.10e} {y:.10e} {v:.10e} {int(s)}\n")
    except OSError as exc:
        raise OSError(f"cannot write field export to {path}: {exc}") from exc
