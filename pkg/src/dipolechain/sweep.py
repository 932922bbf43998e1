"""Grid scans over chain parameters with per-point optimum extraction.

A sweep is a row-major scan over one axis (alternation parameter) or two
axes (zigzag rise x field angle).  Every grid point is evaluated
independently from the same immutable configuration, so the scan can run on
any number of worker processes and still produce identical records in
identical order.  Points that fail for an expected numerical reason (for
example an undefined deviation ratio at the magic angle) become sentinel
records instead of aborting the run.
"""

from __future__ import annotations

import datetime as _dt
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DipoleChainError
from .geometry import ALTERNATING, ZIGZAG, FieldOrientation, alternating_nodes, zigzag_nodes
from .hamiltonian import ALTERNATING_TIME, ZIGZAG_TIME
from .dynamics import chain_decomposition
from .metrics import DEFAULT_EPSILON, approx_report, max_probability

M_ALL = "all"
M_AUTO = "auto"


@dataclass(frozen=True)
class Axis:
    """One swept parameter range, sampled at ``count`` evenly spaced values."""

    name: str
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError(f"axis {self.name!r} needs at least 2 points")
        if not self.lo < self.hi:
            raise ValueError(f"axis {self.name!r} needs lo < hi")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)

    @property
    def cell(self) -> float:
        return (self.hi - self.lo) / (self.count - 1)


@dataclass(frozen=True)
class SweepGrid:
    """Immutable sweep configuration: axes, chain spec, window and M policy."""

    axes: tuple[Axis, ...]
    kind: str
    n: int
    t_window: float
    m_policy: str | int = M_ALL
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.kind not in (ZIGZAG, ALTERNATING):
            raise ValueError(f"unknown chain kind {self.kind!r}")
        if isinstance(self.m_policy, str) and self.m_policy not in (M_ALL, M_AUTO):
            raise ValueError(f"M policy must be 'all', 'auto' or an integer")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.count for a in self.axes)

    def points(self) -> list[tuple[float, ...]]:
        """All grid points in row-major axis order."""
        return [
            tuple(float(v) for v in combo)
            for combo in itertools.product(*(a.values() for a in self.axes))
        ]


@dataclass(frozen=True)
class SweepRecord:
    """Result at one grid point; ``error`` marks a sentinel record."""

    params: tuple[float, ...]
    p_max: float
    tau_max: float
    cal_m: int | None = None
    j_ref: float | None = None
    error: str | None = None


@dataclass
class SweepResult:
    grid: SweepGrid
    records: list[SweepRecord]
    metadata: dict = field(default_factory=dict)


def _point_chain(grid: SweepGrid, params: tuple[float, ...]):
    if grid.kind == ZIGZAG:
        y, chi = params
        return zigzag_nodes(grid.n, y), FieldOrientation(chi), ZIGZAG_TIME
    (alpha,) = params
    return alternating_nodes(grid.n, alpha), FieldOrientation(0.0), ALTERNATING_TIME


def _resolve_m(grid: SweepGrid) -> int:
    if grid.m_policy in (M_ALL, M_AUTO):
        return grid.n - 1
    return int(grid.m_policy)


def evaluate_point(grid: SweepGrid, params: tuple[float, ...]) -> SweepRecord:
    """Optimum (and, under the 'auto' policy, minimal window and reference
    time average) at one grid point; expected numerical failures become
    sentinel records."""
    try:
        nodes, fld, mode = _point_chain(grid, params)
        dec = chain_decomposition(nodes, fld, _resolve_m(grid), mode)
        opt = max_probability(dec, grid.t_window)
        if grid.m_policy == M_AUTO:
            report = approx_report(nodes, fld, grid.t_window, grid.epsilon, mode)
            return SweepRecord(
                params, opt.p_max, opt.tau_max, report.cal_m, float(report.j[-1])
            )
        return SweepRecord(params, opt.p_max, opt.tau_max)
    except DipoleChainError as exc:
        return SweepRecord(params, math.nan, math.nan, error=str(exc))


def _evaluate_star(args) -> SweepRecord:
    return evaluate_point(*args)


def run_sweep(grid: SweepGrid, workers: int = 1) -> SweepResult:
    """Evaluate every grid point, serially or on worker processes.

    Records come back in row-major grid order regardless of completion
    order, so the result is independent of ``workers``.
    """
    points = grid.points()
    if workers <= 1:
        records = [evaluate_point(grid, p) for p in points]
    else:
        tasks = [(grid, p) for p in points]
        chunk = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_evaluate_star, tasks, chunksize=chunk))
    meta = {
        "kind": grid.kind,
        "n": grid.n,
        "t_window": grid.t_window,
        "m_policy": grid.m_policy,
        "epsilon": grid.epsilon,
        "axes": [
            {"name": a.name, "lo": a.lo, "hi": a.hi, "count": a.count}
            for a in grid.axes
        ],
        "kernel_version": __version__,
        "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "failed_points": [i for i, r in enumerate(records) if r.error],
        "errors": {str(i): r.error for i, r in enumerate(records) if r.error},
    }
    return SweepResult(grid, records, meta)


def sweep_zigzag(
    n: int,
    y_axis: Axis,
    chi_axis: Axis,
    t: float,
    m_policy: str | int = M_ALL,
    epsilon: float = DEFAULT_EPSILON,
    workers: int = 1,
) -> SweepResult:
    """Scan transfer optima of an n-node zigzag chain over rise x field angle."""
    grid = SweepGrid((y_axis, chi_axis), ZIGZAG, n, t, m_policy, epsilon)
    return run_sweep(grid, workers)


def sweep_alternating(
    n: int,
    alpha_axis: Axis,
    t: float,
    m_policy: str | int = M_ALL,
    epsilon: float = DEFAULT_EPSILON,
    workers: int = 1,
) -> SweepResult:
    """Scan transfer optima of an n-node alternating chain over the alternation parameter."""
    grid = SweepGrid((alpha_axis,), ALTERNATING, n, t, m_policy, epsilon)
    return run_sweep(grid, workers)


def _domain_clip(grid: SweepGrid, axis_index: int, value: float) -> float:
    axis = grid.axes[axis_index]
    if grid.kind == ALTERNATING:
        value = min(2.0 - 1e-9, max(1e-9, value))
    elif axis.name.lower() in ("y",):
        value = max(0.0, value)
    else:
        value = min(math.pi, max(0.0, value))
    return value


def locate_optimum(result: SweepResult) -> tuple[tuple[float, ...], float, float]:
    """Refine the grid argmax by coordinate descent with step halving.

    Starting from the best grid record, each parameter is nudged by the grid
    cell size (halved whenever no direction improves) until all steps drop
    below 1e-3.  Movement is confined to one initial grid cell around the
    starting point, and the refined probability never falls below the grid
    maximum.  Returns ``(params, p_max, tau_max)``.
    """
    valid = [r for r in result.records if not r.error and not math.isnan(r.p_max)]
    if not valid:
        raise ValueError("sweep produced no evaluable records")
    best = max(valid, key=lambda r: r.p_max)
    if len(result.records) == 1:
        return best.params, best.p_max, best.tau_max

    grid = result.grid
    params = list(best.params)
    bounds = [
        (p - grid.axes[i].cell, p + grid.axes[i].cell) for i, p in enumerate(params)
    ]

    def measure(pt: list[float]) -> tuple[float, float]:
        rec = evaluate_point(grid, tuple(pt))
        if rec.error:
            return -math.inf, math.nan
        return rec.p_max, rec.tau_max

    p_best, tau_best = measure(params)
    steps = [grid.axes[i].cell for i in range(len(params))]
    while max(steps) >= 1e-3:
        improved = False
        for i in range(len(params)):
            for sign in (+1.0, -1.0):
                cand = list(params)
                cand[i] = _domain_clip(
                    grid,
                    i,
                    min(bounds[i][1], max(bounds[i][0], params[i] + sign * steps[i])),
                )
                if cand[i] == params[i]:
                    continue
                p_c, tau_c = measure(cand)
                if p_c > p_best:
                    params, p_best, tau_best = cand, p_c, tau_c
                    improved = True
        if not improved:
            steps = [s / 2.0 for s in steps]
    return tuple(params), p_best, tau_best


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def write_sweep_csv(result: SweepResult, path: str | Path) -> None:
    """Long-form CSV, one grid point per row; columns depend on kind and policy."""
    grid = result.grid
    cols = ["Y", "chi"] if grid.kind == ZIGZAG else ["alpha"]
    cols += ["p_max", "tau_max"]
    extra = grid.m_policy == M_AUTO
    if extra:
        cols += ["calM", "J"]
    lines = [",".join(cols)]
    for rec in result.records:
        row = [_fmt(p) for p in rec.params] + [_fmt(rec.p_max), _fmt(rec.tau_max)]
        if extra:
            row.append("" if rec.cal_m is None else str(rec.cal_m))
            row.append("" if rec.j_ref is None else _fmt(rec.j_ref))
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_sweep_meta(result: SweepResult, path: str | Path) -> None:
    """Sidecar JSON with the grid spec, policy, kernel version and failures."""
    Path(path).write_text(json.dumps(result.metadata, indent=2, sort_keys=True) + "\n")
