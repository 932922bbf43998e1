"""Command-line front end.

Subcommands map one-to-one onto the library surface: ``chain`` emits
geometry files, ``evolve`` probability traces, ``sweep`` parameter scans
with sidecar metadata, ``approx`` neighbor-window reports, ``table1`` the
three reference transfer cases with tolerance checks, and ``oracle-check``
the full-space equivalence suite.

Configuration is flat ``key = value`` text; every key can also be given as
a command-line flag of the same name, which wins over the file.  Exit codes:
0 success, 1 usage/config error, 2 tolerance failure, 3 numerical error.
"""

from __future__ import annotations

import argparse
import io
import math
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    DegenerateGeometryError,
    DipoleChainError,
    SizeLimitError,
    UndefinedRatioError,
)
from . import geometry as geo
from .geometry import FieldOrientation, alternating_nodes, read_nodes, write_nodes, zigzag_nodes
from .hamiltonian import ALTERNATING_TIME, ZIGZAG_TIME
from .dynamics import (
    chain_decomposition,
    probability_traces,
    uniform_trace,
)
from .metrics import (
    approx_report,
    default_window,
    max_probability,
    minimal_m,
    sampling_step,
    uniform_window_grid,
)
from .sweep import Axis, SweepGrid, run_sweep, write_sweep_csv, write_sweep_meta
from .oracle import SIZE_LIMIT, full_space_site_traces

_EXIT_OK = 0
_EXIT_CONFIG = 1
_EXIT_TOLERANCE = 2
_EXIT_NUMERICAL = 3


@dataclass(frozen=True)
class RunConfig:
    """One command's inputs; every field maps to a config key / CLI flag."""

    chain: str = "zigzag"
    n: int | None = None
    y: float | None = None
    alpha: float | None = None
    chi: float | None = None
    m: str = "all"
    t_max: float | None = None
    epsilon: float = 0.01
    grid: tuple[str, ...] = ()
    out: str | None = None
    workers: int = 1
    seed: int = 7041
    sites: str = "last"
    tau_step: float | None = None
    geometry: str | None = None
    instances: int = 50

    def validate(self) -> "RunConfig":
        if self.chain not in ("zigzag", "alternating", "file"):
            raise ConfigError(f"chain must be zigzag, alternating or file, got {self.chain!r}")
        if self.chain == "alternating" and self.y is not None:
            raise ConfigError("y applies only to zigzag chains")
        if self.chain != "alternating" and self.alpha is not None:
            raise ConfigError("alpha applies only to alternating chains")
        if self.chain == "file" and not self.geometry:
            raise ConfigError("chain=file requires a geometry path")
        if self.m not in ("all", "auto"):
            try:
                if int(self.m) < 1:
                    raise ValueError
            except ValueError:
                raise ConfigError(f"m must be an integer >= 1, 'all' or 'auto', got {self.m!r}")
        if self.sites not in ("last", "all"):
            raise ConfigError(f"sites must be 'last' or 'all', got {self.sites!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, raw: str):
    if name == "grid":
        return tuple(part.strip() for part in raw.split(";") if part.strip())
    kind = str(_FIELD_TYPES[name])
    if kind.startswith("int"):
        return int(raw)
    if kind.startswith("float"):
        return float(raw)
    return raw


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines ('#' comments allowed) into a dict."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        name = key.strip().replace("-", "_")
        if name not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key.strip()!r}")
        try:
            values[name] = _coerce(name, val.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key.strip()!r}: {exc}")
    return values


def config_from_mapping(values: dict) -> RunConfig:
    return RunConfig(**values).validate()


def serialize_config(cfg: RunConfig) -> str:
    """Inverse of :func:`parse_config_text`: parse(serialize(cfg)) == cfg."""
    lines = []
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        key = f.name.replace("_", "-")
        if f.name == "grid":
            if not value:
                continue
            lines.append(f"{key} = {' ; '.join(value)}")
        elif isinstance(value, float):
            lines.append(f"{key} = {value!r}")
        else:
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path) -> RunConfig:
    return config_from_mapping(parse_config_text(Path(path).read_text()))


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(_EXIT_CONFIG)


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--chain", choices=["zigzag", "alternating", "file"])
    common.add_argument("--n", type=int)
    common.add_argument("--y", type=float, help="zigzag rise of even nodes")
    common.add_argument("--alpha", type=float, help="alternation parameter in (0, 2)")
    common.add_argument("--chi", type=float, help="field angle in radians")
    common.add_argument("--m", help="neighbor window: integer, 'all' or 'auto'")
    common.add_argument("--t-max", type=float, dest="t_max", help="registration window")
    common.add_argument("--epsilon", type=float, help="neighbor-window precision")
    common.add_argument(
        "--grid",
        action="append",
        metavar="AXIS:LO:HI:COUNT",
        help="sweep axis spec, repeatable",
    )
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--workers", type=int, help="sweep worker processes")
    common.add_argument("--seed", type=int, help="seed for randomized checks")
    common.add_argument("--sites", choices=["last", "all"], help="trace columns")
    common.add_argument("--tau-step", type=float, dest="tau_step", help="trace step override")
    common.add_argument("--geometry", help="node file for chain=file")
    common.add_argument("--instances", type=int, help="oracle-check instance count")

    parser = _Parser(prog="dipolechain", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, descr in [
        ("chain", "emit a chain geometry file"),
        ("evolve", "emit a transfer-probability trace CSV"),
        ("sweep", "scan a parameter grid, emit CSV + sidecar JSON"),
        ("approx", "emit the neighbor-window report CSV"),
        ("table1", "run the three reference transfer cases with tolerances"),
        ("oracle-check", "compare reduced dynamics against the full space"),
    ]:
        sub.add_parser(name, parents=[common], help=descr)
    return parser


def _merge_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        values.update(parse_config_text(Path(args.config).read_text()))
    for f in fields(RunConfig):
        cli_value = getattr(args, f.name, None)
        if cli_value is not None:
            values[f.name] = tuple(cli_value) if f.name == "grid" else cli_value
    return config_from_mapping(values)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _build_nodes(cfg: RunConfig):
    if cfg.chain == "file":
        return read_nodes(cfg.geometry)
    if cfg.n is None:
        raise ConfigError(f"{cfg.chain} chain requires n")
    if cfg.chain == "zigzag":
        if cfg.y is None:
            raise ConfigError("zigzag chain requires y")
        return zigzag_nodes(cfg.n, cfg.y)
    if cfg.alpha is None:
        raise ConfigError("alternating chain requires alpha")
    return alternating_nodes(cfg.n, cfg.alpha)


def _chain_context(cfg: RunConfig):
    """nodes, field and time convention implied by the chain kind."""
    nodes = _build_nodes(cfg)
    if cfg.chain == "alternating":
        return nodes, FieldOrientation(0.0), ALTERNATING_TIME
    if cfg.chi is None:
        raise ConfigError(f"{cfg.chain} chains require chi")
    return nodes, FieldOrientation(cfg.chi), ZIGZAG_TIME


def _resolve_window(cfg: RunConfig, nodes) -> float:
    if cfg.t_max is not None:
        return cfg.t_max
    return default_window(nodes.label, len(nodes))


def _resolve_m(cfg: RunConfig, nodes, field, mode, t) -> int:
    n = len(nodes)
    if cfg.m == "all":
        return n - 1
    if cfg.m == "auto":
        return minimal_m(nodes, field, t, cfg.epsilon, mode)
    m = int(cfg.m)
    if not 1 <= m <= n - 1:
        raise ConfigError(f"m must lie in 1..{n - 1} for n={n}, got {m}")
    return m


def cmd_chain(cfg: RunConfig) -> int:
    nodes = _build_nodes(cfg)
    if cfg.out:
        write_nodes(nodes, cfg.out)
    else:
        sys.stdout.write(
            "\n".join(f"{x:.17g} {y:.17g}" for x, y in nodes.positions) + "\n"
        )
    return _EXIT_OK


def cmd_evolve(cfg: RunConfig) -> int:
    nodes, field, mode = _chain_context(cfg)
    t = _resolve_window(cfg, nodes)
    m = _resolve_m(cfg, nodes, field, mode, t)
    dec = chain_decomposition(nodes, field, m, mode)
    n = len(nodes)
    step_bound = cfg.tau_step if cfg.tau_step is not None else sampling_step(dec, n)
    step, count = uniform_window_grid(t, step_bound)
    grid = np.arange(count) * step
    buf = io.StringIO()
    if cfg.sites == "all":
        values = probability_traces(dec, list(range(1, n + 1)), grid)
        _write_trace(buf, grid, values, list(range(1, n + 1)))
    else:
        values = uniform_trace(dec, n, step, count)
        _write_trace(buf, grid, values, None)
    _emit(buf.getvalue(), cfg.out)
    return _EXIT_OK


def _write_trace(buf, grid, values, sites) -> None:
    values = np.asarray(values)
    if values.ndim == 1:
        buf.write("tau,p\n")
        for t, p in zip(grid, values):
            buf.write(f"{t:.12g},{p:.12g}\n")
    else:
        buf.write("tau," + ",".join(f"p_{s}" for s in sites) + "\n")
        for t, row in zip(grid, values):
            buf.write(f"{t:.12g}," + ",".join(f"{p:.12g}" for p in row) + "\n")


def _parse_axis(spec: str) -> Axis:
    parts = spec.split(":")
    if len(parts) != 4:
        raise ConfigError(f"grid spec must be axis:lo:hi:count, got {spec!r}")
    name, lo, hi, count = parts
    try:
        return Axis(name.strip(), float(lo), float(hi), int(count))
    except ValueError as exc:
        raise ConfigError(f"bad grid spec {spec!r}: {exc}")


def cmd_sweep(cfg: RunConfig) -> int:
    if cfg.chain == "file":
        raise ConfigError("sweeps need a parametric chain kind (zigzag or alternating)")
    axes = {a.name.lower(): a for a in map(_parse_axis, cfg.grid)}
    if cfg.chain == "zigzag":
        if set(axes) != {"y", "chi"}:
            raise ConfigError("zigzag sweep needs grid axes Y and chi")
        axis_list = (axes["y"], axes["chi"])
    else:
        if set(axes) != {"alpha"}:
            raise ConfigError("alternating sweep needs the grid axis alpha")
        axis_list = (axes["alpha"],)
    if cfg.n is None:
        raise ConfigError("sweep requires n")
    policy = cfg.m if cfg.m in ("all", "auto") else int(cfg.m)
    t = cfg.t_max if cfg.t_max is not None else default_window(cfg.chain, cfg.n)
    grid = SweepGrid(axis_list, cfg.chain, cfg.n, t, policy, cfg.epsilon)
    result = run_sweep(grid, cfg.workers)

    out = cfg.out or "sweep.csv"
    write_sweep_csv(result, out)
    write_sweep_meta(result, str(out) + ".meta.json")
    ok = [r for r in result.records if not r.error]
    if ok:
        best = max(ok, key=lambda r: r.p_max)
        params = " ".join(f"{a.name}={v:.6g}" for a, v in zip(axis_list, best.params))
        print(
            f"{len(result.records)} points ({len(result.records) - len(ok)} sentinel); "
            f"best p_max={best.p_max:.6g} at {params}, tau_max={best.tau_max:.6g}"
        )
    else:
        print(f"{len(result.records)} points, all sentinel")
    return _EXIT_OK


def cmd_approx(cfg: RunConfig) -> int:
    nodes, field, mode = _chain_context(cfg)
    t = _resolve_window(cfg, nodes)
    report = approx_report(nodes, field, t, cfg.epsilon, mode)
    buf = io.StringIO()
    buf.write("M,J_M,ratio\n")
    for m, j, r in zip(report.m_values, report.j, report.ratio):
        buf.write(f"{int(m)},{j:.12g},{r:.12g}\n")
    buf.write(f"calM={report.cal_m},epsilon={report.epsilon:g}\n")
    _emit(buf.getvalue(), cfg.out)
    print(f"calM={report.cal_m} (epsilon={report.epsilon:g}, T={t:g})", file=sys.stderr)
    return _EXIT_OK


_TABLE1_CASES = [
    # label, builder args, window, expected (p, p_tol, tau, tau_tol)
    ("zigzag N=41", ("zigzag", 41, 1.192, 1.574), 410.0, (0.714, 0.005, 262.282, 0.5)),
    ("zigzag N=40", ("zigzag", 40, 2.843, 2.031), 850.0, (0.802, 0.005, 690.657, 690.657 * 0.01)),
    ("alternating N=40", ("alternating", 40, 1.48, None), 5.0e5, (0.999, None, 204164.0, 204164.0 * 0.01)),
]


def cmd_table1(cfg: RunConfig) -> int:
    rows = []
    failures = 0
    total0 = time.monotonic()
    for label, (kind, n, param, chi), t, (p_ref, p_tol, tau_ref, tau_tol) in _TABLE1_CASES:
        t0 = time.monotonic()
        if kind == "zigzag":
            nodes = zigzag_nodes(n, param)
            dec = chain_decomposition(nodes, FieldOrientation(chi), n - 1, ZIGZAG_TIME)
            params = f"Y={param:g} chi={chi:g}"
        else:
            nodes = alternating_nodes(n, param)
            dec = chain_decomposition(nodes, FieldOrientation(0.0), n - 1, ALTERNATING_TIME)
            params = f"alpha={param:g}"
        opt = max_probability(dec, t)
        elapsed = time.monotonic() - t0
        p_ok = opt.p_max >= p_ref if p_tol is None else abs(opt.p_max - p_ref) <= p_tol
        tau_ok = abs(opt.tau_max - tau_ref) <= tau_tol
        status = "ok" if (p_ok and tau_ok) else "FAIL"
        failures += status == "FAIL"
        rows.append((label, params, opt.p_max, opt.tau_max, elapsed, status))
    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  {'p_opt':>9}  {'tau_opt':>12}  parameters")
    for label, params, p, tau, elapsed, status in rows:
        print(f"{label:<{width}}  {p:9.4f}  {tau:12.3f}  {params}  [{elapsed:.2f} s] {status}")
    print(f"runtime: {time.monotonic() - total0:.2f} s total")
    return _EXIT_TOLERANCE if failures else _EXIT_OK


def _random_instance(rng: np.random.Generator, n: int):
    kind = rng.choice(["zigzag", "alternating", "custom"])
    if kind == "zigzag":
        nodes = zigzag_nodes(n, float(rng.uniform(0.0, 2.5)))
    elif kind == "alternating":
        nodes = alternating_nodes(n, float(rng.uniform(0.2, 1.8)))
    else:
        x = np.cumsum(rng.uniform(0.5, 2.0, size=n))
        ypos = rng.uniform(-1.0, 1.0, size=n)
        nodes = geo.NodeList(np.column_stack([x, ypos]))
    field = FieldOrientation(float(rng.uniform(0.0, math.pi)))
    m = int(rng.integers(1, n))
    mode = ZIGZAG_TIME if rng.random() < 0.5 else ALTERNATING_TIME
    return nodes, field, m, mode


def cmd_oracle_check(cfg: RunConfig) -> int:
    if cfg.n is not None and cfg.n > SIZE_LIMIT:
        raise SizeLimitError(
            f"full-space reference is limited to {SIZE_LIMIT} spins, got n={cfg.n}"
        )
    rng = np.random.default_rng(cfg.seed)
    fixed_n = cfg.n
    worst = 0.0
    t0 = time.monotonic()
    for _ in range(cfg.instances):
        n = fixed_n if fixed_n else int(rng.integers(2, 11))
        nodes, field, m, mode = _random_instance(rng, n)
        taus = np.sort(rng.uniform(0.0, 50.0, size=20))
        dec = chain_decomposition(nodes, field, m, mode)
        sites = list(range(1, n + 1))
        reduced = probability_traces(dec, sites, taus)
        full = full_space_site_traces(nodes, field, m, mode, sites, taus)
        worst = max(worst, float(np.abs(reduced - full).max()))
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-10
    print(
        f"{cfg.instances} instances, max |p_full - p_reduced| = {worst:.3e} "
        f"({'ok' if ok else 'FAIL'}) [{elapsed:.1f} s, seed={cfg.seed}]"
    )
    return _EXIT_OK if ok else _EXIT_TOLERANCE


_COMMANDS = {
    "chain": cmd_chain,
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
    "approx": cmd_approx,
    "table1": cmd_table1,
    "oracle-check": cmd_oracle_check,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _merge_config(args)
        return _COMMANDS[args.command](cfg)
    except (DegenerateGeometryError, UndefinedRatioError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL
    except DipoleChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
