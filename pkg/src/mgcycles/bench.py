"""Benchmark driver: run cycle configurations over model problems and
format the results as CSV or markdown tables.

Configuration files are flat ``key = value`` text; ``#`` starts a comment::

    examples = poisson, jump
    m = 64, 128
    suite = standard              # named list of cycles, see SUITES
    cycles = tg; kv:1; n:2:fixed:0,1; amli:3:estimate
    tol = 1e-12
    max_iters = 999
    theta = 0.08
    coarsest_size = 100
    max_levels = 20
    seed = 0
    lanczos_steps = 20
    jobs = 1

A cycle token is ``kind[:k[:bounds]]`` with ``bounds`` either ``estimate``
or ``fixed:<lambda_min>,<lambda_max>``; kinds that use bounds default to
``fixed:0,1``.  ``suite`` and ``cycles`` may both be given; suite cycles
come first.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .aggregation import (DEFAULT_COARSEST_SIZE, DEFAULT_MAX_LEVELS, DEFAULT_THETA,
                          build_hierarchy)
from .cycles import ESTIMATE, CycleKind, CycleSpec, Status, stationary_solve
from .poly import SpectralBounds
from .problems import Example, ProblemSpec, assemble, rhs_for, true_solution
from .spectral import DEFAULT_STEPS, make_cycle

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "SUITES",
    "parse_bounds",
    "parse_cycle",
    "format_cycle",
    "load_config",
    "parse_config",
    "run_suite",
    "result_row",
    "emit",
    "CSV_COLUMNS",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = ("example", "m", "cycle", "k", "bounds", "iters", "factor", "status")

_ZERO_ONE = SpectralBounds(0.0, 1.0)
_TENTH_ONE = SpectralBounds(0.1, 1.0)


def _cycles(kind, ks, bounds=_ZERO_ONE):
    return [CycleSpec(kind, k, bounds) for k in ks]


SUITES: dict[str, list[CycleSpec]] = {
    # low-degree comparison of every cycle kind and bound policy
    "standard": (
        [CycleSpec("tg")]
        + _cycles("kv", (1, 2, 3))
        + _cycles("k", (2, 3))
        + _cycles("amli", (2, 3), ESTIMATE)
        + _cycles("amli", (2, 3))
        + _cycles("h", (2, 3), ESTIMATE)
        + _cycles("h", (2, 3), _TENTH_ONE)
        + _cycles("h", (2, 3))
        + _cycles("n", (2, 3), ESTIMATE)
        + _cycles("n", (2, 3))
    ),
    # fixed-bound polynomial cycles at higher degree
    "high_degree": (
        _cycles("amli", (4, 5, 6, 7))
        + _cycles("h", (4, 5, 6, 7), _TENTH_ONE)
        + _cycles("n", (4, 5, 6, 7))
    ),
}


def parse_bounds(text: str):
    """``"estimate"`` or ``"fixed:a,b"`` (also plain ``"a,b"``)."""
    text = text.strip()
    if text == ESTIMATE:
        return ESTIMATE
    if text.startswith("fixed:"):
        text = text[len("fixed:"):]
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"bounds must be 'estimate' or 'fixed:<min>,<max>', got {text!r}")
    return SpectralBounds(float(parts[0]), float(parts[1]))


def parse_cycle(token: str) -> CycleSpec:
    parts = token.strip().split(":", 2)
    kind = CycleKind(parts[0].strip().lower())
    k = int(parts[1]) if len(parts) > 1 and parts[1].strip() else 1
    if len(parts) > 2:
        return CycleSpec(kind, k, parse_bounds(parts[2]))
    return CycleSpec(kind, k)


def format_cycle(spec: CycleSpec) -> str:
    """Inverse of :func:`parse_cycle`."""
    out = spec.kind.value
    if spec.kind is not CycleKind.TG:
        out += f":{spec.k}"
    if spec.kind.uses_bounds:
        out += ":" + spec.bounds_label()
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    examples: tuple = (Example.POISSON,)
    ms: tuple = (64, 128, 256, 512)
    cycles: tuple = ()
    tol: float = 1e-12
    max_iters: int = 999
    theta: float = DEFAULT_THETA
    coarsest_size: int = DEFAULT_COARSEST_SIZE
    max_levels: int = DEFAULT_MAX_LEVELS
    seed: int = 0
    lanczos_steps: int = DEFAULT_STEPS
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "examples", tuple(Example(e) for e in self.examples))
        object.__setattr__(self, "ms", tuple(int(m) for m in self.ms))
        cyc = tuple(parse_cycle(c) if isinstance(c, str) else c for c in self.cycles)
        object.__setattr__(self, "cycles", cyc)
        if any(m < 2 for m in self.ms):
            raise ValueError("mesh parameters must be >= 2")
        if not all(isinstance(c, CycleSpec) for c in cyc):
            raise TypeError("cycles must be CycleSpec instances or cycle tokens")
        if not 0 < self.tol < 1:
            raise ValueError("tol must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not 0 <= self.theta < 1:
            raise ValueError("theta must lie in [0, 1)")
        if self.coarsest_size < 1 or self.max_levels < 1:
            raise ValueError("coarsest_size and max_levels must be positive")
        if self.lanczos_steps < 1 or self.jobs < 1:
            raise ValueError("lanczos_steps and jobs must be positive")


_INT_KEYS = {"max_iters", "coarsest_size", "max_levels", "seed", "lanczos_steps", "jobs"}
_FLOAT_KEYS = {"tol", "theta"}


def _split(value: str, sep=","):
    return [v.strip() for v in value.split(sep) if v.strip()]


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Parse the flat config format; keyword overrides win over file values.

    ``None`` overrides are ignored so CLI defaults can be passed through.
    """
    values: dict = {}
    cycles: list = []
    suite_cycles: list = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower().replace("-", "_")
        if key == "examples" or key == "example":
            values["examples"] = tuple(_split(value))
        elif key in ("m", "ms"):
            values["ms"] = tuple(int(v) for v in _split(value))
        elif key == "suite":
            for name in _split(value):
                if name not in SUITES:
                    raise ValueError(f"line {lineno}: unknown suite {name!r}")
                suite_cycles += SUITES[name]
        elif key == "cycles":
            cycles += [parse_cycle(t) for t in _split(value, ";")]
        elif key in _INT_KEYS:
            values[key] = int(value)
        elif key in _FLOAT_KEYS:
            values[key] = float(value)
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    values["cycles"] = tuple(suite_cycles + cycles)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def load_config(path, **overrides) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read(), **overrides)


@dataclass(frozen=True)
class ResultRow:
    example: str
    m: int
    cycle: str
    k: int
    bounds: str
    iterations: int
    avg_factor: float
    status: Status
    message: str = field(default="", compare=False)
    seconds: float = field(default=0.0, compare=False)

    def as_dict(self) -> dict:
        return {
            "example": self.example,
            "m": self.m,
            "cycle": self.cycle,
            "k": self.k,
            "bounds": self.bounds,
            "iters": self.iterations,
            "factor": _fmt_factor(self.avg_factor),
            "status": self.status.value,
        }


def result_row(example, m: int, spec: CycleSpec, report=None, message: str = "",
               seconds: float = 0.0) -> ResultRow:
    """Row for one run; without a ``SolveReport`` the run counts as failed."""
    name = getattr(example, "value", example)
    if report is None:
        return ResultRow(name, m, spec.kind.value, spec.k, spec.bounds_label(),
                         0, math.nan, Status.FAILED, message, seconds)
    return ResultRow(name, m, spec.kind.value, spec.k, spec.bounds_label(),
                     report.iterations, report.avg_factor, report.status,
                     report.message, seconds)


def _run_group(example: Example, m: int, config: ExperimentConfig) -> list[ResultRow]:
    """All cycles of one (example, m) pair over one shared hierarchy."""
    try:
        A = assemble(ProblemSpec(example, m))
        b = rhs_for(A, true_solution(A.n_rows))
        H = build_hierarchy(A, config.theta, config.coarsest_size, config.max_levels)
    except Exception as exc:  # noqa: BLE001 - a failed setup must not abort the suite
        log.warning("setup failed for %s m=%d: %s", example.value, m, exc)
        return [result_row(example, m, c, message=f"setup: {exc}") for c in config.cycles]
    rows = []
    for spec in config.cycles:
        t0 = time.perf_counter()
        try:
            cycle = make_cycle(H, spec, config.lanczos_steps, config.seed)
            rep = stationary_solve(A.csr, cycle, b, config.tol, config.max_iters)
            row = result_row(example, m, spec, rep, seconds=time.perf_counter() - t0)
        except Exception as exc:  # noqa: BLE001
            log.warning("%s m=%d %s failed: %s", example.value, m, format_cycle(spec), exc)
            row = result_row(example, m, spec, message=str(exc),
                             seconds=time.perf_counter() - t0)
        log.info("%s m=%d %s: %s %s (%d) %.1fs", example.value, m, format_cycle(spec),
                 row.status.value, _fmt_factor(row.avg_factor), row.iterations, row.seconds)
        rows.append(row)
    return rows


def run_suite(config: ExperimentConfig,
              progress: Callable[[ResultRow], None] | None = None) -> list[ResultRow]:
    """Run every (example, m, cycle) combination.

    Rows come out ordered by example, then m, then the configured cycle
    order, regardless of ``config.jobs``.  Failures are recorded as rows
    with status ``failed``.
    """
    if not config.cycles:
        return []
    groups = [(e, m) for e in config.examples for m in config.ms]
    rows: list[ResultRow] = []
    if config.jobs == 1 or len(groups) == 1:
        results = (_run_group(e, m, config) for e, m in groups)
        for group_rows in results:
            for r in group_rows:
                if progress:
                    progress(r)
            rows += group_rows
        return rows
    with ProcessPoolExecutor(max_workers=config.jobs) as pool:
        futures = [pool.submit(_run_group, e, m, config) for e, m in groups]
        for fut in futures:
            group_rows = fut.result()
            for r in group_rows:
                if progress:
                    progress(r)
            rows += group_rows
    return rows


# --- output ---------------------------------------------------------------------


def _fmt_factor(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf"
    return f"{x:.6f}"


def _cell(row: ResultRow) -> str:
    if row.status is Status.DIVERGED:
        return "-"
    if row.status is Status.FAILED:
        return "failed"
    return f"{_fmt_factor(row.avg_factor)} ({row.iterations})"


def _group_label(row: ResultRow) -> str:
    label = CycleKind(row.cycle).label
    if not row.bounds:
        return label
    if row.bounds == ESTIMATE:
        return f"{label} (estimate lambda_min)"
    lo, hi = row.bounds[len("fixed:"):].split(",")
    if float(hi) == 1.0:
        return f"{label} (lambda_min = {lo})"
    return f"{label} (lambda in [{lo}, {hi}])"


def _markdown(rows: Sequence[ResultRow]) -> str:
    out = []
    examples = list(dict.fromkeys(r.example for r in rows))
    for ex in examples:
        ex_rows = [r for r in rows if r.example == ex]
        ms = sorted({r.m for r in ex_rows})
        cells: dict = {}
        order: list = []
        for r in ex_rows:
            key = (_group_label(r), r.k if r.cycle != CycleKind.TG.value else None)
            if key not in cells:
                cells[key] = {}
                order.append(key)
            cells[key][r.m] = _cell(r)
        out.append(f"### {ex}\n")
        out.append("| cycle | k | " + " | ".join(f"h=1/{m}" for m in ms) + " |")
        out.append("|---|---|" + "---|" * len(ms))
        for label, k in order:
            vals = " | ".join(cells[(label, k)].get(m, "") for m in ms)
            out.append(f"| {label} | {'' if k is None else k} | {vals} |")
        out.append("")
    return "\n".join(out)


def emit(rows: Iterable[ResultRow], fmt: str = "csv") -> str:
    """Render rows as ``csv`` (one line per row) or ``markdown`` tables
    (one table per example, ``factor (iters)`` cells, ``-`` for divergence)."""
    rows = list(rows)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r.as_dict())
        return buf.getvalue()
    if fmt in ("markdown", "md"):
        return _markdown(rows)
    raise ValueError(f"unknown format {fmt!r}; expected 'csv' or 'markdown'")
