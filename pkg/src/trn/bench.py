"""Benchmark grid: CP search vs MIP (external solver) vs plain enumeration."""
from __future__ import annotations

import csv
import hashlib
import io
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Iterable, List, Optional

import numpy as np

from trn.cp import SolverConfig, SolverTimeout, solve, solve_exhaustive
from trn.generator import GenerationError, GenParams, generate
from trn.mip import MipSolverError, SolverTimeoutError, encode, solve_external

log = logging.getLogger(__name__)

SOLVERS = ("cp", "mip", "exhaustive")
OUTCOMES = ("consistent", "inconsistent", "timeout", "error")
CSV_HEADER = ["solver", "N", "R", "density", "trial", "seed", "outcome", "elapsed_s"]
# documented bound on how far past the timeout a run may report
TIMEOUT_SLACK = 0.10


@dataclass(frozen=True)
class BenchConfig:
    n_values: tuple = (10, 20, 30, 40, 50, 60, 70, 80, 90, 100)
    r_values: tuple = (2, 4, 6, 8, 10, 20)
    densities: tuple = ("sparse", "dense")
    trials_per_cell: int = 5
    timeout: float = 30.0
    solvers: tuple = ("cp", "mip")
    base_seed: int = 0
    serial: bool = False
    workers: Optional[int] = None
    mip_command: Optional[str] = None
    # literal enumeration over every event (True) or over resource events only
    exhaustive_all_events: bool = True

    def __post_init__(self):
        for name in ("n_values", "r_values", "densities", "solvers"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be >= 1")
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        bad = set(self.solvers) - set(SOLVERS)
        if bad:
            raise ValueError(f"unknown solvers {sorted(bad)}")
        bad = set(self.densities) - {"sparse", "dense"}
        if bad:
            raise ValueError(f"unknown densities {sorted(bad)}")


@dataclass(frozen=True)
class BenchRecord:
    solver: str
    N: int
    R: int
    density: str
    trial: int
    seed: int
    outcome: str
    elapsed: float
    nodes: Optional[int] = field(default=None, compare=False)


def cell_seed(base_seed: int, n: int, r: int, density: str, trial: int) -> int:
    key = f"{base_seed}:{n}:{r}:{density}:{trial}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big") >> 1


def _run_one(task) -> BenchRecord:
    solver, n, r, density, trial, seed, cfg = task

    def rec(outcome, elapsed, nodes=None):
        return BenchRecord(solver, n, r, density, trial, seed, outcome, elapsed, nodes)

    try:
        inst = generate(GenParams(n, r, density=density, seed=seed))
    except GenerationError as exc:
        log.warning("generation failed for %s: %s", (n, r, density, trial), exc)
        return rec("error", 0.0)

    start = time.perf_counter()
    try:
        if solver == "cp":
            res = solve(inst.trn, SolverConfig(deadline=cfg.timeout))
            return rec(_verdict(res.consistent), time.perf_counter() - start, res.stats.nodes_expanded)
        if solver == "exhaustive":
            sc = SolverConfig(deadline=cfg.timeout, exhaustive_cap=None,
                              exhaustive_all_events=cfg.exhaustive_all_events)
            res = solve_exhaustive(inst.trn, sc)
            return rec(_verdict(res.consistent), time.perf_counter() - start, res.stats.nodes_expanded)
        sol = solve_external(encode(inst.trn), cfg.mip_command, deadline=cfg.timeout)
        outcome = {"feasible": "consistent", "infeasible": "inconsistent"}.get(sol.status, "error")
        return rec(outcome, time.perf_counter() - start)
    except (SolverTimeout, SolverTimeoutError) as exc:
        nodes = exc.stats.nodes_expanded if isinstance(exc, SolverTimeout) else None
        return rec("timeout", time.perf_counter() - start, nodes)
    except MipSolverError as exc:
        log.warning("mip run failed for %s: %s", (n, r, density, trial), exc)
        return rec("error", time.perf_counter() - start)


def _verdict(ok: bool) -> str:
    return "consistent" if ok else "inconsistent"


def tasks(cfg: BenchConfig) -> list:
    out = []
    for density in cfg.densities:
        for n in cfg.n_values:
            for r in cfg.r_values:
                for trial in range(cfg.trials_per_cell):
                    seed = cell_seed(cfg.base_seed, n, r, density, trial)
                    for solver in cfg.solvers:
                        out.append((solver, n, r, density, trial, seed, cfg))
    return out


def _cross_check(records: List[BenchRecord]) -> List[BenchRecord]:
    by_cell = {}
    for i, rec in enumerate(records):
        by_cell.setdefault((rec.N, rec.R, rec.density, rec.trial), []).append(i)
    out = list(records)
    for cell, idx in by_cell.items():
        finished = [i for i in idx if records[i].outcome in ("consistent", "inconsistent")]
        if len({records[i].outcome for i in finished}) > 1:
            log.error("solvers disagree on cell %s: %s", cell,
                      {records[i].solver: records[i].outcome for i in finished})
            for i in finished:
                r = records[i]
                out[i] = BenchRecord(r.solver, r.N, r.R, r.density, r.trial, r.seed,
                                     "error", r.elapsed, r.nodes)
    return out


def run(cfg: BenchConfig, progress=None) -> List[BenchRecord]:
    if "mip" in cfg.solvers and not (cfg.mip_command or os.environ.get("TRN_MIP_SOLVER")):
        raise ValueError("mip solver requested but no solver command configured")
    work = tasks(cfg)
    workers = cfg.workers or max(1, (os.cpu_count() or 1) - 1)
    if cfg.serial or workers == 1:
        results = []
        for t in work:
            results.append(_run_one(t))
            if progress:
                progress(results[-1])
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = []
            for rec in pool.map(_run_one, work):
                results.append(rec)
                if progress:
                    progress(rec)
    return _cross_check(results)


def write_csv(records: Iterable[BenchRecord], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.solver, r.N, r.R, r.density, r.trial, r.seed, r.outcome, repr(r.elapsed)])


def read_csv(fh) -> List[BenchRecord]:
    rows = csv.reader(fh)
    header = next(rows)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    return [BenchRecord(s, int(n), int(r), d, int(t), int(seed), o, float(e))
            for s, n, r, d, t, seed, o, e in rows]


def records_to_csv(records) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


@dataclass(frozen=True)
class RatioCell:
    N: int
    R: int
    density: str
    ratio: float
    num_mean: float
    num_std: float
    den_mean: float
    den_std: float


def _summary(recs):
    if not recs or any(r.outcome in ("timeout", "error") for r in recs):
        return None
    t = np.array([r.elapsed for r in recs])
    return float(t.mean()), float(t.std())


def ratio_table(records: Iterable[BenchRecord], numerator: str = "mip",
                denominator: str = "cp") -> List[RatioCell]:
    """Mean-time ratio numerator/denominator per (N, R, density) cell.

    A solver that timed out on any trial of a cell has no mean there: the
    ratio is 0 if only the denominator failed, inf if only the numerator
    failed, and the cell is dropped when both failed.
    """
    cells = {}
    for r in records:
        cells.setdefault((r.N, r.R, r.density), {}).setdefault(r.solver, []).append(r)
    out = []
    for (n, r, density), by_solver in sorted(cells.items()):
        if numerator not in by_solver or denominator not in by_solver:
            continue
        num, den = _summary(by_solver[numerator]), _summary(by_solver[denominator])
        if num is None and den is None:
            continue
        nan = (math.nan, math.nan)
        if den is None:
            ratio = 0.0
        elif num is None:
            ratio = math.inf
        else:
            ratio = num[0] / den[0] if den[0] > 0 else math.inf
        out.append(RatioCell(n, r, density, ratio, *(num or nan), *(den or nan)))
    return out


def ratio_csv(cells: Iterable[RatioCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f.name for f in fields(RatioCell)])
    for c in cells:
        w.writerow([getattr(c, f.name) for f in fields(RatioCell)])
    return buf.getvalue()


def render_ratio_text(cells: Iterable[RatioCell]) -> str:
    cells = list(cells)
    blocks = []
    for density in sorted({c.density for c in cells}):
        sub = {(c.N, c.R): c.ratio for c in cells if c.density == density}
        ns = sorted({n for n, _ in sub})
        rs = sorted({r for _, r in sub})
        lines = [f"[{density}]  rows N, columns R", "N\\R".rjust(6) + "".join(f"{r:>10}" for r in rs)]
        for n in ns:
            row = f"{n:>6}"
            for r in rs:
                v = sub.get((n, r))
                row += f"{'':>10}" if v is None else f"{v:>10.3g}"
            lines.append(row)
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
