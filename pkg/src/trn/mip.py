"""Big-M mixed-integer encoding of TRN-over-STN consistency.

Variables: one continuous time ``t_<e>`` per event in ``[0, M]`` and one
binary ``x_<a>_<b>`` per ordered pair of distinct resource events, equal to 1
when ``a`` runs no later than ``b``. Rows, tagged by the family they belong to:

* ``eq4``/``eq5``  big-M linking of times to the order binaries,
* ``eq6``          ``x_ab + x_ba = 1``,
* ``eq8``          usage right after each resource event is non-positive,
* ``eq9``          the simple temporal constraints themselves.

The horizon bounds ``0 <= t <= M`` live in the Bounds section and binarity in
the Binaries section.

Solving is delegated to any executable that reads an LP file; see
``solve_external``.
"""
from __future__ import annotations

import math
import os
import re
import shlex
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

from trn.resource import Ordering, Trn, activity_precedences, align_to_order, deltas
from trn.temporal import Stn

SOLVER_ENV = "TRN_MIP_SOLVER"
FEASIBILITY_TOL = 1e-6


class UnsupportedAtnError(ValueError):
    pass


class MipSolverError(RuntimeError):
    pass


class SolverNotFoundError(MipSolverError):
    pass


class SolverTimeoutError(MipSolverError):
    pass


class SolverExitError(MipSolverError):
    pass


class SolutionParseError(MipSolverError):
    pass


class InconsistentBinariesError(ValueError):
    pass


@dataclass(frozen=True)
class Row:
    name: str
    terms: tuple  # ((var, coef), ...)
    sense: str  # "<=", ">=", "="
    rhs: float
    tag: str

    def satisfied(self, values: Mapping[str, float], tol: float = FEASIBILITY_TOL) -> bool:
        lhs = sum(c * values[v] for v, c in self.terms)
        if self.sense == "<=":
            return lhs <= self.rhs + tol
        if self.sense == ">=":
            return lhs >= self.rhs - tol
        return abs(lhs - self.rhs) <= tol


@dataclass(frozen=True)
class MipModel:
    event_names: tuple
    time_vars: tuple  # index = event
    binaries: Dict  # (a, b) -> var name
    rows: tuple
    horizon: float

    @property
    def binary_vars(self) -> list:
        return [self.binaries[k] for k in sorted(self.binaries)]

    def rows_tagged(self, tag: str) -> list:
        return [r for r in self.rows if r.tag == tag]


@dataclass
class MipSolution:
    status: str  # "feasible" | "infeasible" | "unknown"
    values: Dict[str, float] = field(default_factory=dict)


_LP_NAME = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


def _labels(names) -> list:
    if all(_LP_NAME.match(n) for n in names):
        return list(names)
    return [f"e{i}" for i in range(len(names))]


def default_horizon(stn: Stn) -> float:
    total = 0.0
    for c in stn.constraints:
        finite = [abs(b) for b in (c.lower, c.upper) if math.isfinite(b)]
        if finite:
            total += max(finite)
    return total + 1.0


def encode(trn: Trn, horizon: Optional[float] = None) -> MipModel:
    if not isinstance(trn.atn, Stn):
        raise UnsupportedAtnError(
            f"{type(trn.atn).__name__} has no MIP formulation; only plain STNs can be encoded")
    stn = trn.atn
    M = default_horizon(stn) if horizon is None else float(horizon)
    if not M > 0:
        raise ValueError("horizon must be positive")
    labels = _labels(stn.names)
    t = tuple(f"t_{lab}" for lab in labels)
    d = deltas(trn.resources)
    re_events = sorted(d)
    binaries = {(a, b): f"x_{labels[a]}_{labels[b]}" for a in re_events for b in re_events if a != b}

    rows = []
    for (a, b), x in sorted(binaries.items()):
        rows.append(Row(f"eq4_{labels[a]}_{labels[b]}", ((t[a], 1.0), (t[b], -1.0), (x, M)), ">=", 0.0, "eq4"))
        rows.append(Row(f"eq5_{labels[a]}_{labels[b]}", ((t[a], 1.0), (t[b], -1.0), (x, M)), "<=", M, "eq5"))
    for (a, b), x in sorted(binaries.items()):
        if a < b:
            rows.append(Row(f"eq6_{labels[a]}_{labels[b]}", ((x, 1.0), (binaries[b, a], 1.0)), "=", 1.0, "eq6"))
    # Usage right after a is delta(a) + sum_b delta(b) x_ba. Deltas sum to zero,
    # so with x_ba = 1 - x_ab that equals -sum_b delta(b) x_ab. The second form
    # has rhs exactly 0: the row for the last event stays exactly tight after
    # coefficients are rounded for the LP file, instead of missing by ~1e-9.
    for a in re_events:
        terms = tuple((binaries[a, b], d[b]) for b in re_events if b != a)
        rows.append(Row(f"eq8_{labels[a]}", terms, ">=", 0.0, "eq8"))
    stcs = list(stn.constraints) + activity_precedences(trn.resources)
    for k, c in enumerate(stcs):
        gap = ((t[c.target], 1.0), (t[c.source], -1.0))
        if math.isfinite(c.lower):
            rows.append(Row(f"eq9_{k}_lb", gap, ">=", c.lower, "eq9"))
        if math.isfinite(c.upper):
            rows.append(Row(f"eq9_{k}_ub", gap, "<=", c.upper, "eq9"))
    return MipModel(tuple(stn.names), t, binaries, tuple(rows), M)


def _num(v: float) -> str:
    s = f"{v:.9g}"
    return "0" if s == "-0" else s


def _expr(terms) -> str:
    parts = []
    for i, (var, coef) in enumerate(terms):
        sign = "-" if coef < 0 else "+"
        mag = _num(abs(coef))
        if i == 0:
            parts.append(f"{'-' if coef < 0 else ''}{mag} {var}")
        else:
            parts.append(f"{sign} {mag} {var}")
    return " ".join(parts)


def export_lp(model: MipModel) -> str:
    """CPLEX-LP text; deterministic for a given model."""
    lines = ["\\ time-resource consistency (feasibility only)", "Minimize", " obj: 0"]
    if model.time_vars:
        lines[-1] = f" obj: 0 {model.time_vars[0]}"
    lines.append("Subject To")
    for r in model.rows:
        lines.append(f" {r.name}: {_expr(r.terms)} {r.sense} {_num(r.rhs)}")
    lines.append("Bounds")
    for v in model.time_vars:
        lines.append(f" 0 <= {v} <= {_num(model.horizon)}")
    lines.append("Binaries")
    for v in model.binary_vars:
        lines.append(f" {v}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def order_binaries(model: MipModel, sigma: Ordering) -> dict:
    r = sigma.ranks
    return {x: 1.0 if r[a] < r[b] else 0.0 for (a, b), x in model.binaries.items()}


def _parse_solution(text: str, model: MipModel) -> MipSolution:
    known = set(model.time_vars) | set(model.binaries.values())
    values: Dict[str, float] = {}
    infeasible = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        low = line.lower()
        if "infeasible" in low and "not infeasible" not in low:
            infeasible = True
            continue
        if line.startswith("#"):
            continue
        tok = line.split()
        try:
            if len(tok) == 2 and tok[0] in known:
                values[tok[0]] = float(tok[1])
            elif len(tok) >= 3 and tok[1] in known:  # "<idx> <name> <value> [<reduced cost>]"
                values[tok[1]] = float(tok[2])
        except ValueError:
            raise SolutionParseError(f"bad value in line {raw!r}") from None
    if infeasible:
        return MipSolution("infeasible")
    if not known:
        return MipSolution("feasible")
    if not values:
        raise SolutionParseError("solver output contains neither a status nor variable values")
    missing = known - set(values)
    if missing:
        raise SolutionParseError(f"solution lacks {len(missing)} variables, e.g. {sorted(missing)[0]}")
    return MipSolution("feasible", values)


def solve_external(model: MipModel, solver_command: Optional[str] = None,
                   deadline: Optional[float] = None) -> MipSolution:
    """Run ``<command> <model.lp>`` and read the solution.

    The solution is taken from ``<model>.sol`` next to the LP file when the
    solver writes one, otherwise from stdout. Accepted: ``<var> <value>``
    lines (``#`` comments allowed, as in Gurobi .sol files) or CBC-style
    ``<idx> <var> <value> <reduced>`` lines. Any line containing
    "infeasible" marks the model infeasible.
    """
    command = solver_command or os.environ.get(SOLVER_ENV)
    if not command:
        raise SolverNotFoundError(f"no MIP solver configured (set {SOLVER_ENV})")
    argv = shlex.split(command)
    if shutil.which(argv[0]) is None and not os.path.isfile(argv[0]):
        raise SolverNotFoundError(f"solver executable {argv[0]!r} not found")
    with tempfile.TemporaryDirectory(prefix="trn-mip-") as tmp:
        lp = os.path.join(tmp, "model.lp")
        with open(lp, "w") as fh:
            fh.write(export_lp(model))
        try:
            proc = subprocess.run(argv + [lp], capture_output=True, text=True,
                                  timeout=deadline, cwd=tmp)
        except FileNotFoundError:
            raise SolverNotFoundError(f"solver executable {argv[0]!r} not found") from None
        except subprocess.TimeoutExpired:
            raise SolverTimeoutError(f"solver exceeded {deadline}s") from None
        if proc.returncode != 0:
            raise SolverExitError(f"solver exited with {proc.returncode}: {proc.stderr.strip()[:400]}")
        sol = os.path.join(tmp, "model.sol")
        text = open(sol).read() if os.path.exists(sol) else proc.stdout
    return _parse_solution(text, model)


def decode_solution(model: MipModel, solution: MipSolution, align_tol: float = FEASIBILITY_TOL):
    """Schedule and order from a feasible solution (binaries rounded at 0.5)."""
    if solution.status != "feasible":
        raise ValueError(f"cannot decode a {solution.status} solution")
    v = solution.values
    schedule = {e: float(v[name]) for e, name in enumerate(model.time_vars)}
    bit = {k: v[name] >= 0.5 for k, name in model.binaries.items()}
    for (a, b) in bit:
        if bit[a, b] == bit[b, a]:
            raise InconsistentBinariesError(f"{model.binaries[a, b]} and {model.binaries[b, a]} agree")
    events = sorted({a for a, _ in bit})
    before = {a: sum(bit[b, a] for b in events if b != a) for a in events}
    if sorted(before.values()) != list(range(len(events))):
        raise InconsistentBinariesError("order binaries are not transitive")
    seq = sorted(events, key=before.__getitem__)
    return align_to_order(schedule, seq, align_tol), Ordering.from_sequence(seq)
